#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "xspa/config.hpp"

namespace xspa {

/// Completion marker of a run: written last, recomputable config hash,
/// and the list of produced outputs.
struct RunManifest {
    std::string run_id;
    std::string config_hash_hex;
    std::string command;
    std::string encoder_identity;
    std::uint64_t master_seed = 0;
    std::vector<std::string> outputs;  // paths relative to the run dir
    std::string started_at;
    std::string finished_at;
    std::string effective_config_json;
};

struct CommandOutcome {
    int exit_code = 0;
    std::filesystem::path run_dir;
    std::optional<RunManifest> manifest;
    std::vector<std::string> errors;
};

/// Attacks every PNG in input_dir (labels from input_dir/labels.json),
/// persisting one adversarial image + sidecar + loss history per input and
/// the manifest last. Nonzero exit if any image failed.
CommandOutcome cmd_attack(const RunConfig& config, const std::filesystem::path& input_dir,
                          const std::filesystem::path& output_dir);

/// Renders the mask preview PNG and prints the coverage fraction.
CommandOutcome cmd_mask_preview(const RunConfig& config, const std::filesystem::path& out_png);

/// Evaluates aligned clean/adv image sets; writes EvalRecord tables and a
/// summary. Judge tasks read generated texts from <dir>/captions.json or
/// <dir>/answers.json.
CommandOutcome cmd_eval(const RunConfig& config, const std::filesystem::path& clean_dir,
                        const std::filesystem::path& adv_dir,
                        const std::filesystem::path& output_dir);

/// Runs the configured ablation sweep over the images in input_dir and
/// writes the sweep table plus per-point manifests.
CommandOutcome cmd_sweep(const RunConfig& config, const std::filesystem::path& input_dir,
                         const std::filesystem::path& output_dir);

/// Reads <dir>/labels.json ({"image.png": "class", ...}).
std::vector<std::pair<std::string, std::string>> read_labels_file(
    const std::filesystem::path& dir);

/// The serialized loss-history line format: one JSON object per iteration
/// with fields t, clip, tar, src, mag, line, weighted_total, is_best.
std::string loss_history_to_jsonl(const std::vector<LossBreakdown>& history, int best_iteration);

}  // namespace xspa
