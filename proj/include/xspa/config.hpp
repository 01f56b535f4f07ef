#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "xspa/attack.hpp"
#include "xspa/evaluation.hpp"
#include "xspa/mask.hpp"

namespace xspa {

struct EncoderConfig {
    std::string kind = "toy";  // toy | external
    std::string model_id;      // backend:model, external only
    std::uint64_t seed = 7;
    int feature_dim = 32;
    int patch_size = 4;
    double temperature = 0.07;

    bool operator==(const EncoderConfig&) const = default;
};

struct PoolsConfig {
    std::vector<std::string> class_names;
    std::optional<std::string> target_label;
    std::vector<std::string> caption_drift_prompts;
    std::vector<std::string> vqa_shift_prompts;
    std::vector<std::string> source_prompts;
    /// When no explicit target-side prompt exists, use the next class in
    /// the class list as the target pool entry.
    bool auto_target = true;

    bool operator==(const PoolsConfig&) const = default;
};

struct JudgeConfig {
    std::string mode = "stub";  // stub | http
    std::string endpoint;
    std::string template_id = "caption_consistency_v1";
    std::string rubric_id = "consistency_0_100";
    std::string token_env = "XSPA_JUDGE_TOKEN";
    int timeout_seconds = 30;
    int max_retries = 2;

    bool operator==(const JudgeConfig&) const = default;
};

struct EvalConfig {
    std::vector<std::string> tasks{"zero_shot"};
    JudgeConfig judge;

    bool operator==(const EvalConfig&) const = default;
};

struct SweepSection {
    std::string axis = "iterations";
    std::vector<double> grid{50, 100, 150, 200};
    std::vector<std::string> variants{"Full", "w/o Perturb. Magnitude", "w/o Line Smooth"};

    bool operator==(const SweepSection&) const = default;
};

struct MaskSection {
    ImageShape shape{224, 224, 3};
    XMaskSpec spec;

    bool operator==(const MaskSection&) const = default;
};

/// Fully-defaulted run configuration: one struct per config-file section.
struct RunConfig {
    MaskSection mask;
    AttackConfig attack;
    bool quantization_check = false;
    EncoderConfig encoder;
    PoolsConfig pools;
    EvalConfig eval;
    SweepSection sweep;
    int workers = 1;

    bool operator==(const RunConfig&) const = default;
};

/// The documented defaults, including the calibrated mask geometry.
RunConfig default_config();

/// Loads and validates a config file. Missing fields take documented
/// defaults; unknown keys are rejected naming the key; validation errors
/// name the field path.
RunConfig load_config(const std::filesystem::path& path);

/// Parses config text (same semantics as load_config).
RunConfig parse_config(const std::string& json_text);

/// Serializes the effective configuration. Every field currently sitting at
/// a documented default that is a free implementation choice is tagged under
/// provenance.non_paper_defaults.
std::string serialize_config(const RunConfig& config);

/// FNV-1a 64 hex digest of the canonical serialized config.
std::string config_hash(const RunConfig& config);

/// Key paths whose documented defaults are implementation choices rather
/// than method-fixed values (everything except attack.iterations).
const std::vector<std::string>& non_paper_default_keys();

}  // namespace xspa
