#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "xspa/attack.hpp"
#include "xspa/encoder.hpp"
#include "xspa/grid.hpp"

namespace xspa {

/// One image/task measurement pair.
struct EvalRecord {
    std::string image_id;
    std::string task;  // zero_shot | caption | vqa
    double clean_metric = 0.0;
    double adversarial_metric = 0.0;
    double delta = 0.0;  // adversarial - clean
    std::string model_tag;
};

/// Fraction of images whose argmax similarity class equals the label.
double zero_shot_accuracy(const EncoderHandle& encoder, const std::vector<Grid>& images,
                          const std::vector<int>& labels,
                          const std::vector<std::string>& class_names);

/// Among clean-correct images, the fraction flipped by the perturbation.
/// Throws InvalidInput when no image is clean-correct.
double attack_success_rate(const EncoderHandle& encoder, const std::vector<Grid>& clean_images,
                           const std::vector<Grid>& adv_images, const std::vector<int>& labels,
                           const std::vector<std::string>& class_names);

struct JudgeRequest {
    std::string template_id;
    std::string content;  // generated text or image reference, template-dependent
    std::string rubric_id;
};

struct JudgeResponse {
    double score = 0.0;
    std::string rationale;
};

struct JudgeRubric {
    std::string id;
    double range_lo = 0.0;
    double range_hi = 100.0;
    std::string description;
};

/// Built-in rubric/template asset table (versioned JSON text).
const std::string& judge_assets_json();
JudgeRubric lookup_rubric(const std::string& rubric_id);

/// Scoring client contract. Implementations persist every request/response
/// pair to the audit sink before returning.
class JudgeClient {
public:
    virtual ~JudgeClient() = default;
    virtual JudgeResponse score(const JudgeRequest& request) = 0;
    virtual std::size_t audit_count() const = 0;
};

struct StubJudgeOptions {
    /// Multiplier applied to the token-overlap fraction before mapping onto
    /// the rubric range; values > 1 force out-of-range scores (for tests).
    double overlap_scale = 1.0;
    std::filesystem::path audit_path;  // empty: in-memory audit only
};

/// Deterministic local judge: score = Jaccard token overlap between the
/// "reference" and "candidate" fields of the request content, scaled onto
/// the rubric range. Reads the same request schema as the HTTP client.
std::unique_ptr<JudgeClient> make_stub_judge(const StubJudgeOptions& options = {});

struct HttpJudgeOptions {
    std::string endpoint;        // e.g. https://judge.internal/v1/score
    std::string token_env = "XSPA_JUDGE_TOKEN";
    int timeout_seconds = 30;
    int max_retries = 2;
    std::filesystem::path audit_path;
};

/// POSTs {template_id, content, rubric_id} and expects {score, rationale}.
/// Authentication token comes from the environment variable only.
std::unique_ptr<JudgeClient> make_http_judge(const HttpJudgeOptions& options);

struct SaliencyResult {
    Grid heatmap;     // 1 x H x W in [0,1]
    bool flat = false;  // constant-gradient degenerate case
};

/// Min-max normalized channel-aggregated |d<f_v(image), text_feature>/d(pixel)|.
SaliencyResult saliency_map(const EncoderHandle& encoder, const Grid& image,
                            const std::vector<double>& text_feature);

/// Mean absolute difference between two heatmaps (symmetric, 0 on identical).
double saliency_shift_score(const SaliencyResult& a, const SaliencyResult& b);

enum class SweepAxis { iterations, budget, smoothness_ablation };

SweepAxis parse_sweep_axis(const std::string& name);
std::string sweep_axis_name(SweepAxis axis);

/// Named smoothness-ablation variants, in reporting order.
extern const std::vector<std::string> kSmoothnessVariants;  // Full, w/o ...

struct SweepConfig {
    SweepAxis axis = SweepAxis::iterations;
    std::vector<double> grid;            // iterations or budget values
    std::vector<std::string> variants;   // smoothness_ablation settings
    AttackConfig base;
};

/// Everything one sweep point needs: aligned images/labels, per-image text
/// pools, the mask, the surrogate, and the class list.
struct SweepFixtures {
    std::vector<Grid> images;
    std::vector<int> labels;
    std::vector<std::string> image_ids;
    std::vector<TextPools> pools;  // one per image
    XMask mask;
    EncoderPtr encoder;
    std::vector<std::string> class_names;
    std::uint64_t master_seed = 0;
};

struct SweepRow {
    std::string setting;
    double asr = 0.0;
    double mean_perturb_mag = 0.0;   // mean over images of mean |delta| on support
    double mean_smoothness = 0.0;    // mean over images of magnitude_loss
    double mean_line_smoothness = 0.0;
    std::optional<std::string> error;  // set when the point failed
};

/// Runs run_attack per grid point and aggregates the four per-point
/// statistics. Point failures are recorded and the sweep continues.
std::vector<SweepRow> ablation_sweep(const SweepConfig& sweep, const SweepFixtures& fixtures);

/// Human-readable definitions of the sweep statistics, emitted next to
/// every sweep table.
std::string sweep_stat_definitions_json();

}  // namespace xspa
