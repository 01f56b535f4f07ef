#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "xspa/encoder.hpp"
#include "xspa/grid.hpp"
#include "xspa/mask.hpp"
#include "xspa/objective.hpp"
#include "xspa/rng.hpp"

namespace xspa {

/// Random resize-and-pad settings applied before the gradient pass.
struct DiversityConfig {
    double apply_probability = 0.5;  // in [0,1]
    double min_resize_ratio = 0.875; // in (0,1]
    double pad_fill_value = 0.5;     // in [0,1]

    bool operator==(const DiversityConfig&) const = default;
};

/// All optimizer hyperparameters for one attack run.
struct AttackConfig {
    int total_iterations = 200;
    double step_size = 0.004;
    double momentum_decay = 0.9;  // in [0,1)
    double epsilon = 16.0 / 255.0;
    DiversityConfig diversity;
    WeightSchedule schedule;
    bool targeted = false;
    std::uint64_t rng_seed = 0;

    bool operator==(const AttackConfig&) const = default;
};

void validate_attack_config(const AttackConfig& cfg);

/// Zero-shot class metadata for the surrogate loss: class names, the
/// correct class index, and the explicit target index in targeted mode.
struct ClassTask {
    std::vector<std::string> class_names;
    int true_class = 0;
    std::optional<int> target_class;
};

/// Evolving attack state, exposed to observers for per-iteration checks.
struct AttackState {
    Grid delta;
    Grid momentum;
    int iteration = 0;
    Grid best_sample;
    double best_score = 0.0;
    std::vector<LossBreakdown> loss_history;
};

struct AttackResult {
    Grid adversarial_image;   // the best sample, clipped to [0,1]
    Grid final_delta;         // the delta that produced adversarial_image
    std::vector<LossBreakdown> loss_history;
    int best_iteration = -1;
    bool success_on_surrogate = false;
    double wall_time_seconds = 0.0;
};

/// clip(x + M (.) delta, 0, 1); off-support pixels are bit-identical to x.
Grid apply_perturbation(const Grid& x, const Grid& delta, const XMask& mask);

/// Geometry of one diversity draw, kept so the backward pass can replay it.
struct DiversityRecord {
    bool applied = false;
    double ratio = 1.0;
    int out_h = 0, out_w = 0;  // resized content size
    int top = 0, left = 0;     // placement offset
};

/// With probability apply_probability: bilinear downscale by a uniform
/// ratio in [min_resize_ratio, 1], paste at a uniform offset, pad with
/// pad_fill_value. Identity otherwise. Differentiable in the pixel values.
Grid input_diversity(const Grid& x_adv, const DiversityConfig& cfg, Rng& rng,
                     DiversityRecord* record = nullptr);

/// Transpose of the diversity transform recorded in `record`.
Grid input_diversity_vjp(const DiversityRecord& record, const ImageShape& input_shape,
                         const Grid& upstream);

/// mu * m + g / (mean(|g|) + 1e-12).
Grid momentum_update(const Grid& m, const Grid& g, double mu);

/// delta - alpha * sign(m), with sign(0) = 0.
Grid sign_step(const Grid& delta, const Grid& m, double alpha);

/// M (.) clip(delta_tilde, -eps, +eps).
Grid project(const Grid& delta_tilde, const XMask& mask, double epsilon);

/// Per-iteration view handed to the optional observer (after projection).
struct IterationView {
    int t = 0;
    const Grid& delta;
    const Grid& x_adv;
    const LossBreakdown& breakdown;
};
using AttackObserver = std::function<void(const IterationView&)>;

/// Runs mask-constrained momentum sign descent:
/// apply_perturbation -> input_diversity -> encode -> total_loss ->
/// gradient -> momentum_update -> sign_step -> project, with best-sample
/// tracking on the untransformed iterate. Deterministic given cfg.rng_seed
/// and a deterministic encoder.
AttackResult run_attack(const Grid& x, const XMask& mask, const EncoderHandle& encoder,
                        const TextPools& pools, const ClassTask& task,
                        const AttackConfig& cfg, const AttackObserver& observer = nullptr);

}  // namespace xspa
