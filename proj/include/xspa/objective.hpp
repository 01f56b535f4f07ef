#pragma once

#include <array>
#include <string>
#include <vector>

#include "xspa/grid.hpp"
#include "xspa/mask.hpp"

namespace xspa {

/// Indices into a weight vector, one per loss term.
enum class LossTerm { clip = 0, tar = 1, src = 2, mag = 3, line = 4 };
inline constexpr int kNumLossTerms = 5;

using WeightVector = std::array<double, kNumLossTerms>;

/// Image feature plus the class text features it is scored against.
/// All vectors are unit norm; the encoder boundary normalizes.
struct SimilarityContext {
    std::vector<double> image_feature;
    std::vector<std::vector<double>> class_text_features;
    double temperature = 0.07;
};

/// Encoded prompt pools for target attraction and source suppression.
struct TextPools {
    std::vector<std::vector<double>> target_features;
    std::vector<std::vector<double>> source_features;
    std::vector<std::string> target_prompts;
    std::vector<std::string> source_prompts;
};

/// Two-stage weights: `early` before the switch iteration, `late` after.
struct WeightSchedule {
    WeightVector early{1.0, 0.0, 0.0, 0.0, 0.0};
    WeightVector late{1.0, 0.0, 0.0, 0.0, 0.0};
    double switch_ratio = 0.5;  // in (0,1)

    bool operator==(const WeightSchedule&) const = default;
};

/// Per-iteration record of all unweighted terms and the weighted total.
struct LossBreakdown {
    double clip = 0.0;
    double tar = 0.0;
    double src = 0.0;
    double mag = 0.0;
    double line = 0.0;
    double weighted_total = 0.0;
    WeightVector weights_used{};
    int iteration = 0;
};

void validate_similarity_context(const SimilarityContext& ctx);
void validate_text_pools(const TextPools& pools);
void validate_weight_schedule(const WeightSchedule& schedule);

/// z_k = <v, e_k> / tau.
std::vector<double> similarity_logits(const SimilarityContext& ctx);

/// z_y - max_{k != y} z_k. Minimizing drives misclassification.
double margin_loss(const std::vector<double>& logits, int label);
/// d(margin)/d(logits).
std::vector<double> margin_loss_grad(const std::vector<double>& logits, int label);

/// Cross-entropy of softmax(logits) against target_label.
double targeted_loss(const std::vector<double>& logits, int target_label);
std::vector<double> targeted_loss_grad(const std::vector<double>& logits, int target_label);

/// Chain rule through z = <v,e>/tau: given dL/dz, returns dL/dv.
std::vector<double> logits_grad_to_feature(const SimilarityContext& ctx,
                                           const std::vector<double>& dloss_dlogits);

/// mean_u -<v, target_u>.
double target_attraction_loss(const std::vector<double>& v, const TextPools& pools);
std::vector<double> target_attraction_grad(const std::vector<double>& v, const TextPools& pools);

/// mean_w +<v, source_w>.
double source_suppression_loss(const std::vector<double>& v, const TextPools& pools);
std::vector<double> source_suppression_grad(const std::vector<double>& v, const TextPools& pools);

/// mean over support pixels of the squared channel-vector norm of delta.
double magnitude_loss(const Grid& delta, const XMask& mask);
Grid magnitude_loss_grad(const Grid& delta, const XMask& mask);

/// mean over paths of the mean squared channel-vector difference between
/// consecutive path pixels.
double line_smoothness_loss(const Grid& delta, const std::vector<PixelPath>& paths);
Grid line_smoothness_grad(const Grid& delta, const std::vector<PixelPath>& paths);

/// `early` while t < switch_ratio * total, `late` afterwards.
WeightVector stage_weights(const WeightSchedule& schedule, int t, int total_iterations);

struct LossTermValues {
    double clip = 0.0;
    double tar = 0.0;
    double src = 0.0;
    double mag = 0.0;
    double line = 0.0;
};

/// Applies the stage weights at iteration t and assembles the breakdown.
/// Throws NumericError naming the offending term on non-finite input.
LossBreakdown total_loss(const LossTermValues& terms, const WeightSchedule& schedule,
                         int t, int total_iterations);

}  // namespace xspa
