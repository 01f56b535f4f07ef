#include "xspa/objective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace xspa {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

void require_unit(const std::vector<double>& v, const char* what) {
    if (v.empty()) throw InvalidInput(std::string(what) + ": empty feature vector");
    if (std::abs(norm2(v) - 1.0) > 1e-5)
        throw InvalidInput(std::string(what) + ": feature not unit norm");
}

}  // namespace

void validate_similarity_context(const SimilarityContext& ctx) {
    if (ctx.temperature <= 0.0) throw InvalidInput("SimilarityContext: temperature must be > 0");
    require_unit(ctx.image_feature, "SimilarityContext.image_feature");
    if (ctx.class_text_features.empty())
        throw InvalidInput("SimilarityContext: no class text features");
    for (const auto& e : ctx.class_text_features) {
        require_unit(e, "SimilarityContext.class_text_features");
        if (e.size() != ctx.image_feature.size())
            throw InvalidInput("SimilarityContext: feature dimension mismatch");
    }
}

void validate_text_pools(const TextPools& pools) {
    if (pools.target_features.empty()) throw InvalidInput("TextPools: empty target pool");
    if (pools.source_features.empty()) throw InvalidInput("TextPools: empty source pool");
    for (const auto& f : pools.target_features) require_unit(f, "TextPools.target");
    for (const auto& f : pools.source_features) require_unit(f, "TextPools.source");
}

void validate_weight_schedule(const WeightSchedule& schedule) {
    for (double w : schedule.early)
        if (w < 0.0) throw InvalidInput("WeightSchedule: early weights must be nonnegative");
    for (double w : schedule.late)
        if (w < 0.0) throw InvalidInput("WeightSchedule: late weights must be nonnegative");
    if (!(schedule.switch_ratio > 0.0 && schedule.switch_ratio < 1.0))
        throw InvalidInput("WeightSchedule: switch_ratio must be in (0,1)");
}

std::vector<double> similarity_logits(const SimilarityContext& ctx) {
    validate_similarity_context(ctx);
    std::vector<double> z(ctx.class_text_features.size());
    for (std::size_t k = 0; k < z.size(); ++k)
        z[k] = dot(ctx.image_feature, ctx.class_text_features[k]) / ctx.temperature;
    return z;
}

double margin_loss(const std::vector<double>& logits, int label) {
    const int k_count = static_cast<int>(logits.size());
    if (k_count < 2) throw InvalidInput("margin_loss: needs at least 2 classes");
    if (label < 0 || label >= k_count) throw InvalidInput("margin_loss: label out of range");
    double best_other = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < k_count; ++k)
        if (k != label) best_other = std::max(best_other, logits[k]);
    return logits[label] - best_other;
}

std::vector<double> margin_loss_grad(const std::vector<double>& logits, int label) {
    const int k_count = static_cast<int>(logits.size());
    if (k_count < 2) throw InvalidInput("margin_loss_grad: needs at least 2 classes");
    if (label < 0 || label >= k_count) throw InvalidInput("margin_loss_grad: label out of range");
    int best_other = -1;
    for (int k = 0; k < k_count; ++k)
        if (k != label && (best_other < 0 || logits[k] > logits[best_other])) best_other = k;
    std::vector<double> g(logits.size(), 0.0);
    g[label] = 1.0;
    g[best_other] = -1.0;
    return g;
}

namespace {

std::vector<double> softmax(const std::vector<double>& logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double z = 0.0;
    for (std::size_t k = 0; k < logits.size(); ++k) {
        p[k] = std::exp(logits[k] - m);
        z += p[k];
    }
    for (double& v : p) v /= z;
    return p;
}

}  // namespace

double targeted_loss(const std::vector<double>& logits, int target_label) {
    if (logits.empty()) throw InvalidInput("targeted_loss: empty logits");
    if (target_label < 0 || target_label >= static_cast<int>(logits.size()))
        throw InvalidInput("targeted_loss: target label out of range");
    const double m = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double v : logits) z += std::exp(v - m);
    return std::log(z) + m - logits[target_label];
}

std::vector<double> targeted_loss_grad(const std::vector<double>& logits, int target_label) {
    if (target_label < 0 || target_label >= static_cast<int>(logits.size()))
        throw InvalidInput("targeted_loss_grad: target label out of range");
    std::vector<double> g = softmax(logits);
    g[target_label] -= 1.0;
    return g;
}

std::vector<double> logits_grad_to_feature(const SimilarityContext& ctx,
                                           const std::vector<double>& dloss_dlogits) {
    if (dloss_dlogits.size() != ctx.class_text_features.size())
        throw InvalidInput("logits_grad_to_feature: gradient length mismatch");
    std::vector<double> g(ctx.image_feature.size(), 0.0);
    for (std::size_t k = 0; k < dloss_dlogits.size(); ++k) {
        const double scale = dloss_dlogits[k] / ctx.temperature;
        const auto& e = ctx.class_text_features[k];
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += scale * e[i];
    }
    return g;
}

double target_attraction_loss(const std::vector<double>& v, const TextPools& pools) {
    validate_text_pools(pools);
    double s = 0.0;
    for (const auto& f : pools.target_features) s += -dot(v, f);
    return s / static_cast<double>(pools.target_features.size());
}

std::vector<double> target_attraction_grad(const std::vector<double>& v, const TextPools& pools) {
    validate_text_pools(pools);
    std::vector<double> g(v.size(), 0.0);
    const double inv = 1.0 / static_cast<double>(pools.target_features.size());
    for (const auto& f : pools.target_features)
        for (std::size_t i = 0; i < g.size(); ++i) g[i] -= inv * f[i];
    return g;
}

double source_suppression_loss(const std::vector<double>& v, const TextPools& pools) {
    validate_text_pools(pools);
    double s = 0.0;
    for (const auto& f : pools.source_features) s += dot(v, f);
    return s / static_cast<double>(pools.source_features.size());
}

std::vector<double> source_suppression_grad(const std::vector<double>& v, const TextPools& pools) {
    validate_text_pools(pools);
    std::vector<double> g(v.size(), 0.0);
    const double inv = 1.0 / static_cast<double>(pools.source_features.size());
    for (const auto& f : pools.source_features)
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += inv * f[i];
    return g;
}

double magnitude_loss(const Grid& delta, const XMask& mask) {
    if (delta.height() != mask.shape.height || delta.width() != mask.shape.width)
        throw InvalidInput("magnitude_loss: shape mismatch");
    double s = 0.0;
    for (const auto& p : mask.support)
        for (int c = 0; c < delta.channels(); ++c) {
            const double d = delta.at(c, p.row, p.col);
            s += d * d;
        }
    return s / static_cast<double>(mask.support.size());
}

Grid magnitude_loss_grad(const Grid& delta, const XMask& mask) {
    if (delta.height() != mask.shape.height || delta.width() != mask.shape.width)
        throw InvalidInput("magnitude_loss_grad: shape mismatch");
    Grid g = Grid::zeros_like(delta);
    const double scale = 2.0 / static_cast<double>(mask.support.size());
    for (const auto& p : mask.support)
        for (int c = 0; c < delta.channels(); ++c)
            g.at(c, p.row, p.col) = scale * delta.at(c, p.row, p.col);
    return g;
}

double line_smoothness_loss(const Grid& delta, const std::vector<PixelPath>& paths) {
    if (paths.empty()) throw InvalidInput("line_smoothness_loss: no paths");
    double total = 0.0;
    for (const auto& path : paths) {
        if (path.size() < 2) throw InvalidInput("line_smoothness_loss: path shorter than 2 pixels");
        double s = 0.0;
        for (std::size_t n = 1; n < path.size(); ++n)
            for (int c = 0; c < delta.channels(); ++c) {
                const double d = delta.at(c, path[n].row, path[n].col) -
                                 delta.at(c, path[n - 1].row, path[n - 1].col);
                s += d * d;
            }
        total += s / static_cast<double>(path.size() - 1);
    }
    return total / static_cast<double>(paths.size());
}

Grid line_smoothness_grad(const Grid& delta, const std::vector<PixelPath>& paths) {
    if (paths.empty()) throw InvalidInput("line_smoothness_grad: no paths");
    Grid g = Grid::zeros_like(delta);
    const double path_inv = 1.0 / static_cast<double>(paths.size());
    for (const auto& path : paths) {
        if (path.size() < 2) throw InvalidInput("line_smoothness_grad: path shorter than 2 pixels");
        const double scale = 2.0 * path_inv / static_cast<double>(path.size() - 1);
        for (std::size_t n = 1; n < path.size(); ++n)
            for (int c = 0; c < delta.channels(); ++c) {
                const double d = delta.at(c, path[n].row, path[n].col) -
                                 delta.at(c, path[n - 1].row, path[n - 1].col);
                g.at(c, path[n].row, path[n].col) += scale * d;
                g.at(c, path[n - 1].row, path[n - 1].col) -= scale * d;
            }
    }
    return g;
}

WeightVector stage_weights(const WeightSchedule& schedule, int t, int total_iterations) {
    validate_weight_schedule(schedule);
    if (t < 0 || t >= total_iterations)
        throw InvalidInput("stage_weights: iteration out of range");
    return static_cast<double>(t) < schedule.switch_ratio * total_iterations ? schedule.early
                                                                             : schedule.late;
}

LossBreakdown total_loss(const LossTermValues& terms, const WeightSchedule& schedule, int t,
                         int total_iterations) {
    const struct {
        const char* name;
        double value;
    } named[] = {{"clip", terms.clip}, {"tar", terms.tar}, {"src", terms.src},
                 {"mag", terms.mag},   {"line", terms.line}};
    for (const auto& term : named)
        if (!std::isfinite(term.value))
            throw NumericError(std::string("total_loss: non-finite term '") + term.name + "'");

    LossBreakdown out;
    out.clip = terms.clip;
    out.tar = terms.tar;
    out.src = terms.src;
    out.mag = terms.mag;
    out.line = terms.line;
    out.iteration = t;
    out.weights_used = stage_weights(schedule, t, total_iterations);
    out.weighted_total = out.weights_used[0] * terms.clip + out.weights_used[1] * terms.tar +
                         out.weights_used[2] * terms.src + out.weights_used[3] * terms.mag +
                         out.weights_used[4] * terms.line;
    return out;
}

}  // namespace xspa
