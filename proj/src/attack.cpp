#include "xspa/attack.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>

namespace xspa {

void validate_attack_config(const AttackConfig& cfg) {
    if (cfg.total_iterations < 1) throw InvalidInput("AttackConfig: total_iterations must be >= 1");
    if (!(cfg.step_size > 0.0)) throw InvalidInput("AttackConfig: step_size must be > 0");
    if (!(cfg.momentum_decay >= 0.0 && cfg.momentum_decay < 1.0))
        throw InvalidInput("AttackConfig: momentum_decay must be in [0,1)");
    if (!(cfg.epsilon > 0.0 && cfg.epsilon <= 1.0))
        throw InvalidInput("AttackConfig: epsilon must be in (0,1]");
    if (!(cfg.diversity.apply_probability >= 0.0 && cfg.diversity.apply_probability <= 1.0))
        throw InvalidInput("AttackConfig: diversity.apply_probability must be in [0,1]");
    if (!(cfg.diversity.min_resize_ratio > 0.0 && cfg.diversity.min_resize_ratio <= 1.0))
        throw InvalidInput("AttackConfig: diversity.min_resize_ratio must be in (0,1]");
    if (!(cfg.diversity.pad_fill_value >= 0.0 && cfg.diversity.pad_fill_value <= 1.0))
        throw InvalidInput("AttackConfig: diversity.pad_fill_value must be in [0,1]");
    validate_weight_schedule(cfg.schedule);
}

Grid apply_perturbation(const Grid& x, const Grid& delta, const XMask& mask) {
    require_same_shape(x, delta, "apply_perturbation");
    if (x.height() != mask.shape.height || x.width() != mask.shape.width)
        throw InvalidInput("apply_perturbation: mask shape mismatch");
    Grid out = x;
    for (const auto& p : mask.support)
        for (int c = 0; c < x.channels(); ++c)
            out.at(c, p.row, p.col) =
                std::clamp(x.at(c, p.row, p.col) + delta.at(c, p.row, p.col), 0.0, 1.0);
    return out;
}

namespace {

struct BilinearTap {
    int lo;
    double frac;  // weight of lo+1; (1-frac) goes to lo
};

BilinearTap source_tap(int out_index, int out_size, int in_size) {
    const double src = (out_index + 0.5) * static_cast<double>(in_size) / out_size - 0.5;
    const double clamped = std::clamp(src, 0.0, static_cast<double>(in_size - 1));
    int lo = static_cast<int>(std::floor(clamped));
    if (lo > in_size - 2) lo = in_size - 2;
    if (in_size == 1) return {0, 0.0};
    return {lo, clamped - lo};
}

}  // namespace

Grid input_diversity(const Grid& x_adv, const DiversityConfig& cfg, Rng& rng,
                     DiversityRecord* record) {
    const double u = rng.uniform();
    DiversityRecord rec;
    rec.applied = u < cfg.apply_probability;
    if (!rec.applied) {
        if (record) *record = rec;
        return x_adv;
    }
    rec.ratio = rng.uniform(cfg.min_resize_ratio, 1.0);
    rec.out_h = std::max(1, static_cast<int>(std::lround(rec.ratio * x_adv.height())));
    rec.out_w = std::max(1, static_cast<int>(std::lround(rec.ratio * x_adv.width())));
    rec.top = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(x_adv.height() - rec.out_h + 1)));
    rec.left = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(x_adv.width() - rec.out_w + 1)));
    if (record) *record = rec;

    Grid out(x_adv.channels(), x_adv.height(), x_adv.width(), cfg.pad_fill_value);
    for (int i = 0; i < rec.out_h; ++i) {
        const BilinearTap ty = source_tap(i, rec.out_h, x_adv.height());
        for (int j = 0; j < rec.out_w; ++j) {
            const BilinearTap tx = source_tap(j, rec.out_w, x_adv.width());
            for (int c = 0; c < x_adv.channels(); ++c) {
                const double v00 = x_adv.at(c, ty.lo, tx.lo);
                const double v01 = x_adv.at(c, ty.lo, tx.lo + (x_adv.width() > 1 ? 1 : 0));
                const double v10 = x_adv.at(c, ty.lo + (x_adv.height() > 1 ? 1 : 0), tx.lo);
                const double v11 = x_adv.at(c, ty.lo + (x_adv.height() > 1 ? 1 : 0),
                                            tx.lo + (x_adv.width() > 1 ? 1 : 0));
                const double top_row = v00 * (1.0 - tx.frac) + v01 * tx.frac;
                const double bot_row = v10 * (1.0 - tx.frac) + v11 * tx.frac;
                out.at(c, rec.top + i, rec.left + j) =
                    top_row * (1.0 - ty.frac) + bot_row * ty.frac;
            }
        }
    }
    return out;
}

Grid input_diversity_vjp(const DiversityRecord& record, const ImageShape& input_shape,
                         const Grid& upstream) {
    if (!record.applied) return upstream;
    Grid grad(input_shape.channels, input_shape.height, input_shape.width, 0.0);
    for (int i = 0; i < record.out_h; ++i) {
        const BilinearTap ty = source_tap(i, record.out_h, input_shape.height);
        for (int j = 0; j < record.out_w; ++j) {
            const BilinearTap tx = source_tap(j, record.out_w, input_shape.width);
            const int y1 = ty.lo + (input_shape.height > 1 ? 1 : 0);
            const int x1 = tx.lo + (input_shape.width > 1 ? 1 : 0);
            for (int c = 0; c < input_shape.channels; ++c) {
                const double g = upstream.at(c, record.top + i, record.left + j);
                grad.at(c, ty.lo, tx.lo) += g * (1.0 - ty.frac) * (1.0 - tx.frac);
                grad.at(c, ty.lo, x1) += g * (1.0 - ty.frac) * tx.frac;
                grad.at(c, y1, tx.lo) += g * ty.frac * (1.0 - tx.frac);
                grad.at(c, y1, x1) += g * ty.frac * tx.frac;
            }
        }
    }
    return grad;
}

Grid momentum_update(const Grid& m, const Grid& g, double mu) {
    require_same_shape(m, g, "momentum_update");
    if (!all_finite(g)) throw NumericError("momentum_update: non-finite gradient");
    const double denom = mean_abs(g) + 1e-12;
    Grid out = m;
    for (std::size_t i = 0; i < out.size(); ++i)
        out.raw()[i] = mu * m.raw()[i] + g.raw()[i] / denom;
    return out;
}

Grid sign_step(const Grid& delta, const Grid& m, double alpha) {
    require_same_shape(delta, m, "sign_step");
    Grid out = delta;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v = m.raw()[i];
        const double s = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
        out.raw()[i] = delta.raw()[i] - alpha * s;
    }
    return out;
}

Grid project(const Grid& delta_tilde, const XMask& mask, double epsilon) {
    if (epsilon <= 0.0) throw InvalidInput("project: epsilon must be > 0");
    if (delta_tilde.height() != mask.shape.height || delta_tilde.width() != mask.shape.width)
        throw InvalidInput("project: shape mismatch");
    Grid out = Grid::zeros_like(delta_tilde);
    for (const auto& p : mask.support)
        for (int c = 0; c < delta_tilde.channels(); ++c)
            out.at(c, p.row, p.col) =
                std::clamp(delta_tilde.at(c, p.row, p.col), -epsilon, epsilon);
    return out;
}

namespace {

struct SemanticGrads {
    LossTermValues terms;
    std::vector<double> dloss_dfeature;  // weighted
};

// Loss terms that depend on the image feature, plus their weighted
// gradient with respect to it. mag/line are handled on delta directly.
SemanticGrads semantic_terms(const std::vector<double>& v, const SimilarityContext& ctx_template,
                             const TextPools& pools, const ClassTask& task, bool targeted,
                             const WeightVector& weights, bool want_grad) {
    SimilarityContext ctx = ctx_template;
    ctx.image_feature = v;
    const std::vector<double> logits = similarity_logits(ctx);

    SemanticGrads out;
    std::vector<double> dlogits;
    if (targeted) {
        out.terms.clip = targeted_loss(logits, *task.target_class);
        if (want_grad) dlogits = targeted_loss_grad(logits, *task.target_class);
    } else {
        out.terms.clip = margin_loss(logits, task.true_class);
        if (want_grad) dlogits = margin_loss_grad(logits, task.true_class);
    }
    out.terms.tar = target_attraction_loss(v, pools);
    out.terms.src = source_suppression_loss(v, pools);

    if (want_grad) {
        out.dloss_dfeature = logits_grad_to_feature(ctx, dlogits);
        for (double& g : out.dloss_dfeature) g *= weights[0];
        const std::vector<double> g_tar = target_attraction_grad(v, pools);
        const std::vector<double> g_src = source_suppression_grad(v, pools);
        for (std::size_t i = 0; i < out.dloss_dfeature.size(); ++i)
            out.dloss_dfeature[i] += weights[1] * g_tar[i] + weights[2] * g_src[i];
    }
    return out;
}

int argmax_class(const EncoderHandle& encoder, const Grid& image,
                 const SimilarityContext& ctx_template) {
    SimilarityContext ctx = ctx_template;
    ctx.image_feature = encoder.encode_image(image);
    const std::vector<double> logits = similarity_logits(ctx);
    return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

}  // namespace

AttackResult run_attack(const Grid& x, const XMask& mask, const EncoderHandle& encoder,
                        const TextPools& pools, const ClassTask& task, const AttackConfig& cfg,
                        const AttackObserver& observer) {
    const auto start = std::chrono::steady_clock::now();

    validate_attack_config(cfg);
    validate_text_pools(pools);
    if (x.height() != mask.shape.height || x.width() != mask.shape.width)
        throw InvalidInput("run_attack: image/mask shape mismatch");
    for (double v : x.raw())
        if (v < 0.0 || v > 1.0) throw InvalidInput("run_attack: image values must be in [0,1]");
    const int k_count = static_cast<int>(task.class_names.size());
    if (k_count < 2) throw InvalidInput("run_attack: need at least 2 classes");
    if (task.true_class < 0 || task.true_class >= k_count)
        throw InvalidInput("run_attack: true_class out of range");
    if (cfg.targeted) {
        if (!task.target_class) throw InvalidInput("run_attack: targeted attack needs target_class");
        if (*task.target_class < 0 || *task.target_class >= k_count)
            throw InvalidInput("run_attack: target_class out of range");
    }

    SimilarityContext ctx_template;
    ctx_template.class_text_features = class_prompt_features(task.class_names, encoder);
    ctx_template.temperature = encoder.temperature();
    ctx_template.image_feature.assign(static_cast<std::size_t>(encoder.feature_dim()), 0.0);
    ctx_template.image_feature[0] = 1.0;  // placeholder; replaced per evaluation

    Rng rng(cfg.rng_seed);
    AttackState state;
    state.delta = Grid::zeros_like(x);
    state.momentum = Grid::zeros_like(x);
    state.best_sample = x;
    state.best_score = std::numeric_limits<double>::infinity();
    Grid best_delta = state.delta;
    int best_iteration = -1;

    const int n_iters = cfg.total_iterations;
    state.loss_history.reserve(static_cast<std::size_t>(n_iters));

    for (int t = 0; t < n_iters; ++t) {
        state.iteration = t;
        try {
            const Grid x_adv = apply_perturbation(x, state.delta, mask);
            const WeightVector weights = stage_weights(cfg.schedule, t, n_iters);

            // best-sample selection on the untransformed iterate
            const std::vector<double> v_sel = encoder.encode_image(x_adv);
            SemanticGrads sel =
                semantic_terms(v_sel, ctx_template, pools, task, cfg.targeted, weights, false);
            sel.terms.mag = magnitude_loss(state.delta, mask);
            sel.terms.line = line_smoothness_loss(state.delta, mask.paths);
            const LossBreakdown breakdown = total_loss(sel.terms, cfg.schedule, t, n_iters);
            state.loss_history.push_back(breakdown);
            if (breakdown.weighted_total < state.best_score) {
                state.best_score = breakdown.weighted_total;
                best_iteration = t;
                best_delta = state.delta;
                state.best_sample = x_adv;
            }
            if (observer) observer(IterationView{t, state.delta, x_adv, breakdown});

            // gradient pass on the diversity-transformed sample
            DiversityRecord div_record;
            const Grid x_tilde = input_diversity(x_adv, cfg.diversity, rng, &div_record);
            const std::vector<double> v = encoder.encode_image(x_tilde);
            const SemanticGrads sem =
                semantic_terms(v, ctx_template, pools, task, cfg.targeted, weights, true);
            const Grid d_tilde = encoder.encode_image_vjp(x_tilde, sem.dloss_dfeature);
            const Grid d_adv = input_diversity_vjp(div_record, x.shape(), d_tilde);

            Grid grad = Grid::zeros_like(x);
            for (const auto& p : mask.support)
                for (int c = 0; c < x.channels(); ++c) {
                    const double pre = x.at(c, p.row, p.col) + state.delta.at(c, p.row, p.col);
                    if (pre >= 0.0 && pre <= 1.0)
                        grad.at(c, p.row, p.col) = d_adv.at(c, p.row, p.col);
                }
            if (weights[3] != 0.0) {
                const Grid g_mag = magnitude_loss_grad(state.delta, mask);
                for (std::size_t i = 0; i < grad.size(); ++i)
                    grad.raw()[i] += weights[3] * g_mag.raw()[i];
            }
            if (weights[4] != 0.0) {
                const Grid g_line = line_smoothness_grad(state.delta, mask.paths);
                for (std::size_t i = 0; i < grad.size(); ++i)
                    grad.raw()[i] += weights[4] * g_line.raw()[i];
            }

            state.momentum = momentum_update(state.momentum, grad, cfg.momentum_decay);
            state.delta =
                project(sign_step(state.delta, state.momentum, cfg.step_size), mask, cfg.epsilon);
            assert(zero_off_support(mask, state.delta) &&
                   max_abs(state.delta) <= cfg.epsilon + 1e-15);
        } catch (const NumericError& e) {
            throw NumericError("run_attack: iteration " + std::to_string(t) + ": " + e.what() +
                               " (max|delta|=" + std::to_string(max_abs(state.delta)) +
                               ", max|m|=" + std::to_string(max_abs(state.momentum)) + ")");
        } catch (const InvalidInput&) {
            throw;
        } catch (const std::exception& e) {
            throw std::runtime_error("run_attack: encoder failure at iteration " +
                                     std::to_string(t) + ": " + e.what());
        }
    }

    AttackResult result;
    result.loss_history = std::move(state.loss_history);
    result.adversarial_image = apply_perturbation(x, best_delta, mask);
    result.final_delta = std::move(best_delta);
    result.best_iteration = best_iteration;

    const int predicted = argmax_class(encoder, result.adversarial_image, ctx_template);
    result.success_on_surrogate = cfg.targeted ? (predicted == *task.target_class)
                                               : (predicted != task.true_class);
    result.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace xspa
