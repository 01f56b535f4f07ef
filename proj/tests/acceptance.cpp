// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exit code = number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "oracles.hpp"
#include "xspa/attack.hpp"
#include "xspa/config.hpp"
#include "xspa/evaluation.hpp"
#include "xspa/io_png.hpp"
#include "xspa/runner.hpp"
#include "xspa/rng.hpp"
#include "xspa/synthetic.hpp"

using namespace xspa;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

// ---------------------------------------------------------------------------
// Desk-scale fixture shared by criteria 4-7: 8-class synthetic task on the
// toy encoder, with a 64x64 X-mask and frozen hyperparameters.
// ---------------------------------------------------------------------------

struct DeskFixture {
    EncoderPtr encoder;
    SyntheticTask task;
    XMask mask;
    AttackConfig attack;
    std::uint64_t master_seed = 1234;

    DeskFixture() {
        encoder = toy_encoder(7, 32, 4, 0.07);
        SyntheticTaskOptions topt;
        topt.num_classes = 8;
        topt.images_per_class = 8;
        topt.image_size = 64;
        topt.margin_target = 0.25;
        topt.noise_std = 0.02;
        topt.seed = 11;
        task = make_synthetic_task(*encoder, topt);

        XMaskSpec spec;
        spec.angle1 = kPi / 4.0;
        spec.angle2 = 3.0 * kPi / 4.0;
        spec.length_ratio = 0.9;
        spec.line_width = 5;
        mask = build_x_mask(spec, {64, 64, 3});

        attack.total_iterations = 200;
        attack.step_size = 0.001;
        attack.momentum_decay = 0.9;
        attack.epsilon = 0.08;
        attack.diversity = {0.5, 0.875, 0.5};
        attack.schedule.switch_ratio = 0.5;
        attack.schedule.early = {1.0, 0.3, 0.3, 0.05, 0.05};
        attack.schedule.late = {0.6, 1.0, 0.6, 0.05, 0.05};
        attack.targeted = false;
    }

    TextPools pools_for(int label) const {
        AttackSpecText spec;
        spec.true_label = task.class_names[static_cast<std::size_t>(label)];
        spec.target_label =
            task.class_names[static_cast<std::size_t>((label + 1) % task.class_names.size())];
        return build_text_pools(spec, *encoder);
    }

    SweepFixtures sweep_fixtures() const {
        SweepFixtures fx;
        fx.images = task.images;
        fx.labels = task.labels;
        fx.image_ids = task.image_ids;
        fx.mask = mask;
        fx.encoder = encoder;
        fx.class_names = task.class_names;
        fx.master_seed = master_seed;
        for (int label : task.labels) fx.pools.push_back(pools_for(label));
        return fx;
    }
};

DeskFixture& desk() {
    static DeskFixture fixture;
    return fixture;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("xspa_acceptance_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

RunConfig desk_run_config() {
    const DeskFixture& fx = desk();
    RunConfig cfg = default_config();
    cfg.mask.shape = {64, 64, 3};
    cfg.mask.spec = fx.mask.spec;
    cfg.attack = fx.attack;
    cfg.attack.rng_seed = fx.master_seed;
    cfg.encoder.seed = 7;
    cfg.encoder.feature_dim = 32;
    cfg.encoder.patch_size = 4;
    cfg.pools.class_names = fx.task.class_names;
    cfg.workers = 2;
    return cfg;
}

fs::path write_desk_pngs(const std::string& tag) {
    const DeskFixture& fx = desk();
    const fs::path dir = fresh_dir(tag);
    json labels;
    for (std::size_t i = 0; i < fx.task.images.size(); ++i) {
        const std::string name = fx.task.image_ids[i] + ".png";
        write_png(dir / name, fx.task.images[i]);
        labels[name] = fx.task.class_names[static_cast<std::size_t>(fx.task.labels[i])];
    }
    std::ofstream(dir / "labels.json") << labels.dump(2);
    return dir;
}

std::vector<double> random_unit(Rng& rng, int dim) {
    std::vector<double> v(static_cast<std::size_t>(dim));
    double n = 0.0;
    for (double& x : v) {
        x = rng.gauss();
        n += x * x;
    }
    n = std::sqrt(n);
    for (double& x : v) x /= n;
    return v;
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

Check criterion_1_mask_coverage() {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    const RunConfig cfg = default_config();
    const XMask mask = build_x_mask(cfg.mask.spec, cfg.mask.shape);
    const double coverage = mask_coverage(mask);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    check.require(coverage >= 0.015 && coverage <= 0.020,
                  "coverage " + std::to_string(coverage) + " outside [0.015, 0.020]");
    check.require(secs < 1.0, "took " + std::to_string(secs) + "s (limit 1s)");
    check.detail = "coverage " + std::to_string(coverage);
    return check;
}

Check criterion_2_geometry_oracle() {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    Rng rng(424242);
    int tested = 0;
    while (tested < 200) {
        const ImageShape shape{8 + static_cast<int>(rng.uniform_int(57)),
                               8 + static_cast<int>(rng.uniform_int(57)), 1};
        XMaskSpec spec;
        spec.rho_col = rng.uniform(0.1, 0.9);
        spec.rho_row = rng.uniform(0.1, 0.9);
        spec.angle1 = rng.uniform(0.0, kPi);
        spec.angle2 = spec.angle1 + rng.uniform(0.3, kPi - 0.3);
        spec.length_ratio = rng.uniform(0.2, 1.0);
        spec.line_width = 1 + static_cast<int>(rng.uniform_int(5));
        XMask mask;
        try {
            mask = build_x_mask(spec, shape);
        } catch (const InvalidInput&) {
            continue;
        }
        ++tested;
        const std::set<PixelCoord> support(mask.support.begin(), mask.support.end());
        if (support != oracles::brute_force_support(spec, shape)) {
            check.require(false, "oracle mismatch at case " + std::to_string(tested));
            break;
        }
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    check.require(secs < 30.0, "took " + std::to_string(secs) + "s (limit 30s)");
    if (check.ok) check.detail = std::to_string(tested) + " randomized cases exact";
    return check;
}

Check criterion_3_gradient_suite() {
    Check check;
    const double tol = 1e-4;
    Rng rng(31337);
    const int dim = 8;
    double worst = 0.0;
    auto track = [&](double err, const char* term) {
        worst = std::max(worst, err);
        check.require(err <= tol, std::string(term) + " rel err " + std::to_string(err));
    };

    for (int trial = 0; trial < 20; ++trial) {
        SimilarityContext ctx;
        ctx.image_feature = random_unit(rng, dim);
        for (int k = 0; k < 5; ++k) ctx.class_text_features.push_back(random_unit(rng, dim));
        ctx.temperature = 0.2;
        const int y = static_cast<int>(rng.uniform_int(5));
        auto logits_of = [&](const std::vector<double>& v) {
            std::vector<double> z(ctx.class_text_features.size());
            for (std::size_t k = 0; k < z.size(); ++k) {
                double dot = 0.0;
                for (std::size_t i = 0; i < v.size(); ++i)
                    dot += v[i] * ctx.class_text_features[k][i];
                z[k] = dot / ctx.temperature;
            }
            return z;
        };
        const auto logits = similarity_logits(ctx);

        track(oracles::fd_relative_error(
                  [&](const std::vector<double>& v) { return margin_loss(logits_of(v), y); },
                  ctx.image_feature, logits_grad_to_feature(ctx, margin_loss_grad(logits, y))),
              "L_clip(margin)");
        track(oracles::fd_relative_error(
                  [&](const std::vector<double>& v) { return targeted_loss(logits_of(v), y); },
                  ctx.image_feature, logits_grad_to_feature(ctx, targeted_loss_grad(logits, y))),
              "L_clip(CE)");

        TextPools pools;
        for (int i = 0; i < 3; ++i) pools.target_features.push_back(random_unit(rng, dim));
        for (int i = 0; i < 2; ++i) pools.source_features.push_back(random_unit(rng, dim));
        const std::vector<double> v0 = random_unit(rng, dim);
        track(oracles::fd_relative_error(
                  [&](const std::vector<double>& v) {
                      double s = 0.0;
                      for (const auto& f : pools.target_features)
                          for (int i = 0; i < dim; ++i) s -= v[static_cast<std::size_t>(i)] * f[static_cast<std::size_t>(i)];
                      return s / 3.0;
                  },
                  v0, target_attraction_grad(v0, pools)),
              "L_tar");
        track(oracles::fd_relative_error(
                  [&](const std::vector<double>& v) {
                      double s = 0.0;
                      for (const auto& f : pools.source_features)
                          for (int i = 0; i < dim; ++i) s += v[static_cast<std::size_t>(i)] * f[static_cast<std::size_t>(i)];
                      return s / 2.0;
                  },
                  v0, source_suppression_grad(v0, pools)),
              "L_src");
    }

    // grid losses and the toy encoder
    XMaskSpec mspec;
    mspec.angle1 = kPi / 4.0;
    mspec.angle2 = 3.0 * kPi / 4.0;
    mspec.length_ratio = 0.9;
    mspec.line_width = 3;
    const XMask mask = build_x_mask(mspec, {12, 12, 3});
    auto pack = [&](const Grid& g) {
        std::vector<double> flat;
        for (const auto& p : mask.support)
            for (int c = 0; c < 3; ++c) flat.push_back(g.at(c, p.row, p.col));
        return flat;
    };
    auto unpack = [&](const std::vector<double>& flat) {
        Grid g(3, 12, 12, 0.0);
        std::size_t i = 0;
        for (const auto& p : mask.support)
            for (int c = 0; c < 3; ++c) g.at(c, p.row, p.col) = flat[i++];
        return g;
    };
    for (int trial = 0; trial < 20; ++trial) {
        Grid delta(3, 12, 12, 0.0);
        for (const auto& p : mask.support)
            for (int c = 0; c < 3; ++c) delta.at(c, p.row, p.col) = 0.4 * (rng.uniform() - 0.5);
        track(oracles::fd_relative_error(
                  [&](const std::vector<double>& flat) { return magnitude_loss(unpack(flat), mask); },
                  pack(delta), pack(magnitude_loss_grad(delta, mask))),
              "L_mag");
        track(oracles::fd_relative_error(
                  [&](const std::vector<double>& flat) {
                      return line_smoothness_loss(unpack(flat), mask.paths);
                  },
                  pack(delta), pack(line_smoothness_grad(delta, mask.paths))),
              "L_line");
    }

    const EncoderPtr enc = toy_encoder(3, 8, 2, 0.07);
    for (int trial = 0; trial < 20; ++trial) {
        Grid img(3, 8, 8);
        for (double& v : img.raw()) v = 0.1 + 0.8 * rng.uniform();
        std::vector<double> upstream(8);
        for (double& u : upstream) u = rng.gauss();
        auto f = [&](const std::vector<double>& flat) {
            Grid g(3, 8, 8);
            g.raw() = flat;
            const auto feat = enc->encode_image(g);
            double s = 0.0;
            for (std::size_t i = 0; i < feat.size(); ++i) s += feat[i] * upstream[i];
            return s;
        };
        track(oracles::fd_relative_error(f, img.raw(), enc->encode_image_vjp(img, upstream).raw()),
              "toy encoder");
    }

    if (check.ok) {
        char buf[48];
        std::snprintf(buf, sizeof(buf), "worst rel err %.2e", worst);
        check.detail = buf;
    }
    return check;
}

Check criterion_4_feasibility() {
    Check check;
    const DeskFixture& fx = desk();
    AttackConfig cfg = fx.attack;
    cfg.rng_seed = derive_seed(fx.master_seed, fx.task.image_ids[0] + ".png");
    ClassTask task;
    task.class_names = fx.task.class_names;
    task.true_class = fx.task.labels[0];
    int violations = 0;
    int iterations_seen = 0;
    const AttackResult result = run_attack(
        fx.task.images[0], fx.mask, *fx.encoder, fx.pools_for(task.true_class), task, cfg,
        [&](const IterationView& view) {
            ++iterations_seen;
            if (!zero_off_support(fx.mask, view.delta)) ++violations;
            if (max_abs(view.delta) > cfg.epsilon) ++violations;
            for (double v : view.x_adv.raw())
                if (v < 0.0 || v > 1.0) {
                    ++violations;
                    break;
                }
        });
    check.require(iterations_seen == 200, "expected 200 iterates");
    check.require(violations == 0, std::to_string(violations) + " feasibility violations");
    check.require(zero_off_support(fx.mask, result.final_delta) &&
                      max_abs(result.final_delta) <= cfg.epsilon,
                  "final delta infeasible");
    check.require(result.loss_history.back().weighted_total <
                      result.loss_history.front().weighted_total,
                  "no descent between t=0 and t=199");
    if (check.ok) check.detail = "200 iterates, zero violations, loss descended";
    return check;
}

Check criterion_5_desk_efficacy() {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    const DeskFixture& fx = desk();

    const double clean_acc =
        zero_shot_accuracy(*fx.encoder, fx.task.images, fx.task.labels, fx.task.class_names);
    check.require(clean_acc >= 0.90,
                  "clean accuracy " + std::to_string(clean_acc) + " below 0.90");

    std::vector<Grid> adv_images;
    for (std::size_t i = 0; i < fx.task.images.size(); ++i) {
        AttackConfig cfg = fx.attack;
        cfg.rng_seed = derive_seed(fx.master_seed, fx.task.image_ids[i] + ".png");
        ClassTask task;
        task.class_names = fx.task.class_names;
        task.true_class = fx.task.labels[i];
        adv_images.push_back(run_attack(fx.task.images[i], fx.mask, *fx.encoder,
                                        fx.pools_for(task.true_class), task, cfg)
                                 .adversarial_image);
    }
    const double adv_acc =
        zero_shot_accuracy(*fx.encoder, adv_images, fx.task.labels, fx.task.class_names);
    const double asr = attack_success_rate(*fx.encoder, fx.task.images, adv_images,
                                           fx.task.labels, fx.task.class_names);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    check.require(clean_acc - adv_acc >= 0.30,
                  "accuracy drop " + std::to_string(clean_acc - adv_acc) + " below 0.30");
    check.require(asr >= 0.40, "ASR " + std::to_string(asr) + " below 0.40");
    check.require(secs < 300.0, "took " + std::to_string(secs) + "s (limit 300s)");
    char buf[160];
    std::snprintf(buf, sizeof(buf), "clean %.3f -> adv %.3f (drop %.3f), ASR %.3f, %.1fs",
                  clean_acc, adv_acc, clean_acc - adv_acc, asr, secs);
    check.detail = buf;
    return check;
}

Check criterion_6_ablation_trends() {
    Check check;
    const DeskFixture& fx = desk();
    const SweepFixtures fixtures = fx.sweep_fixtures();

    SweepConfig iter_sweep;
    iter_sweep.axis = SweepAxis::iterations;
    iter_sweep.grid = {50, 100, 150, 200};
    iter_sweep.base = fx.attack;
    const auto iter_rows = ablation_sweep(iter_sweep, fixtures);
    for (const auto& row : iter_rows)
        check.require(!row.error, "iteration point " + row.setting + " failed");
    for (std::size_t i = 1; i < iter_rows.size() && check.ok; ++i)
        check.require(iter_rows[i].asr >= iter_rows[i - 1].asr - 1e-12,
                      "ASR not non-decreasing over iterations at " + iter_rows[i].setting);
    if (check.ok) {
        const double early_gain = iter_rows[1].asr - iter_rows[0].asr;  // 100 - 50
        const double late_gain = iter_rows[3].asr - iter_rows[2].asr;   // 200 - 150
        check.require(late_gain <= early_gain + 1e-12,
                      "no saturation: gain(200-150)=" + std::to_string(late_gain) +
                          " > gain(100-50)=" + std::to_string(early_gain));
    }

    SweepConfig budget_sweep;
    budget_sweep.axis = SweepAxis::budget;
    budget_sweep.grid = {0.02, 0.04, 0.08, 0.12};
    budget_sweep.base = fx.attack;
    const auto budget_rows = ablation_sweep(budget_sweep, fixtures);
    for (const auto& row : budget_rows)
        check.require(!row.error, "budget point " + row.setting + " failed");
    for (std::size_t i = 1; i < budget_rows.size() && check.ok; ++i)
        check.require(budget_rows[i].asr >= budget_rows[i - 1].asr - 1e-12,
                      "ASR not non-decreasing over budget at " + budget_rows[i].setting);

    SweepConfig smooth_sweep;
    smooth_sweep.axis = SweepAxis::smoothness_ablation;
    smooth_sweep.variants = kSmoothnessVariants;
    smooth_sweep.base = fx.attack;
    const auto smooth_rows = ablation_sweep(smooth_sweep, fixtures);
    for (const auto& row : smooth_rows)
        check.require(!row.error, "smoothness point " + row.setting + " failed");
    if (check.ok) {
        check.require(smooth_rows[2].mean_line_smoothness >=
                          smooth_rows[0].mean_line_smoothness,
                      "'w/o Line Smooth' line-smoothness " +
                          std::to_string(smooth_rows[2].mean_line_smoothness) +
                          " below 'Full' " + std::to_string(smooth_rows[0].mean_line_smoothness));
    }

    if (check.ok) {
        char buf[200];
        std::snprintf(buf, sizeof(buf),
                      "iter ASR %.2f/%.2f/%.2f/%.2f; budget ASR %.2f..%.2f; line %.4f vs %.4f",
                      iter_rows[0].asr, iter_rows[1].asr, iter_rows[2].asr, iter_rows[3].asr,
                      budget_rows.front().asr, budget_rows.back().asr,
                      smooth_rows[0].mean_line_smoothness, smooth_rows[2].mean_line_smoothness);
        check.detail = buf;
    }
    return check;
}

Check criterion_7_reproducibility() {
    Check check;
    const fs::path in_dir = write_desk_pngs("repro_in");
    const fs::path out_a = fresh_dir("repro_a");
    const fs::path out_b = fresh_dir("repro_b");
    RunConfig cfg = desk_run_config();
    cfg.attack.total_iterations = 60;  // bit-equality is iteration-count independent

    const CommandOutcome a = cmd_attack(cfg, in_dir, out_a);
    const CommandOutcome b = cmd_attack(cfg, in_dir, out_b);
    check.require(a.exit_code == 0 && b.exit_code == 0, "attack runs failed");
    if (!check.ok) return check;

    int compared = 0;
    for (const auto& entry : fs::recursive_directory_iterator(a.run_dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (!(name.ends_with(".jsonl") || name.ends_with(".adv.png"))) continue;
        const fs::path rel = fs::relative(entry.path(), a.run_dir);
        if (slurp(entry.path()) != slurp(b.run_dir / rel)) {
            check.require(false, "byte mismatch in " + rel.string());
            break;
        }
        ++compared;
    }
    check.require(compared == 128, "expected 128 compared files, saw " + std::to_string(compared));
    if (check.ok) check.detail = "64 histories + 64 images bit-identical";
    return check;
}

Check criterion_8_contracts() {
    Check check;

    // config round trip
    const RunConfig def = default_config();
    check.require(parse_config(serialize_config(def)) == def, "config round-trip mismatch");
    const fs::path shipped = fs::path(XSPA_SOURCE_DIR) / "configs" / "default.json";
    try {
        check.require(load_config(shipped) == def, "shipped default.json differs from defaults");
    } catch (const std::exception& e) {
        check.require(false, std::string("shipped default.json failed to load: ") + e.what());
    }

    // validate_spec diagnostics
    XMaskSpec bad_r;
    bad_r.angle1 = kPi / 4.0;
    bad_r.angle2 = 3.0 * kPi / 4.0;
    bad_r.length_ratio = 0.0;
    const auto report_r = validate_spec(bad_r, {16, 16, 1});
    check.require(!report_r.ok && std::find(report_r.violations.begin(),
                                            report_r.violations.end(),
                                            "length_ratio out of range") !=
                                      report_r.violations.end(),
                  "validate_spec length_ratio diagnostic missing");
    XMaskSpec degen = bad_r;
    degen.length_ratio = 0.5;
    degen.angle2 = degen.angle1;
    const auto report_a = validate_spec(degen, {16, 16, 1});
    check.require(!report_a.ok && std::find(report_a.violations.begin(),
                                            report_a.violations.end(), "degenerate angles") !=
                                      report_a.violations.end(),
                  "validate_spec degenerate-angles diagnostic missing");

    // project rejects nonpositive epsilon
    const XMask mask = build_x_mask(desk().mask.spec, {64, 64, 3});
    bool project_rejected = false;
    try {
        (void)project(Grid(3, 64, 64, 0.0), mask, 0.0);
    } catch (const InvalidInput&) {
        project_rejected = true;
    }
    check.require(project_rejected, "project accepted epsilon <= 0");

    // stub judge contracts
    auto judge = make_stub_judge({});
    JudgeRequest req;
    req.template_id = "caption_consistency_v1";
    req.rubric_id = "consistency_0_100";
    req.content = json{{"reference", "one two three"}, {"candidate", "one two three"}}.dump();
    check.require(judge->score(req).score == 100.0, "stub judge identical-text score != 100");
    check.require(judge->score(req).score == judge->score(req).score,
                  "stub judge nondeterministic");
    req.content = json{{"reference", "one two"}, {"candidate", "alpha beta"}}.dump();
    check.require(judge->score(req).score == 0.0, "stub judge disjoint-text score != 0");
    StubJudgeOptions bad_opt;
    bad_opt.overlap_scale = 3.0;
    auto bad_judge = make_stub_judge(bad_opt);
    req.content = json{{"reference", "same"}, {"candidate", "same"}}.dump();
    bool protocol_fired = false;
    try {
        (void)bad_judge->score(req);
    } catch (const ProtocolError&) {
        protocol_fired = true;
    }
    check.require(protocol_fired, "out-of-range stub score did not raise ProtocolError");

    // cmd_eval misalignment contract
    const fs::path clean = write_desk_pngs("c8_clean");
    const fs::path adv = write_desk_pngs("c8_adv");
    fs::remove(adv / (desk().task.image_ids[0] + ".png"));
    const RunConfig cfg = desk_run_config();
    const CommandOutcome mis = cmd_eval(cfg, clean, adv, fresh_dir("c8_mis_out"));
    check.require(mis.exit_code != 0 && !mis.errors.empty() &&
                      mis.errors[0].find("misaligned") != std::string::npos,
                  "cmd_eval misalignment diagnostic missing");

    // judge task without credentials: explicit error, other metrics produced
    RunConfig judge_cfg = cfg;
    judge_cfg.eval.tasks = {"zero_shot", "caption"};
    judge_cfg.eval.judge.mode = "http";
    judge_cfg.eval.judge.endpoint = "http://127.0.0.1:1/score";
    judge_cfg.eval.judge.token_env = "XSPA_ACCEPTANCE_UNSET_TOKEN";
    json caps;
    for (const auto& id : desk().task.image_ids) caps[id + ".png"] = "text";
    std::ofstream(clean / "captions.json") << caps.dump();
    const CommandOutcome nocred = cmd_eval(judge_cfg, clean, clean, fresh_dir("c8_nocred_out"));
    bool mentioned = false;
    for (const auto& e : nocred.errors) mentioned |= e.find("credentials") != std::string::npos;
    check.require(nocred.exit_code != 0 && mentioned,
                  "missing-credentials diagnostic not raised");
    bool metrics_present = false;
    try {
        const json summary = json::parse(slurp(nocred.run_dir / "tables" / "summary.json"));
        metrics_present = summary.contains("zero_shot");
    } catch (...) {
    }
    check.require(metrics_present, "zero_shot metrics missing when judge task failed");

    if (check.ok) check.detail = "round-trip + all error contracts fired";
    return check;
}

}  // namespace

int main() {
    struct Entry {
        const char* name;
        std::function<Check()> fn;
    };
    const std::vector<Entry> criteria{
        {"1. default mask coverage in [0.015, 0.020]", criterion_1_mask_coverage},
        {"2. geometry equals brute-force oracle on 200 random cases", criterion_2_geometry_oracle},
        {"3. gradient suite matches finite differences (rel err <= 1e-4)",
         criterion_3_gradient_suite},
        {"4. feasibility across a full 200-iteration attack", criterion_4_feasibility},
        {"5. desk-scale efficacy (drop >= 30 pts, ASR >= 40%)", criterion_5_desk_efficacy},
        {"6. ablation trends (iterations, budget, smoothness)", criterion_6_ablation_trends},
        {"7. bit-identical reruns of cmd_attack", criterion_7_reproducibility},
        {"8. round-trip and error contracts", criterion_8_contracts},
    };

    int failures = 0;
    for (const auto& entry : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Check check;
        try {
            check = entry.fn();
        } catch (const std::exception& e) {
            check.ok = false;
            check.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] %s%s%s (%.1fs)\n", check.ok ? "PASS" : "FAIL", entry.name,
                    check.detail.empty() ? "" : " - ", check.detail.c_str(), secs);
        std::fflush(stdout);
        if (!check.ok) ++failures;
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures;
}
