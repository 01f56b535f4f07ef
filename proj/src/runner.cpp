#include "xspa/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "xspa/io_png.hpp"
#include "xspa/rng.hpp"
#include "xspa/synthetic.hpp"

namespace xspa {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string new_run_id(const std::string& command, const RunConfig& config) {
    static std::atomic<std::uint64_t> counter{0};
    const auto us = std::chrono::duration_cast<std::chrono::microseconds>(
                        std::chrono::steady_clock::now().time_since_epoch())
                        .count();
    return command + "-" + config_hash(config).substr(0, 8) + "-" + std::to_string(us) + "-" +
           std::to_string(counter.fetch_add(1));
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

void write_png_atomic(const fs::path& path, const Grid& image) {
    const fs::path tmp = path.string() + ".tmp.png";
    write_png(tmp, image);
    fs::rename(tmp, path);
}

std::vector<std::string> list_pngs(const fs::path& dir) {
    std::vector<std::string> names;
    if (!fs::is_directory(dir)) throw InvalidInput("not a directory: " + dir.string());
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end());
    return names;
}

EncoderPtr make_encoder(const RunConfig& config) {
    if (config.encoder.kind == "toy")
        return toy_encoder(config.encoder.seed, config.encoder.feature_dim,
                           config.encoder.patch_size, config.encoder.temperature);
    return external_encoder_adapter(config.encoder.model_id);
}

int class_index(const std::vector<std::string>& class_names, const std::string& name) {
    const auto it = std::find(class_names.begin(), class_names.end(), name);
    if (it == class_names.end())
        throw InvalidInput("label '" + name + "' not in pools.class_names");
    return static_cast<int>(it - class_names.begin());
}

AttackSpecText image_attack_spec(const RunConfig& config, const std::string& true_label,
                                 int true_class) {
    AttackSpecText spec;
    spec.true_label = true_label;
    spec.target_label = config.pools.target_label;
    spec.caption_drift_prompts = config.pools.caption_drift_prompts;
    spec.vqa_shift_prompts = config.pools.vqa_shift_prompts;
    spec.source_prompts = config.pools.source_prompts;
    const bool target_side_empty = !spec.target_label && spec.caption_drift_prompts.empty() &&
                                   spec.vqa_shift_prompts.empty();
    if (target_side_empty && config.pools.auto_target) {
        const int next = (true_class + 1) % static_cast<int>(config.pools.class_names.size());
        spec.target_label = config.pools.class_names[next];
    }
    return spec;
}

json mask_spec_json(const XMaskSpec& spec) {
    return json{{"rho_col", spec.rho_col},       {"rho_row", spec.rho_row},
                {"angle1", spec.angle1},         {"angle2", spec.angle2},
                {"length_ratio", spec.length_ratio}, {"line_width", spec.line_width}};
}

json manifest_to_json(const RunManifest& m) {
    return json{{"run_id", m.run_id},
                {"config_hash", m.config_hash_hex},
                {"command", m.command},
                {"encoder_identity", m.encoder_identity},
                {"master_seed", m.master_seed},
                {"outputs", m.outputs},
                {"started_at", m.started_at},
                {"finished_at", m.finished_at},
                {"effective_config", json::parse(m.effective_config_json)}};
}

void write_manifest(const fs::path& run_dir, const RunManifest& m) {
    write_file_atomic(run_dir / "manifest.json", manifest_to_json(m).dump(2) + "\n");
}

std::string csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> read_labels_file(const fs::path& dir) {
    const fs::path path = dir / "labels.json";
    std::ifstream in(path);
    if (!in) throw InvalidInput("labels file not found: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidInput("labels file unparseable: " + path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw InvalidInput("labels file must be a JSON object");
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [k, v] : j.items()) {
        if (!v.is_string()) throw InvalidInput("labels file values must be strings");
        out.emplace_back(k, v.get<std::string>());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string loss_history_to_jsonl(const std::vector<LossBreakdown>& history, int best_iteration) {
    std::string out;
    for (const auto& b : history) {
        const json line{{"t", b.iteration},
                        {"clip", b.clip},
                        {"tar", b.tar},
                        {"src", b.src},
                        {"mag", b.mag},
                        {"line", b.line},
                        {"weighted_total", b.weighted_total},
                        {"is_best", b.iteration == best_iteration}};
        out += line.dump();
        out += "\n";
    }
    return out;
}

CommandOutcome cmd_attack(const RunConfig& config, const fs::path& input_dir,
                          const fs::path& output_dir) {
    CommandOutcome outcome;
    const std::string started = utc_now();

    std::vector<std::string> names;
    std::map<std::string, std::string> labels;
    try {
        names = list_pngs(input_dir);
        if (names.empty()) throw InvalidInput("no inputs: no .png files in " + input_dir.string());
        for (auto& [file, label] : read_labels_file(input_dir)) labels[file] = label;
    } catch (const std::exception& e) {
        outcome.exit_code = 1;
        outcome.errors.push_back(e.what());
        return outcome;
    }

    const std::string run_id = new_run_id("attack", config);
    const fs::path run_dir = output_dir / run_id;
    outcome.run_dir = run_dir;
    EncoderPtr shared_encoder;
    XMask mask;
    try {
        fs::create_directories(run_dir / "images");
        fs::create_directories(run_dir / "histories");
        shared_encoder = make_encoder(config);
        mask = build_x_mask(config.mask.spec, config.mask.shape);
    } catch (const std::exception& e) {
        outcome.exit_code = 1;
        outcome.errors.push_back(e.what());
        return outcome;
    }

    std::vector<std::string> per_image_error(names.size());
    std::vector<std::vector<std::string>> per_image_outputs(names.size());

    const int worker_count = std::max(1, std::min<int>(config.workers, static_cast<int>(names.size())));
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;

    auto worker_fn = [&]() {
        EncoderPtr encoder = shared_encoder;
        if (!encoder->concurrent_safe() && worker_count > 1)
            encoder = make_encoder(config);  // per-worker instance
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= names.size()) break;
            const std::string& name = names[i];
            try {
                const auto label_it = labels.find(name);
                if (label_it == labels.end())
                    throw InvalidInput("no label for image '" + name + "'");
                const Grid image = read_png(input_dir / name);
                if (image.shape() != config.mask.shape)
                    throw InvalidInput("image '" + name + "' shape does not match config mask shape");

                const int true_class = class_index(config.pools.class_names, label_it->second);
                ClassTask task;
                task.class_names = config.pools.class_names;
                task.true_class = true_class;
                if (config.pools.target_label)
                    task.target_class = class_index(config.pools.class_names,
                                                    *config.pools.target_label);

                const AttackSpecText spec = image_attack_spec(config, label_it->second, true_class);
                const TextPools pools = build_text_pools(spec, *encoder);

                AttackConfig attack_cfg = config.attack;
                attack_cfg.rng_seed = derive_seed(config.attack.rng_seed, name);
                const AttackResult result =
                    run_attack(image, mask, *encoder, pools, task, attack_cfg);

                const std::string stem = fs::path(name).stem().string();
                const fs::path adv_png = run_dir / "images" / (stem + ".adv.png");
                const fs::path sidecar = run_dir / "images" / (stem + ".adv.json");
                const fs::path history = run_dir / "histories" / (stem + ".jsonl");

                write_png_atomic(adv_png, result.adversarial_image);
                write_file_atomic(history,
                                  loss_history_to_jsonl(result.loss_history, result.best_iteration));

                json side{{"image", name},
                          {"config_hash", config_hash(config)},
                          {"mask_spec", mask_spec_json(config.mask.spec)},
                          {"seed", attack_cfg.rng_seed},
                          {"best_iteration", result.best_iteration},
                          {"success_on_surrogate", result.success_on_surrogate},
                          {"wall_time_seconds", result.wall_time_seconds}};
                if (config.quantization_check) {
                    const Grid reloaded = read_png(adv_png);
                    SimilarityContext ctx;
                    ctx.class_text_features =
                        class_prompt_features(config.pools.class_names, *encoder);
                    ctx.temperature = encoder->temperature();
                    ctx.image_feature = encoder->encode_image(reloaded);
                    const auto logits = similarity_logits(ctx);
                    const int pred = static_cast<int>(
                        std::max_element(logits.begin(), logits.end()) - logits.begin());
                    side["quantized_success"] = config.attack.targeted
                                                    ? (task.target_class && pred == *task.target_class)
                                                    : (pred != true_class);
                }
                write_file_atomic(sidecar, side.dump(2) + "\n");

                per_image_outputs[i] = {"images/" + stem + ".adv.png",
                                        "images/" + stem + ".adv.json",
                                        "histories/" + stem + ".jsonl"};
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                per_image_error[i] = std::string(name) + ": " + e.what();
            }
        }
    };

    if (worker_count == 1) {
        worker_fn();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(worker_count));
        for (int w = 0; w < worker_count; ++w) threads.emplace_back(worker_fn);
        for (auto& t : threads) t.join();
    }

    bool any_failed = false;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (!per_image_error[i].empty()) {
            any_failed = true;
            outcome.errors.push_back(per_image_error[i]);
        }
    }

    if (!any_failed) {
        RunManifest manifest;
        manifest.run_id = run_id;
        manifest.config_hash_hex = config_hash(config);
        manifest.command = "attack";
        manifest.encoder_identity = shared_encoder->identity();
        manifest.master_seed = config.attack.rng_seed;
        for (const auto& outs : per_image_outputs)
            manifest.outputs.insert(manifest.outputs.end(), outs.begin(), outs.end());
        std::sort(manifest.outputs.begin(), manifest.outputs.end());
        manifest.started_at = started;
        manifest.finished_at = utc_now();
        manifest.effective_config_json = serialize_config(config);
        write_manifest(run_dir, manifest);
        outcome.manifest = std::move(manifest);
    }
    outcome.exit_code = any_failed ? 1 : 0;
    return outcome;
}

CommandOutcome cmd_mask_preview(const RunConfig& config, const fs::path& out_png) {
    CommandOutcome outcome;
    try {
        const XMask mask = build_x_mask(config.mask.spec, config.mask.shape);
        if (out_png.has_parent_path()) fs::create_directories(out_png.parent_path());
        write_png_atomic(out_png, render_mask_preview(mask));
        const fs::path paths_file = out_png.string() + ".paths.txt";
        write_file_atomic(paths_file, paths_to_text(mask));
        std::printf("coverage %.6f\n", mask_coverage(mask));
        std::printf("support %zu of %zu pixels\n", mask.support.size(),
                    mask.shape.pixel_count());
    } catch (const std::exception& e) {
        outcome.exit_code = 1;
        outcome.errors.push_back(e.what());
        std::fprintf(stderr, "mask-preview failed: %s\n", e.what());
    }
    return outcome;
}

namespace {

struct TextSet {
    std::map<std::string, std::string> by_image;
};

TextSet read_text_file(const fs::path& dir, const std::string& filename) {
    const fs::path path = dir / filename;
    std::ifstream in(path);
    if (!in) throw InvalidInput("text file not found: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidInput("text file unparseable: " + path.string() + ": " + e.what());
    }
    TextSet set;
    for (const auto& [k, v] : j.items()) set.by_image[k] = v.get<std::string>();
    return set;
}

}  // namespace

CommandOutcome cmd_eval(const RunConfig& config, const fs::path& clean_dir,
                        const fs::path& adv_dir, const fs::path& output_dir) {
    CommandOutcome outcome;
    const std::string started = utc_now();

    std::vector<std::string> names;
    std::map<std::string, std::string> labels;
    try {
        names = list_pngs(clean_dir);
        const std::vector<std::string> adv_names = list_pngs(adv_dir);
        if (names.empty()) throw InvalidInput("no inputs: no .png files in " + clean_dir.string());
        if (names != adv_names)
            throw InvalidInput("misaligned image sets: clean and adversarial directories must "
                               "contain the same file names");
        for (auto& [file, label] : read_labels_file(clean_dir)) labels[file] = label;
        for (const auto& name : names)
            if (!labels.contains(name)) throw InvalidInput("no label for image '" + name + "'");
    } catch (const std::exception& e) {
        outcome.exit_code = 2;
        outcome.errors.push_back(e.what());
        return outcome;
    }

    const std::string run_id = new_run_id("eval", config);
    const fs::path run_dir = output_dir / run_id;
    outcome.run_dir = run_dir;

    std::vector<EvalRecord> records;
    json summary;
    bool any_failed = false;

    try {
        fs::create_directories(run_dir / "tables");
        const EncoderPtr encoder = make_encoder(config);

        std::vector<Grid> clean_images, adv_images;
        std::vector<int> label_idx;
        for (const auto& name : names) {
            clean_images.push_back(read_png(clean_dir / name));
            adv_images.push_back(read_png(adv_dir / name));
            label_idx.push_back(class_index(config.pools.class_names, labels[name]));
        }

        SimilarityContext ctx;
        ctx.class_text_features = class_prompt_features(config.pools.class_names, *encoder);
        ctx.temperature = encoder->temperature();

        const bool zero_shot = std::find(config.eval.tasks.begin(), config.eval.tasks.end(),
                                         "zero_shot") != config.eval.tasks.end();
        if (zero_shot) {
            int clean_correct = 0, adv_correct = 0, flipped = 0;
            for (std::size_t i = 0; i < names.size(); ++i) {
                ctx.image_feature = encoder->encode_image(clean_images[i]);
                auto logits = similarity_logits(ctx);
                const int pred_clean = static_cast<int>(
                    std::max_element(logits.begin(), logits.end()) - logits.begin());
                ctx.image_feature = encoder->encode_image(adv_images[i]);
                logits = similarity_logits(ctx);
                const int pred_adv = static_cast<int>(
                    std::max_element(logits.begin(), logits.end()) - logits.begin());

                EvalRecord rec;
                rec.image_id = names[i];
                rec.task = "zero_shot";
                rec.clean_metric = pred_clean == label_idx[i] ? 1.0 : 0.0;
                rec.adversarial_metric = pred_adv == label_idx[i] ? 1.0 : 0.0;
                rec.delta = rec.adversarial_metric - rec.clean_metric;
                rec.model_tag = encoder->identity();
                records.push_back(rec);

                clean_correct += pred_clean == label_idx[i];
                adv_correct += pred_adv == label_idx[i];
                if (pred_clean == label_idx[i] && pred_adv != label_idx[i]) ++flipped;
            }
            const double n = static_cast<double>(names.size());
            summary["zero_shot"] = {{"clean_accuracy", clean_correct / n},
                                    {"adversarial_accuracy", adv_correct / n}};
            if (clean_correct > 0)
                summary["zero_shot"]["attack_success_rate"] =
                    static_cast<double>(flipped) / clean_correct;
            else
                summary["zero_shot"]["attack_success_rate"] = nullptr;
        }

        for (const std::string task : {"caption", "vqa"}) {
            if (std::find(config.eval.tasks.begin(), config.eval.tasks.end(), task) ==
                config.eval.tasks.end())
                continue;
            try {
                const std::string filename = task == "caption" ? "captions.json" : "answers.json";
                const TextSet clean_texts = read_text_file(clean_dir, filename);
                const TextSet adv_texts = read_text_file(adv_dir, filename);

                std::unique_ptr<JudgeClient> judge;
                JudgeConfig jc = config.eval.judge;
                if (jc.mode == "stub") {
                    StubJudgeOptions opt;
                    opt.audit_path = run_dir / "judge_audit.jsonl";
                    judge = make_stub_judge(opt);
                } else {
                    HttpJudgeOptions opt;
                    opt.endpoint = jc.endpoint;
                    opt.token_env = jc.token_env;
                    opt.timeout_seconds = jc.timeout_seconds;
                    opt.max_retries = jc.max_retries;
                    opt.audit_path = run_dir / "judge_audit.jsonl";
                    judge = make_http_judge(opt);
                }
                const std::string template_id =
                    task == "caption" ? "caption_consistency_v1" : "vqa_correctness_v1";

                double clean_sum = 0.0, adv_sum = 0.0;
                int scored = 0;
                for (const auto& name : names) {
                    const auto c_it = clean_texts.by_image.find(name);
                    const auto a_it = adv_texts.by_image.find(name);
                    if (c_it == clean_texts.by_image.end() || a_it == adv_texts.by_image.end())
                        throw InvalidInput("missing " + task + " text for image '" + name + "'");
                    JudgeRequest req;
                    req.template_id = template_id;
                    req.rubric_id = config.eval.judge.rubric_id;
                    req.content = json{{"reference", c_it->second}, {"candidate", c_it->second}}.dump();
                    const JudgeResponse clean_resp = judge->score(req);
                    req.content = json{{"reference", c_it->second}, {"candidate", a_it->second}}.dump();
                    const JudgeResponse adv_resp = judge->score(req);

                    EvalRecord rec;
                    rec.image_id = name;
                    rec.task = task;
                    rec.clean_metric = clean_resp.score;
                    rec.adversarial_metric = adv_resp.score;
                    rec.delta = rec.adversarial_metric - rec.clean_metric;
                    rec.model_tag = "judge:" + jc.mode;
                    records.push_back(rec);
                    clean_sum += clean_resp.score;
                    adv_sum += adv_resp.score;
                    ++scored;
                }
                summary[task] = {{"clean_mean", clean_sum / scored},
                                 {"adversarial_mean", adv_sum / scored},
                                 {"judge_calls", judge->audit_count()}};
            } catch (const std::exception& e) {
                any_failed = true;
                const std::string msg = "task '" + task + "': " + e.what();
                outcome.errors.push_back(msg);
                summary["task_errors"][task] = e.what();
            }
        }

        // records table
        std::string csv = "image_id,task,clean_metric,adversarial_metric,delta,model_tag\n";
        for (const auto& rec : records) {
            csv += rec.image_id + "," + rec.task + "," + csv_number(rec.clean_metric) + "," +
                   csv_number(rec.adversarial_metric) + "," + csv_number(rec.delta) + "," +
                   rec.model_tag + "\n";
        }
        write_file_atomic(run_dir / "tables" / "records.csv", csv);
        write_file_atomic(run_dir / "tables" / "summary.json", summary.dump(2) + "\n");
    } catch (const std::exception& e) {
        outcome.exit_code = 1;
        outcome.errors.push_back(e.what());
        return outcome;
    }

    if (!any_failed) {
        RunManifest manifest;
        manifest.run_id = run_id;
        manifest.config_hash_hex = config_hash(config);
        manifest.command = "eval";
        manifest.encoder_identity = make_encoder(config)->identity();
        manifest.master_seed = config.attack.rng_seed;
        manifest.outputs = {"tables/records.csv", "tables/summary.json"};
        manifest.started_at = started;
        manifest.finished_at = utc_now();
        manifest.effective_config_json = serialize_config(config);
        write_manifest(run_dir, manifest);
        outcome.manifest = std::move(manifest);
    }
    if (any_failed) outcome.exit_code = 1;
    return outcome;
}

CommandOutcome cmd_sweep(const RunConfig& config, const fs::path& input_dir,
                         const fs::path& output_dir) {
    CommandOutcome outcome;
    const std::string started = utc_now();

    const std::string run_id = new_run_id("sweep", config);
    const fs::path run_dir = output_dir / run_id;
    outcome.run_dir = run_dir;

    try {
        const std::vector<std::string> names = list_pngs(input_dir);
        if (names.empty()) throw InvalidInput("no inputs: no .png files in " + input_dir.string());
        std::map<std::string, std::string> labels;
        for (auto& [file, label] : read_labels_file(input_dir)) labels[file] = label;

        fs::create_directories(run_dir / "tables");
        fs::create_directories(run_dir / "points");

        SweepFixtures fixtures;
        fixtures.encoder = make_encoder(config);
        fixtures.mask = build_x_mask(config.mask.spec, config.mask.shape);
        fixtures.class_names = config.pools.class_names;
        fixtures.master_seed = config.attack.rng_seed;
        for (const auto& name : names) {
            if (!labels.contains(name)) throw InvalidInput("no label for image '" + name + "'");
            const Grid image = read_png(input_dir / name);
            if (image.shape() != config.mask.shape)
                throw InvalidInput("image '" + name + "' shape does not match config mask shape");
            const int true_class = class_index(config.pools.class_names, labels[name]);
            const AttackSpecText spec = image_attack_spec(config, labels[name], true_class);
            fixtures.pools.push_back(build_text_pools(spec, *fixtures.encoder));
            fixtures.images.push_back(image);
            fixtures.labels.push_back(true_class);
            fixtures.image_ids.push_back(name);
        }

        SweepConfig sweep;
        sweep.axis = parse_sweep_axis(config.sweep.axis);
        sweep.grid = config.sweep.grid;
        sweep.variants = config.sweep.variants;
        sweep.base = config.attack;

        const std::vector<SweepRow> rows = ablation_sweep(sweep, fixtures);

        std::string csv = "setting,asr,mean_perturb_mag,mean_smoothness,mean_line_smoothness,error\n";
        bool any_failed = false;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const SweepRow& row = rows[i];
            csv += row.setting + "," + csv_number(row.asr) + "," +
                   csv_number(row.mean_perturb_mag) + "," + csv_number(row.mean_smoothness) +
                   "," + csv_number(row.mean_line_smoothness) + "," +
                   (row.error ? *row.error : "") + "\n";
            if (row.error) {
                any_failed = true;
                outcome.errors.push_back("point '" + row.setting + "': " + *row.error);
            }

            std::string point_dir_name = std::to_string(i);
            const fs::path point_dir = run_dir / "points" / point_dir_name;
            fs::create_directories(point_dir);
            json point{{"run_id", run_id},
                       {"axis", config.sweep.axis},
                       {"setting", row.setting},
                       {"config_hash", config_hash(config)},
                       {"asr", row.asr},
                       {"mean_perturb_mag", row.mean_perturb_mag},
                       {"mean_smoothness", row.mean_smoothness},
                       {"mean_line_smoothness", row.mean_line_smoothness}};
            if (row.error) point["error"] = *row.error;
            write_file_atomic(point_dir / "manifest.json", point.dump(2) + "\n");
        }
        const std::string axis_name = config.sweep.axis;
        write_file_atomic(run_dir / "tables" / ("sweep_" + axis_name + ".csv"), csv);
        write_file_atomic(run_dir / "tables" / ("sweep_" + axis_name + "_stats.json"),
                          sweep_stat_definitions_json() + "\n");

        if (!any_failed) {
            RunManifest manifest;
            manifest.run_id = run_id;
            manifest.config_hash_hex = config_hash(config);
            manifest.command = "sweep";
            manifest.encoder_identity = fixtures.encoder->identity();
            manifest.master_seed = config.attack.rng_seed;
            manifest.outputs = {"tables/sweep_" + axis_name + ".csv",
                                "tables/sweep_" + axis_name + "_stats.json"};
            for (std::size_t i = 0; i < rows.size(); ++i)
                manifest.outputs.push_back("points/" + std::to_string(i) + "/manifest.json");
            manifest.started_at = started;
            manifest.finished_at = utc_now();
            manifest.effective_config_json = serialize_config(config);
            write_manifest(run_dir, manifest);
            outcome.manifest = std::move(manifest);
        }
        outcome.exit_code = any_failed ? 1 : 0;
    } catch (const std::exception& e) {
        outcome.exit_code = 1;
        outcome.errors.push_back(e.what());
    }
    return outcome;
}

}  // namespace xspa
