#include "xspa/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "xspa/rng.hpp"

namespace xspa {

using nlohmann::json;

namespace {

std::vector<double> class_logits(const SimilarityContext& ctx_template,
                                 const std::vector<double>& image_feature) {
    SimilarityContext ctx = ctx_template;
    ctx.image_feature = image_feature;
    return similarity_logits(ctx);
}

int predict_class(const EncoderHandle& encoder, const Grid& image,
                  const SimilarityContext& ctx_template) {
    const std::vector<double> logits = class_logits(ctx_template, encoder.encode_image(image));
    return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

SimilarityContext make_ctx(const EncoderHandle& encoder,
                           const std::vector<std::string>& class_names) {
    SimilarityContext ctx;
    ctx.class_text_features = class_prompt_features(class_names, encoder);
    ctx.temperature = encoder.temperature();
    ctx.image_feature.assign(static_cast<std::size_t>(encoder.feature_dim()), 0.0);
    ctx.image_feature[0] = 1.0;
    return ctx;
}

}  // namespace

double zero_shot_accuracy(const EncoderHandle& encoder, const std::vector<Grid>& images,
                          const std::vector<int>& labels,
                          const std::vector<std::string>& class_names) {
    if (images.empty()) throw InvalidInput("zero_shot_accuracy: empty image set");
    if (images.size() != labels.size())
        throw InvalidInput("zero_shot_accuracy: images/labels misaligned");
    const SimilarityContext ctx = make_ctx(encoder, class_names);
    int correct = 0;
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= static_cast<int>(class_names.size()))
            throw InvalidInput("zero_shot_accuracy: label out of range");
        if (predict_class(encoder, images[i], ctx) == labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(images.size());
}

double attack_success_rate(const EncoderHandle& encoder, const std::vector<Grid>& clean_images,
                           const std::vector<Grid>& adv_images, const std::vector<int>& labels,
                           const std::vector<std::string>& class_names) {
    if (clean_images.size() != adv_images.size() || clean_images.size() != labels.size())
        throw InvalidInput("attack_success_rate: misaligned inputs");
    if (clean_images.empty()) throw InvalidInput("attack_success_rate: empty image set");
    const SimilarityContext ctx = make_ctx(encoder, class_names);
    int clean_correct = 0;
    int flipped = 0;
    for (std::size_t i = 0; i < clean_images.size(); ++i) {
        if (predict_class(encoder, clean_images[i], ctx) != labels[i]) continue;
        ++clean_correct;
        if (predict_class(encoder, adv_images[i], ctx) != labels[i]) ++flipped;
    }
    if (clean_correct == 0)
        throw InvalidInput("attack_success_rate: no clean-correct images, rate undefined");
    return static_cast<double>(flipped) / static_cast<double>(clean_correct);
}

// ---------------------------------------------------------------------------
// Judge clients
// ---------------------------------------------------------------------------

const std::string& judge_assets_json() {
    static const std::string assets = R"({
  "version": "1.0",
  "rubrics": [
    {"id": "consistency_0_100", "range_lo": 0.0, "range_hi": 100.0,
     "description": "Semantic consistency between a reference and a candidate description; 0 = unrelated, 100 = same content."},
    {"id": "correctness_0_100", "range_lo": 0.0, "range_hi": 100.0,
     "description": "Answer correctness against a reference answer; 0 = wrong, 100 = fully correct."},
    {"id": "naturalness_1_4", "range_lo": 1.0, "range_hi": 4.0,
     "description": "Visual naturalness and physical plausibility of an image on a 4-point scale."}
  ],
  "templates": [
    {"id": "caption_consistency_v1",
     "text": "You are scoring how consistent a candidate image description is with a reference description of the same image. Use the full rubric range. Reference: {reference}\nCandidate: {candidate}\nReturn JSON {\"score\": <number>, \"rationale\": <string>}."},
    {"id": "vqa_correctness_v1",
     "text": "You are scoring whether a candidate answer to a visual question matches the reference answer. Use the full rubric range. Question and reference: {reference}\nCandidate answer: {candidate}\nReturn JSON {\"score\": <number>, \"rationale\": <string>}."},
    {"id": "naturalness_v1",
     "text": "Rate the visual naturalness, physical consistency and plausibility of the referenced image on the rubric scale. Image: {reference}\nReturn JSON {\"score\": <number>, \"rationale\": <string>}."}
  ]
})";
    return assets;
}

JudgeRubric lookup_rubric(const std::string& rubric_id) {
    const json assets = json::parse(judge_assets_json());
    for (const auto& r : assets.at("rubrics")) {
        if (r.at("id").get<std::string>() == rubric_id) {
            JudgeRubric rubric;
            rubric.id = rubric_id;
            rubric.range_lo = r.at("range_lo").get<double>();
            rubric.range_hi = r.at("range_hi").get<double>();
            rubric.description = r.at("description").get<std::string>();
            return rubric;
        }
    }
    throw InvalidInput("unknown judge rubric: '" + rubric_id + "'");
}

namespace {

class AuditSink {
public:
    explicit AuditSink(std::filesystem::path path) : path_(std::move(path)) {}

    void record(const JudgeRequest& request, const json& response_or_error) {
        std::lock_guard<std::mutex> lock(mutex_);
        ++count_;
        if (path_.empty()) return;
        json line{{"request",
                   {{"template_id", request.template_id},
                    {"content", request.content},
                    {"rubric_id", request.rubric_id}}},
                  {"response", response_or_error}};
        std::ofstream out(path_, std::ios::app);
        out << line.dump() << "\n";
    }

    std::size_t count() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return count_;
    }

private:
    std::filesystem::path path_;
    mutable std::mutex mutex_;
    std::size_t count_ = 0;
};

std::vector<std::string> judge_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char ch : text) {
        if (std::isalnum(static_cast<unsigned char>(ch))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        } else if (!cur.empty()) {
            tokens.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(cur);
    return tokens;
}

double jaccard_overlap(const std::string& a, const std::string& b) {
    const auto ta = judge_tokens(a);
    const auto tb = judge_tokens(b);
    const std::set<std::string> sa(ta.begin(), ta.end());
    const std::set<std::string> sb(tb.begin(), tb.end());
    if (sa.empty() && sb.empty()) return 1.0;
    std::size_t inter = 0;
    for (const auto& t : sa) inter += sb.count(t);
    const std::size_t uni = sa.size() + sb.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

class StubJudge final : public JudgeClient {
public:
    explicit StubJudge(const StubJudgeOptions& options)
        : options_(options), audit_(options.audit_path) {}

    JudgeResponse score(const JudgeRequest& request) override {
        const JudgeRubric rubric = lookup_rubric(request.rubric_id);
        json content;
        try {
            content = json::parse(request.content);
        } catch (const json::exception&) {
            audit_.record(request, json{{"error", "content not parseable"}});
            throw InvalidInput("stub judge: request content must be JSON with reference/candidate");
        }
        if (!content.contains("reference") || !content.contains("candidate")) {
            audit_.record(request, json{{"error", "missing reference/candidate"}});
            throw InvalidInput("stub judge: request content must carry reference and candidate");
        }
        const double overlap = jaccard_overlap(content["reference"].get<std::string>(),
                                               content["candidate"].get<std::string>());
        JudgeResponse response;
        response.score = rubric.range_lo +
                         overlap * options_.overlap_scale * (rubric.range_hi - rubric.range_lo);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "token-overlap %.4f", overlap);
        response.rationale = buf;
        if (response.score < rubric.range_lo || response.score > rubric.range_hi) {
            audit_.record(request, json{{"error", "score out of rubric range"},
                                        {"score", response.score}});
            throw ProtocolError("judge score " + std::to_string(response.score) +
                                " outside rubric range [" + std::to_string(rubric.range_lo) +
                                ", " + std::to_string(rubric.range_hi) + "]");
        }
        audit_.record(request, json{{"score", response.score}, {"rationale", response.rationale}});
        return response;
    }

    std::size_t audit_count() const override { return audit_.count(); }

private:
    StubJudgeOptions options_;
    AuditSink audit_;
};

class HttpJudge final : public JudgeClient {
public:
    explicit HttpJudge(const HttpJudgeOptions& options)
        : options_(options), audit_(options.audit_path) {
        const char* token = std::getenv(options.token_env.c_str());
        if (token == nullptr || *token == '\0')
            throw ConfigError("judge credentials not set: environment variable " +
                              options.token_env);
        token_ = token;

        const auto scheme_end = options.endpoint.find("://");
        if (scheme_end == std::string::npos)
            throw ConfigError("judge endpoint must include a scheme: " + options.endpoint);
        const auto path_start = options.endpoint.find('/', scheme_end + 3);
        base_ = path_start == std::string::npos ? options.endpoint
                                                : options.endpoint.substr(0, path_start);
        path_ = path_start == std::string::npos ? "/" : options.endpoint.substr(path_start);
    }

    JudgeResponse score(const JudgeRequest& request) override {
        const JudgeRubric rubric = lookup_rubric(request.rubric_id);
        const json body{{"template_id", request.template_id},
                        {"content", request.content},
                        {"rubric_id", request.rubric_id}};

        std::string last_error;
        for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
            if (attempt > 0)
                std::this_thread::sleep_for(std::chrono::milliseconds(50 * attempt));
            httplib::Client client(base_);
            client.set_connection_timeout(options_.timeout_seconds, 0);
            client.set_read_timeout(options_.timeout_seconds, 0);
            httplib::Headers headers{{"Authorization", "Bearer " + token_}};
            auto res = client.Post(path_, headers, body.dump(), "application/json");
            if (!res) {
                last_error = "connection failed (" + httplib::to_string(res.error()) + ")";
                continue;
            }
            if (res->status != 200) {
                last_error = "HTTP status " + std::to_string(res->status);
                continue;
            }
            json parsed;
            try {
                parsed = json::parse(res->body);
            } catch (const json::exception& e) {
                audit_.record(request, json{{"error", std::string("unparseable body: ") + e.what()}});
                throw ProtocolError(std::string("judge response is not JSON: ") + e.what());
            }
            if (!parsed.contains("score") || !parsed["score"].is_number()) {
                audit_.record(request, json{{"error", "missing numeric score"}, {"body", res->body}});
                throw ProtocolError("judge response missing numeric 'score'");
            }
            JudgeResponse response;
            response.score = parsed["score"].get<double>();
            response.rationale = parsed.value("rationale", "");
            if (response.score < rubric.range_lo || response.score > rubric.range_hi) {
                audit_.record(request, json{{"error", "score out of rubric range"},
                                            {"score", response.score}});
                throw ProtocolError("judge score " + std::to_string(response.score) +
                                    " outside rubric range");
            }
            audit_.record(request,
                          json{{"score", response.score}, {"rationale", response.rationale}});
            return response;
        }
        audit_.record(request, json{{"error", last_error}});
        throw TransportError("judge request failed after " +
                             std::to_string(options_.max_retries + 1) + " attempts: " + last_error);
    }

    std::size_t audit_count() const override { return audit_.count(); }

private:
    HttpJudgeOptions options_;
    AuditSink audit_;
    std::string token_;
    std::string base_;
    std::string path_;
};

}  // namespace

std::unique_ptr<JudgeClient> make_stub_judge(const StubJudgeOptions& options) {
    return std::make_unique<StubJudge>(options);
}

std::unique_ptr<JudgeClient> make_http_judge(const HttpJudgeOptions& options) {
    return std::make_unique<HttpJudge>(options);
}

// ---------------------------------------------------------------------------
// Saliency
// ---------------------------------------------------------------------------

SaliencyResult saliency_map(const EncoderHandle& encoder, const Grid& image,
                            const std::vector<double>& text_feature) {
    const Grid grad = encoder.encode_image_vjp(image, text_feature);
    SaliencyResult out;
    out.heatmap = Grid(1, image.height(), image.width(), 0.0);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int h = 0; h < image.height(); ++h)
        for (int w = 0; w < image.width(); ++w) {
            double s = 0.0;
            for (int c = 0; c < image.channels(); ++c) {
                const double g = grad.at(c, h, w);
                s += g * g;
            }
            const double mag = std::sqrt(s);
            out.heatmap.at(0, h, w) = mag;
            lo = std::min(lo, mag);
            hi = std::max(hi, mag);
        }
    if (hi - lo < 1e-18) {
        out.flat = true;
        for (double& v : out.heatmap.raw()) v = 0.0;
        return out;
    }
    for (double& v : out.heatmap.raw()) v = (v - lo) / (hi - lo);
    return out;
}

double saliency_shift_score(const SaliencyResult& a, const SaliencyResult& b) {
    require_same_shape(a.heatmap, b.heatmap, "saliency_shift_score");
    double s = 0.0;
    for (std::size_t i = 0; i < a.heatmap.size(); ++i)
        s += std::abs(a.heatmap.raw()[i] - b.heatmap.raw()[i]);
    return s / static_cast<double>(a.heatmap.size());
}

// ---------------------------------------------------------------------------
// Ablation sweeps
// ---------------------------------------------------------------------------

const std::vector<std::string> kSmoothnessVariants = {"Full", "w/o Perturb. Magnitude",
                                                      "w/o Line Smooth"};

SweepAxis parse_sweep_axis(const std::string& name) {
    if (name == "iterations") return SweepAxis::iterations;
    if (name == "budget") return SweepAxis::budget;
    if (name == "smoothness_ablation") return SweepAxis::smoothness_ablation;
    throw InvalidInput("unknown sweep axis: '" + name + "'");
}

std::string sweep_axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::iterations: return "iterations";
        case SweepAxis::budget: return "budget";
        case SweepAxis::smoothness_ablation: return "smoothness_ablation";
    }
    return "?";
}

namespace {

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

AttackConfig config_for_setting(const AttackConfig& base, SweepAxis axis, double value,
                                const std::string& variant) {
    AttackConfig cfg = base;
    switch (axis) {
        case SweepAxis::iterations:
            cfg.total_iterations = static_cast<int>(std::lround(value));
            break;
        case SweepAxis::budget:
            cfg.epsilon = value;
            break;
        case SweepAxis::smoothness_ablation:
            if (variant == "w/o Perturb. Magnitude") {
                cfg.schedule.early[3] = 0.0;
                cfg.schedule.late[3] = 0.0;
            } else if (variant == "w/o Line Smooth") {
                cfg.schedule.early[4] = 0.0;
                cfg.schedule.late[4] = 0.0;
            } else if (variant != "Full") {
                throw InvalidInput("unknown smoothness variant: '" + variant + "'");
            }
            break;
    }
    return cfg;
}

}  // namespace

std::vector<SweepRow> ablation_sweep(const SweepConfig& sweep, const SweepFixtures& fixtures) {
    if (fixtures.images.empty()) throw InvalidInput("ablation_sweep: no fixture images");
    if (fixtures.images.size() != fixtures.labels.size() ||
        fixtures.images.size() != fixtures.pools.size() ||
        fixtures.images.size() != fixtures.image_ids.size())
        throw InvalidInput("ablation_sweep: misaligned fixtures");

    std::vector<std::pair<std::string, AttackConfig>> settings;
    if (sweep.axis == SweepAxis::smoothness_ablation) {
        const auto& variants = sweep.variants.empty() ? kSmoothnessVariants : sweep.variants;
        for (const auto& variant : variants)
            settings.emplace_back(variant, config_for_setting(sweep.base, sweep.axis, 0.0, variant));
    } else {
        if (sweep.grid.empty()) throw InvalidInput("ablation_sweep: empty grid");
        for (double value : sweep.grid)
            settings.emplace_back(format_number(value),
                                  config_for_setting(sweep.base, sweep.axis, value, ""));
    }

    std::vector<SweepRow> rows;
    for (const auto& [label, cfg] : settings) {
        SweepRow row;
        row.setting = label;
        try {
            std::vector<Grid> adv_images;
            double sum_mag = 0.0, sum_smooth = 0.0, sum_line = 0.0;
            for (std::size_t i = 0; i < fixtures.images.size(); ++i) {
                AttackConfig per_image = cfg;
                per_image.rng_seed = derive_seed(fixtures.master_seed, fixtures.image_ids[i]);
                ClassTask task;
                task.class_names = fixtures.class_names;
                task.true_class = fixtures.labels[i];
                const AttackResult result =
                    run_attack(fixtures.images[i], fixtures.mask, *fixtures.encoder,
                               fixtures.pools[i], task, per_image);

                double abs_sum = 0.0;
                for (const auto& p : fixtures.mask.support)
                    for (int c = 0; c < result.final_delta.channels(); ++c)
                        abs_sum += std::abs(result.final_delta.at(c, p.row, p.col));
                sum_mag += abs_sum / (static_cast<double>(fixtures.mask.support.size()) *
                                      result.final_delta.channels());
                sum_smooth += magnitude_loss(result.final_delta, fixtures.mask);
                sum_line += line_smoothness_loss(result.final_delta, fixtures.mask.paths);
                adv_images.push_back(result.adversarial_image);
            }
            const double n = static_cast<double>(fixtures.images.size());
            row.mean_perturb_mag = sum_mag / n;
            row.mean_smoothness = sum_smooth / n;
            row.mean_line_smoothness = sum_line / n;
            row.asr = attack_success_rate(*fixtures.encoder, fixtures.images, adv_images,
                                          fixtures.labels, fixtures.class_names);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string sweep_stat_definitions_json() {
    const json defs{
        {"asr",
         "among clean-correct fixture images, fraction whose adversarial prediction differs "
         "from the label"},
        {"mean_perturb_mag",
         "mean over images of the mean absolute delta over support pixels and channels"},
        {"mean_smoothness",
         "mean over images of the magnitude regularizer: mean squared channel-vector norm of "
         "delta over support pixels"},
        {"mean_line_smoothness",
         "mean over images of the line regularizer: per-path mean squared channel-vector "
         "difference between consecutive centerline pixels"}};
    return defs.dump(2);
}

}  // namespace xspa
