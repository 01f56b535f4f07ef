#include "xspa/encoder.hpp"

#include <cctype>
#include <cmath>
#include <map>
#include <mutex>

#include "xspa/rng.hpp"

namespace xspa {

namespace {

void normalize_inplace(std::vector<double>& v, const char* what) {
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (n < 1e-12) throw NumericError(std::string(what) + ": zero-norm feature");
    for (double& x : v) x /= n;
}

std::vector<std::string> tokenize(const std::string& text) {
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

class ToyEncoder final : public EncoderHandle {
public:
    ToyEncoder(std::uint64_t seed, int feature_dim, int patch_size, double temperature)
        : seed_(seed), feature_dim_(feature_dim), patch_size_(patch_size), temperature_(temperature) {
        if (feature_dim < 4) throw InvalidInput("toy_encoder: feature_dim must be >= 4");
        if (patch_size < 1) throw InvalidInput("toy_encoder: patch_size must be >= 1");
        if (temperature <= 0.0) throw InvalidInput("toy_encoder: temperature must be > 0");
    }

    std::vector<double> encode_image(const Grid& image) const override {
        Forward fw = forward(image);
        return fw.feature;
    }

    Grid encode_image_vjp(const Grid& image, const std::vector<double>& upstream) const override {
        if (static_cast<int>(upstream.size()) != feature_dim_)
            throw InvalidInput("encode_image_vjp: upstream dimension mismatch");
        Forward fw = forward(image);

        // v = u / |u|
        double vu = 0.0;
        for (int f = 0; f < feature_dim_; ++f) vu += fw.feature[f] * upstream[f];
        std::vector<double> d_act(feature_dim_);
        for (int f = 0; f < feature_dim_; ++f) {
            const double du = (upstream[f] - fw.feature[f] * vu) / fw.pre_norm;
            d_act[f] = (1.0 - fw.activated[f] * fw.activated[f]) * du;  // tanh'
        }

        const auto& weights = weight_matrix(fw.in_dim);
        std::vector<double> d_pooled(fw.in_dim, 0.0);
        for (int f = 0; f < feature_dim_; ++f) {
            const double g = d_act[f];
            const double* row = weights.data() + static_cast<std::size_t>(f) * fw.in_dim;
            for (int i = 0; i < fw.in_dim; ++i) d_pooled[i] += g * row[i];
        }

        // average pooling spreads gradient uniformly over each patch
        Grid d_pixels = Grid::zeros_like(image);
        const int ph = image.height() / patch_size_;
        const int pw = image.width() / patch_size_;
        const double inv_area = 1.0 / (static_cast<double>(patch_size_) * patch_size_);
        int idx = 0;
        for (int c = 0; c < image.channels(); ++c)
            for (int i = 0; i < ph; ++i)
                for (int j = 0; j < pw; ++j, ++idx) {
                    const double g = d_pooled[idx] * inv_area;
                    for (int dh = 0; dh < patch_size_; ++dh)
                        for (int dw = 0; dw < patch_size_; ++dw)
                            d_pixels.at(c, i * patch_size_ + dh, j * patch_size_ + dw) = g;
                }
        return d_pixels;
    }

    std::vector<double> encode_text(const std::string& text) const override {
        const std::vector<std::string> tokens = tokenize(text);
        if (tokens.empty()) throw InvalidInput("encode_text: no tokens in input");
        std::vector<double> feat(feature_dim_, 0.0);
        for (const auto& tok : tokens) {
            const std::uint64_t th = fnv1a64(tok);
            for (int f = 0; f < feature_dim_; ++f)
                feat[f] += keyed_gauss(seed_, "txt_w", static_cast<std::uint64_t>(f), th);
        }
        normalize_inplace(feat, "encode_text");
        return feat;
    }

    double temperature() const override { return temperature_; }
    int feature_dim() const override { return feature_dim_; }
    std::string identity() const override {
        return "toy:seed=" + std::to_string(seed_) + ":dim=" + std::to_string(feature_dim_) +
               ":patch=" + std::to_string(patch_size_);
    }
    bool concurrent_safe() const override { return true; }

private:
    struct Forward {
        std::vector<double> feature;    // unit norm
        std::vector<double> activated;  // tanh output, pre-normalization
        double pre_norm = 0.0;
        int in_dim = 0;
    };

    Forward forward(const Grid& image) const {
        if (image.height() % patch_size_ != 0 || image.width() % patch_size_ != 0)
            throw InvalidInput("toy_encoder: patch_size must divide image sides");
        const int ph = image.height() / patch_size_;
        const int pw = image.width() / patch_size_;
        const int in_dim = image.channels() * ph * pw;

        // pooled, centered patch means
        std::vector<double> pooled(in_dim);
        const double inv_area = 1.0 / (static_cast<double>(patch_size_) * patch_size_);
        int idx = 0;
        for (int c = 0; c < image.channels(); ++c)
            for (int i = 0; i < ph; ++i)
                for (int j = 0; j < pw; ++j, ++idx) {
                    double s = 0.0;
                    for (int dh = 0; dh < patch_size_; ++dh)
                        for (int dw = 0; dw < patch_size_; ++dw)
                            s += image.at(c, i * patch_size_ + dh, j * patch_size_ + dw);
                    pooled[idx] = s * inv_area - 0.5;
                }

        const auto& weights = weight_matrix(in_dim);
        Forward fw;
        fw.in_dim = in_dim;
        fw.activated.resize(feature_dim_);
        double norm_sq = 0.0;
        for (int f = 0; f < feature_dim_; ++f) {
            const double* row = weights.data() + static_cast<std::size_t>(f) * in_dim;
            double a = 0.1 * keyed_gauss(seed_, "img_b", static_cast<std::uint64_t>(f), 0);
            for (int i = 0; i < in_dim; ++i) a += row[i] * pooled[i];
            fw.activated[f] = std::tanh(a);
            norm_sq += fw.activated[f] * fw.activated[f];
        }
        fw.pre_norm = std::sqrt(norm_sq);
        if (fw.pre_norm < 1e-12) throw NumericError("toy_encoder: zero-norm image feature");
        fw.feature.resize(feature_dim_);
        for (int f = 0; f < feature_dim_; ++f) fw.feature[f] = fw.activated[f] / fw.pre_norm;
        return fw;
    }

    const std::vector<double>& weight_matrix(int in_dim) const {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = weight_cache_.find(in_dim);
        if (it != weight_cache_.end()) return it->second;
        std::vector<double> w(static_cast<std::size_t>(feature_dim_) * in_dim);
        const double scale = 3.0 / std::sqrt(static_cast<double>(in_dim));
        for (int f = 0; f < feature_dim_; ++f)
            for (int i = 0; i < in_dim; ++i)
                w[static_cast<std::size_t>(f) * in_dim + i] =
                    scale * keyed_gauss(seed_, "img_w", static_cast<std::uint64_t>(f),
                                        static_cast<std::uint64_t>(i));
        return weight_cache_.emplace(in_dim, std::move(w)).first->second;
    }

    std::uint64_t seed_;
    int feature_dim_;
    int patch_size_;
    double temperature_;
    mutable std::mutex cache_mutex_;
    mutable std::map<int, std::vector<double>> weight_cache_;
};

std::mutex g_backend_mutex;
std::map<std::string, EncoderFactory>& backend_registry() {
    static std::map<std::string, EncoderFactory> registry;
    return registry;
}

}  // namespace

EncoderPtr toy_encoder(std::uint64_t seed, int feature_dim, int patch_size, double temperature) {
    return std::make_shared<ToyEncoder>(seed, feature_dim, patch_size, temperature);
}

std::string label_prompt(const std::string& label) { return "a photo of a " + label; }

TextPools build_text_pools(const AttackSpecText& spec, const EncoderHandle& encoder) {
    TextPools pools;
    if (spec.target_label && !spec.target_label->empty())
        pools.target_prompts.push_back(label_prompt(*spec.target_label));
    for (const auto& p : spec.caption_drift_prompts) pools.target_prompts.push_back(p);
    for (const auto& p : spec.vqa_shift_prompts) pools.target_prompts.push_back(p);

    if (!spec.true_label.empty()) pools.source_prompts.push_back(label_prompt(spec.true_label));
    for (const auto& p : spec.source_prompts) pools.source_prompts.push_back(p);

    if (pools.target_prompts.empty() && pools.source_prompts.empty())
        throw InvalidInput("build_text_pools: both prompt pools are empty");
    if (pools.target_prompts.empty())
        throw InvalidInput("build_text_pools: target pool is empty");
    if (pools.source_prompts.empty())
        throw InvalidInput("build_text_pools: source pool is empty");

    for (const auto& p : pools.target_prompts)
        pools.target_features.push_back(encoder.encode_text(p));
    for (const auto& p : pools.source_prompts)
        pools.source_features.push_back(encoder.encode_text(p));
    return pools;
}

std::vector<std::vector<double>> class_prompt_features(const std::vector<std::string>& class_names,
                                                       const EncoderHandle& encoder) {
    if (class_names.empty()) throw InvalidInput("class_prompt_features: empty class list");
    std::vector<std::vector<double>> features;
    features.reserve(class_names.size());
    for (const auto& name : class_names)
        features.push_back(encoder.encode_text(label_prompt(name)));
    return features;
}

void register_encoder_backend(const std::string& backend, EncoderFactory factory) {
    std::lock_guard<std::mutex> lock(g_backend_mutex);
    backend_registry()[backend] = std::move(factory);
}

EncoderPtr external_encoder_adapter(const std::string& model_id,
                                    const std::string& runtime_config) {
    const auto colon = model_id.find(':');
    const std::string backend = colon == std::string::npos ? model_id : model_id.substr(0, colon);
    EncoderFactory factory;
    {
        std::lock_guard<std::mutex> lock(g_backend_mutex);
        auto it = backend_registry().find(backend);
        if (it != backend_registry().end()) factory = it->second;
    }
    if (!factory)
        throw CapabilityError("encoder backend not installed: '" + backend +
                              "' (model_id '" + model_id + "')");
    EncoderPtr handle = factory(model_id, runtime_config);
    if (!handle) throw CapabilityError("encoder backend returned no handle for '" + model_id + "'");
    return handle;
}

}  // namespace xspa
