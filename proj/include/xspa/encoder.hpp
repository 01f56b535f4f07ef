#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "xspa/grid.hpp"
#include "xspa/objective.hpp"

namespace xspa {

/// Image-text encoder contract. Implementations return unit-norm features,
/// deterministic text features, and exact pixel gradients for the image path.
class EncoderHandle {
public:
    virtual ~EncoderHandle() = default;

    virtual std::vector<double> encode_image(const Grid& image) const = 0;

    /// Vector-Jacobian product: given dL/d(feature), returns dL/d(pixels).
    virtual Grid encode_image_vjp(const Grid& image,
                                  const std::vector<double>& upstream) const = 0;

    virtual std::vector<double> encode_text(const std::string& text) const = 0;

    virtual double temperature() const = 0;
    virtual int feature_dim() const = 0;
    virtual std::string identity() const = 0;

    /// Whether one instance may be evaluated from multiple threads.
    virtual bool concurrent_safe() const { return false; }
};

using EncoderPtr = std::shared_ptr<const EncoderHandle>;

/// Deterministic differentiable stand-in encoder for desk-scale runs.
/// Image path: non-overlapping patch average pool -> fixed seeded linear map
/// -> tanh -> L2 normalize. Text path: hashed token bag -> fixed seeded
/// linear map -> L2 normalize. Stateless; safe for concurrent evaluation.
EncoderPtr toy_encoder(std::uint64_t seed, int feature_dim, int patch_size,
                       double temperature = 0.07);

/// Per-image semantic attack specification: the correct label, the optional
/// explicit target label, and the free-form drift/shift/suppression prompts.
struct AttackSpecText {
    std::string true_label;
    std::optional<std::string> target_label;
    std::vector<std::string> caption_drift_prompts;
    std::vector<std::string> vqa_shift_prompts;
    std::vector<std::string> source_prompts;
};

/// Fixed prompt template for label-derived entries.
std::string label_prompt(const std::string& label);

/// Target pool: target label (if present) + drift + shift prompts.
/// Source pool: true label + source prompts. All encoded and unit norm.
/// Throws InvalidInput when either side ends up empty.
TextPools build_text_pools(const AttackSpecText& spec, const EncoderHandle& encoder);

/// Class text features in class order, via the fixed label template.
std::vector<std::vector<double>> class_prompt_features(
    const std::vector<std::string>& class_names, const EncoderHandle& encoder);

/// Factory signature for pluggable external encoder backends.
using EncoderFactory =
    std::function<EncoderPtr(const std::string& model_id, const std::string& runtime_config)>;

/// Registers a backend under a name ("torch", "onnx", ...). Intended for
/// host applications that link a model runtime into the process.
void register_encoder_backend(const std::string& backend, EncoderFactory factory);

/// Wraps a pretrained encoder behind EncoderHandle. model_id format is
/// "backend:model". Throws CapabilityError at construction when the backend
/// is not registered - never at call time.
EncoderPtr external_encoder_adapter(const std::string& model_id,
                                    const std::string& runtime_config = "");

}  // namespace xspa
