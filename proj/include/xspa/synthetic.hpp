#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xspa/encoder.hpp"
#include "xspa/grid.hpp"

namespace xspa {

/// Seeded desk-scale zero-shot task: per-class prototype images crafted by
/// gradient ascent on the class margin, plus noisy copies as the dataset.
/// Clean top-1 accuracy is high by construction.
struct SyntheticTask {
    std::vector<std::string> class_names;
    std::vector<Grid> images;
    std::vector<int> labels;
    std::vector<std::string> image_ids;
};

struct SyntheticTaskOptions {
    int num_classes = 8;
    int images_per_class = 8;
    int image_size = 64;
    double margin_target = 0.25;  // cosine margin the prototypes aim for
    int max_craft_steps = 400;
    double craft_step_size = 0.02;
    double noise_std = 0.02;
    std::uint64_t seed = 11;
};

SyntheticTask make_synthetic_task(const EncoderHandle& encoder,
                                  const SyntheticTaskOptions& options = {});

}  // namespace xspa
