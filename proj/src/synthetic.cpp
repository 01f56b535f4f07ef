#include "xspa/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "xspa/rng.hpp"

namespace xspa {

namespace {

const char* kClassWords[] = {"airplane", "bicycle", "bird",  "boat", "car",   "cat",
                             "dog",      "horse",   "house", "lamp", "piano", "river",
                             "ship",     "tiger",   "train", "tree"};

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// cos margin of class k against the best competing class
double class_margin(const std::vector<double>& v,
                    const std::vector<std::vector<double>>& class_feats, int k, int* runner_up) {
    double best_other = -2.0;
    int best_j = -1;
    for (std::size_t j = 0; j < class_feats.size(); ++j) {
        if (static_cast<int>(j) == k) continue;
        const double c = cosine(v, class_feats[j]);
        if (c > best_other) {
            best_other = c;
            best_j = static_cast<int>(j);
        }
    }
    if (runner_up) *runner_up = best_j;
    return cosine(v, class_feats[k]) - best_other;
}

}  // namespace

SyntheticTask make_synthetic_task(const EncoderHandle& encoder,
                                  const SyntheticTaskOptions& options) {
    if (options.num_classes < 2) throw InvalidInput("make_synthetic_task: need >= 2 classes");
    if (options.images_per_class < 1)
        throw InvalidInput("make_synthetic_task: need >= 1 image per class");

    SyntheticTask task;
    for (int k = 0; k < options.num_classes; ++k) {
        if (k < static_cast<int>(std::size(kClassWords)))
            task.class_names.emplace_back(kClassWords[k]);
        else
            task.class_names.emplace_back("object" + std::to_string(k));
    }
    const auto class_feats = class_prompt_features(task.class_names, encoder);

    const int side = options.image_size;
    for (int k = 0; k < options.num_classes; ++k) {
        // craft a prototype whose embedding separates class k by gradient
        // ascent on the cosine margin
        Rng init_rng(derive_seed(options.seed, "proto" + std::to_string(k)));
        Grid proto(3, side, side, 0.5);
        for (double& v : proto.raw()) v = std::clamp(v + 0.05 * init_rng.gauss(), 0.0, 1.0);

        for (int step = 0; step < options.max_craft_steps; ++step) {
            const std::vector<double> v = encoder.encode_image(proto);
            int runner_up = -1;
            const double margin = class_margin(v, class_feats, k, &runner_up);
            if (margin >= options.margin_target) break;
            std::vector<double> upstream(class_feats[k].size());
            for (std::size_t i = 0; i < upstream.size(); ++i)
                upstream[i] = class_feats[k][i] - class_feats[runner_up][i];
            const Grid g = encoder.encode_image_vjp(proto, upstream);
            const double scale = max_abs(g);
            if (scale < 1e-15) break;
            for (std::size_t i = 0; i < proto.size(); ++i)
                proto.raw()[i] = std::clamp(
                    proto.raw()[i] + options.craft_step_size * g.raw()[i] / scale, 0.0, 1.0);
        }

        for (int i = 0; i < options.images_per_class; ++i) {
            Rng noise_rng(derive_seed(options.seed, "img" + std::to_string(k) + "_" + std::to_string(i)));
            Grid img = proto;
            for (double& v : img.raw())
                v = std::clamp(v + options.noise_std * noise_rng.gauss(), 0.0, 1.0);
            task.images.push_back(std::move(img));
            task.labels.push_back(k);
            task.image_ids.push_back("img_" + std::to_string(k) + "_" + std::to_string(i));
        }
    }
    return task;
}

}  // namespace xspa
