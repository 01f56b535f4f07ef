// xspa command line: attack, eval, sweep, mask-preview

#include <cstdio>
#include <filesystem>
#include <string>

#include "CLI11.hpp"

#include "xspa/config.hpp"
#include "xspa/runner.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out = "out";
    int workers = 0;            // 0: keep config value
    long long seed = -1;        // <0: keep config value
    std::string encoder;        // empty: keep config value
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_out = true) {
    cmd->add_option("--config", opts.config_path, "run configuration file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    if (with_out) cmd->add_option("--out", opts.out, "output directory");
    cmd->add_option("--workers", opts.workers, "parallel workers (overrides config)");
    cmd->add_option("--seed", opts.seed, "master seed (overrides config)");
    cmd->add_option("--encoder", opts.encoder,
                    "encoder override: 'toy' or an external model id 'backend:model'");
}

xspa::RunConfig load_with_overrides(const CommonOpts& opts) {
    xspa::RunConfig config = xspa::load_config(opts.config_path);
    if (opts.workers > 0) config.workers = opts.workers;
    if (opts.seed >= 0) config.attack.rng_seed = static_cast<std::uint64_t>(opts.seed);
    if (!opts.encoder.empty()) {
        if (opts.encoder == "toy") {
            config.encoder.kind = "toy";
        } else {
            config.encoder.kind = "external";
            config.encoder.model_id = opts.encoder;
        }
    }
    return config;
}

int report(const xspa::CommandOutcome& outcome) {
    for (const auto& err : outcome.errors) std::fprintf(stderr, "error: %s\n", err.c_str());
    if (!outcome.run_dir.empty()) std::printf("run dir: %s\n", outcome.run_dir.string().c_str());
    if (outcome.manifest)
        std::printf("manifest: %s\n", (outcome.run_dir / "manifest.json").string().c_str());
    return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"XSPA: X-shaped sparse adversarial attacks on image-text encoders"};
    app.require_subcommand(1);

    CommonOpts attack_opts, eval_opts, sweep_opts, preview_opts;
    std::string attack_in, eval_clean, eval_adv, sweep_in, preview_out = "mask_preview.png";

    CLI::App* attack = app.add_subcommand("attack", "craft adversarial images for a directory");
    add_common(attack, attack_opts);
    attack->add_option("--in", attack_in, "input image directory (with labels.json)")
        ->required()
        ->check(CLI::ExistingDirectory);

    CLI::App* eval = app.add_subcommand("eval", "evaluate clean vs adversarial image sets");
    add_common(eval, eval_opts);
    eval->add_option("--clean", eval_clean, "clean image directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    eval->add_option("--adv", eval_adv, "adversarial image directory")
        ->required()
        ->check(CLI::ExistingDirectory);

    CLI::App* sweep = app.add_subcommand("sweep", "run the configured ablation sweep");
    add_common(sweep, sweep_opts);
    sweep->add_option("--in", sweep_in, "input image directory (with labels.json)")
        ->required()
        ->check(CLI::ExistingDirectory);

    CLI::App* preview = app.add_subcommand("mask-preview", "render the mask and print coverage");
    add_common(preview, preview_opts, false);
    preview->add_option("--out", preview_out, "output PNG path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*attack)
            return report(xspa::cmd_attack(load_with_overrides(attack_opts), attack_in,
                                           attack_opts.out));
        if (*eval)
            return report(xspa::cmd_eval(load_with_overrides(eval_opts), eval_clean, eval_adv,
                                         eval_opts.out));
        if (*sweep)
            return report(xspa::cmd_sweep(load_with_overrides(sweep_opts), sweep_in,
                                          sweep_opts.out));
        if (*preview)
            return report(xspa::cmd_mask_preview(load_with_overrides(preview_opts), preview_out));
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
