// vclab experiment runner. Links the shared C API only.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vclab.h"

namespace {

// Prints the held string and releases it.
struct OwnedString {
    char* value = nullptr;
    ~OwnedString() { vclab_string_free(value); }
};

int map_exit(int status) {
    if (status == VCLAB_OK) return 0;
    std::fprintf(stderr, "error: %s\n", vclab_last_error());
    return status == VCLAB_ERR_INVALID ? 2 : 1;
}

struct CommandArgs {
    std::string config;
    std::vector<std::string> overrides;
    long long seed = -1;
    std::string out_root;

    std::vector<std::string> finalize(bool with_gen_seed) const {
        std::vector<std::string> out = overrides;
        if (seed >= 0) {
            out.push_back("training.model_seed=" + std::to_string(seed));
            out.push_back("training.data_seed=" + std::to_string(seed));
            if (with_gen_seed) out.push_back("data.gen_seed=" + std::to_string(seed));
        }
        if (!out_root.empty()) out.push_back("data.out_root=" + out_root);
        return out;
    }
};

void add_common(CLI::App* cmd, CommandArgs& args) {
    cmd->add_option("--config", args.config, "configuration file")->required();
    cmd->add_option("--set", args.overrides, "override as section.key=value (repeatable)");
    cmd->add_option("--seed", args.seed, "override model/data/generation seeds at once");
    cmd->add_option("--out-root", args.out_root, "output root (also via VCLAB_OUT_ROOT)");
}

std::vector<const char*> to_argv(const std::vector<std::string>& v) {
    std::vector<const char*> out;
    out.reserve(v.size());
    for (const auto& s : v) out.push_back(s.c_str());
    return out;
}

// "K=2,S=8" or "kind=avg_pool,K=2,S=8" or already "avg_pool:2:8".
std::string normalize_spec(const std::string& text) {
    if (text.find('=') == std::string::npos) return text;
    std::string kind = "avg_pool", layer, stride;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
        if (key == "K" || key == "k") layer = val;
        else if (key == "S" || key == "s") stride = val;
        else if (key == "kind") kind = val;
    }
    if (layer.empty() || stride.empty()) return text;
    return kind + ":" + layer + ":" + stride;
}

int run_command(const CommandArgs& args, bool with_gen_seed,
                int (*fn)(const char*, const char* const*, size_t, char**)) {
    if (!std::filesystem::exists(args.config)) {
        std::fprintf(stderr, "error: config not found: %s\n", args.config.c_str());
        return 2;
    }
    const auto overrides = args.finalize(with_gen_seed);
    const auto argv = to_argv(overrides);
    OwnedString dir;
    const int rc = fn(args.config.c_str(), argv.data(), argv.size(), &dir.value);
    if (rc != VCLAB_OK) return map_exit(rc);
    std::printf("output: %s\n", dir.value);

    // Seeds come from the effective config so overrides are reflected.
    OwnedString echo;
    if (vclab_config_render(args.config.c_str(), argv.data(), argv.size(), &echo.value) ==
        VCLAB_OK) {
        std::string text(echo.value);
        for (const char* key : {"model_seed", "data_seed", "gen_seed"}) {
            const auto pos = text.find(std::string(key) + " = ");
            if (pos == std::string::npos) continue;
            const auto end = text.find('\n', pos);
            std::printf("%s\n", text.substr(pos, end - pos).c_str());
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vclab: visual-token compression laboratory"};
    app.require_subcommand(1);
    app.set_version_flag("--version", vclab_version());

    // crcalc
    auto* crcalc = app.add_subcommand("crcalc", "token and compression-ratio accounting");
    int n_layers = 32, visual_len = 576, layer = 2, stride = 8;
    int d_model = 128, vocab = 64, text_len = 10;
    bool as_json = false, paper_scale = true;
    std::string scheme;
    crcalc->add_option("-N,--n-layers", n_layers, "transformer layer count");
    crcalc->add_option("-L,--visual-len", visual_len, "visual token count");
    crcalc->add_option("-K,--layer", layer, "compression layer");
    crcalc->add_option("-S,--stride", stride, "pooling stride");
    crcalc->add_option("--d-model", d_model, "model width for the FLOPs estimate");
    crcalc->add_option("--vocab", vocab, "vocabulary size for the FLOPs estimate");
    crcalc->add_option("--text-len", text_len, "non-visual tokens for the FLOPs estimate");
    crcalc->add_flag("--json", as_json, "emit JSON");
    crcalc->add_option("--scheme", scheme, "print per-stage rows of a named scheme");
    crcalc->add_flag("--paper-scale,!--desk-scale", paper_scale,
                     "scheme layers at paper scale (default) or desk scale");

    CommandArgs gen_args, train_args, eval_args, sweep_args, probe_args;
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic grid-QA dataset");
    add_common(gen, gen_args);

    auto* train = app.add_subcommand("train", "run a staged training schedule");
    add_common(train, train_args);
    std::string train_scheme;
    long long train_steps = -1;
    train->add_option("--scheme", train_scheme, "named scheme override");
    train->add_option("--steps", train_steps, "total optimizer steps override");

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    add_common(eval, eval_args);
    std::string eval_spec, eval_ckpt;
    eval->add_option("--spec", eval_spec, "compressor spec, e.g. K=2,S=8 or avg_pool:2:8");
    eval->add_option("--checkpoint", eval_ckpt, "checkpoint path override");

    auto* sweep = app.add_subcommand("sweep", "inference-time compression sweep");
    add_common(sweep, sweep_args);
    std::string sweep_ks, sweep_ss, sweep_ckpt;
    sweep->add_option("--Ks", sweep_ks, "comma list of layers");
    sweep->add_option("--Ss", sweep_ss, "comma list of strides");
    sweep->add_option("--checkpoint", sweep_ckpt, "checkpoint path override");

    auto* probe = app.add_subcommand("probe", "attention-to-spans profile");
    add_common(probe, probe_args);
    std::string probe_ckpt;
    int probe_samples = -1;
    probe->add_option("--checkpoint", probe_ckpt, "checkpoint path override");
    probe->add_option("--samples", probe_samples, "probe sample budget");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (crcalc->parsed()) {
        OwnedString text;
        int rc;
        if (!scheme.empty()) {
            rc = vclab_scheme_report(scheme.c_str(), n_layers, visual_len, paper_scale ? 1 : 0,
                                     as_json ? 1 : 0, &text.value);
        } else {
            rc = vclab_crcalc_report(n_layers, visual_len, layer, stride, d_model, vocab,
                                     text_len, as_json ? 1 : 0, &text.value);
        }
        if (rc != VCLAB_OK) return map_exit(rc);
        std::printf("%s\n", text.value);
        return 0;
    }
    if (gen->parsed()) return run_command(gen_args, true, vclab_cmd_gen_data);
    if (train->parsed()) {
        if (!train_scheme.empty()) train_args.overrides.push_back("plan.scheme=" + train_scheme);
        if (train_steps >= 0) {
            train_args.overrides.push_back("training.steps=" + std::to_string(train_steps));
        }
        return run_command(train_args, false, vclab_cmd_train);
    }
    if (eval->parsed()) {
        if (!eval_spec.empty()) {
            eval_args.overrides.push_back("diagnostics.eval_spec=" + normalize_spec(eval_spec));
        }
        if (!eval_ckpt.empty()) eval_args.overrides.push_back("data.checkpoint=" + eval_ckpt);
        return run_command(eval_args, false, vclab_cmd_eval);
    }
    if (sweep->parsed()) {
        if (!sweep_ks.empty()) sweep_args.overrides.push_back("diagnostics.ks=" + sweep_ks);
        if (!sweep_ss.empty()) sweep_args.overrides.push_back("diagnostics.ss=" + sweep_ss);
        if (!sweep_ckpt.empty()) sweep_args.overrides.push_back("data.checkpoint=" + sweep_ckpt);
        return run_command(sweep_args, false, vclab_cmd_sweep);
    }
    if (probe->parsed()) {
        if (!probe_ckpt.empty()) probe_args.overrides.push_back("data.checkpoint=" + probe_ckpt);
        if (probe_samples >= 0) {
            probe_args.overrides.push_back("diagnostics.probe_samples=" +
                                           std::to_string(probe_samples));
        }
        return run_command(probe_args, false, vclab_cmd_probe);
    }
    return 2;
}
