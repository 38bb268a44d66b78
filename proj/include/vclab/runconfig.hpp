#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vclab/model.hpp"
#include "vclab/schedule.hpp"
#include "vclab/trainer.hpp"

namespace vclab {

// Declarative experiment configuration: flat key = value lines under
// [model] [data] [plan] [training] [diagnostics] sections. Every field
// has a default; unknown sections or keys are rejected; parse -> echo ->
// parse is lossless.
struct LabConfig {
    ModelConfig model;

    struct Data {
        std::string train;              // dataset paths (JSONL)
        std::string eval;
        std::string checkpoint;         // input for eval/sweep/probe
        std::string out_root = "runs";  // overridden by VCLAB_OUT_ROOT
        uint64_t gen_seed = 7;
        int n_train = 20000;
        int n_eval = 2000;
        int grid = 8;
        int attrs = 8;
        double redundancy = 0.5;
        std::string kinds = "lookup";  // comma list
    } data;

    struct Plan {
        std::string scheme = "single";  // named scheme, or empty to use stages
        std::string stages;             // "kind:K:S:frac;...", identity as "identity:frac"
    } plan;

    struct Training {
        long long steps = 600;
        int batch = 16;
        double lr = 1e-3;
        double warmup = 0.03;
        long long eval_every = 200;
        int eval_samples = 400;
        int final_eval_samples = 0;
        int eval_batch = 64;
        int max_new = 4;
        int system_len = 4;
        uint64_t model_seed = 1;
        uint64_t data_seed = 2;
    } training;

    struct Diagnostics {
        std::string ks = "2,4";
        std::string ss = "1,2,4,8";
        int sweep_samples = 1000;
        int probe_samples = 64;
        std::string eval_spec = "identity";
        int eval_samples = 0;
    } diagnostics;

    // Canonical text with every effective value; stable field order.
    std::string echo() const;
    // First 12 hex digits of the FNV-1a hash of echo().
    std::string run_id() const;

    StagePlan stage_plan() const;
    RunConfig run_config(const std::string& out_dir) const;

    static LabConfig parse_text(const std::string& text);
    static LabConfig parse_file(const std::string& path);
    void apply_override(const std::string& assignment);  // "section.key=value"
};

std::vector<int> parse_int_list(const std::string& text);

// Command drivers shared by the C API and tests. Each resolves an output
// directory <out_root>/<command>-<run id>, writes the effective config
// echo plus its artifacts there, and returns that directory.
std::string cmd_gen_data(LabConfig config);
std::string cmd_train(LabConfig config);
std::string cmd_eval(LabConfig config);
std::string cmd_sweep(LabConfig config);
std::string cmd_probe(LabConfig config);

}  // namespace vclab
