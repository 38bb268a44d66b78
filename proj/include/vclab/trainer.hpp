#pragma once

#include <map>
#include <string>
#include <vector>

#include "vclab/model.hpp"
#include "vclab/schedule.hpp"
#include "vclab/tasks.hpp"

namespace vclab {

struct RunConfig {
    ModelConfig model;
    std::string train_path;
    std::string eval_path;
    StagePlan plan;
    long long total_steps = 600;
    int batch_size = 16;
    double lr_peak = 1e-3;
    double warmup_frac = 0.03;
    long long eval_every = 200;     // periodic eval cadence; 0 disables
    int eval_max_samples = 400;     // subset for periodic evals
    int final_eval_max_samples = 0; // 0 = whole eval set
    int eval_batch = 64;
    int max_new = 4;
    int system_len = 4;
    uint64_t model_seed = 1;
    uint64_t data_seed = 2;
    std::string out_dir;  // empty: keep metrics in memory only

    void validate() const;
};

struct StepRecord {
    long long step = 0;
    int stage = 0;  // 1-based
    std::string spec;
    double loss = 0.0;
    double flops_cum = 0.0;
};

struct EvalResult {
    std::map<std::string, double> per_kind;
    std::map<std::string, long long> per_kind_n;
    double overall = 0.0;
    long long n = 0;
};

struct EvalRecord {
    long long step = 0;
    std::string spec;
    bool final_eval = false;
    EvalResult result;
};

struct RunMetrics {
    std::vector<StepRecord> steps;
    std::vector<EvalRecord> evals;
    double wall_seconds = 0.0;  // reported separately; never in metric files
};

struct TrainResult {
    Model model;
    RunMetrics metrics;
};

// Staged training over the answer-masked objective. Batches follow a
// seeded shuffle; the compressor at each step comes from spec_at_step;
// optimizer state and the cosine schedule run continuously across stage
// boundaries. Checkpoints land at stage boundaries and at the end when
// out_dir is set. Deterministic for fixed seeds; wall clock is written to
// its own file so metric files stay byte-identical across reruns.
TrainResult train(const RunConfig& run);

struct EvalOptions {
    int system_len = 4;
    int max_new = 4;
    int batch = 64;
    int max_samples = 0;  // 0 = all
};

// Greedy decoding with exact-match scoring per question kind.
EvalResult evaluate(const Model& model, const std::vector<QASample>& samples,
                    const CompressorSpec& spec, const EvalOptions& options);

// Helpers shared with the acceptance suite.
std::string metrics_csv(const RunMetrics& metrics);
std::string eval_record_json(const EvalRecord& record);

}  // namespace vclab
