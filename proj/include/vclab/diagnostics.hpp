#pragma once

#include <string>
#include <vector>

#include "vclab/model.hpp"
#include "vclab/tasks.hpp"
#include "vclab/trainer.hpp"

namespace vclab {

struct SweepPoint {
    int layer = 0;
    int stride = 1;
    // Layer-summed visual tokens under compression over the uncompressed
    // total, as a percent (equals 100/CR); the x-axis of the sweep.
    double retained_pct = 100.0;
    double cr_pct = 100.0;
    long long tokens = 0;
    double accuracy = 0.0;
    bool degenerate = false;  // layer == n_layers: nothing downstream shrinks
};

// Inference-time average-pooling sweep over the (layer, stride) grid;
// one evaluation per point, sorted by retained percent.
std::vector<SweepPoint> compression_sweep(const Model& model, const std::vector<QASample>& samples,
                                          const std::vector<int>& layers,
                                          const std::vector<int>& strides,
                                          const EvalOptions& options);

std::string sweep_csv(const std::vector<SweepPoint>& points);

struct AttentionProfile {
    // Mean over heads and samples of the attention mass the first
    // answer-role position sends into each span, per layer.
    std::vector<double> visual_mass;
    std::vector<double> system_mass;
    long long n_samples = 0;
};

// Teacher-forced capture probe with compression off.
AttentionProfile attention_probe(const Model& model, const std::vector<QASample>& samples,
                                 int max_samples, int system_len);

std::string profile_csv(const AttentionProfile& profile);

}  // namespace vclab
