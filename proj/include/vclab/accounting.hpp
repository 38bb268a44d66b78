#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vclab {

struct StagePlan;
struct ModelConfig;

// Exact rational with a rounded-percent view. Rounding is half away from
// zero; reported tables round the same way but are internally inconsistent
// by one point, so reproduction tests allow +/-1.
struct Ratio {
    long long num = 0;
    long long den = 1;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    long long percent() const;  // round(100 * num / den), half away from zero
};

// Layer-summed visual-token count when compression with stride S runs
// after layer K of an N-layer stack: K*L + (N-K)*ceil(L/S).
long long token_total(int n_layers, int visual_len, int layer, int stride);

// N*L / token_total. Always >= 1.
Ratio compression_ratio(int n_layers, int visual_len, int layer, int stride);

struct PlanAverage {
    double avg_tokens = 0.0;
    double avg_cr_percent = 0.0;
    // The reported stage-averaged token counts do not match the arithmetic
    // mean of per-stage totals and their averaging method is unspecified;
    // consumers print a note when this is set.
    bool averaging_unreconciled = true;
};

PlanAverage plan_average(const StagePlan& plan, int n_layers, int visual_len);

// Forward-pass FLOPs estimate for one sequence: per layer 24*T*d^2 +
// 4*T^2*d over the given per-layer lengths, plus 2*T*d*vocab for the
// output head at the final length. An estimate, not a profiler match.
double flops_forward(int d_model, int vocab_size, const std::vector<long long>& per_layer_lengths);

double flops_train_step(int d_model, int vocab_size,
                        const std::vector<long long>& per_layer_lengths);  // 3x forward

// Closed-form trainable+frozen parameter count for the model family built
// by build_model; kept here so the model can be checked against it.
long long param_count(const ModelConfig& config);

// Per-layer sequence lengths for a prompt of total length seq_len whose
// visual span compresses from visual_len to ceil(visual_len/stride) after
// layer `layer` (identity when stride==1 or layer==0).
std::vector<long long> per_layer_lengths(int n_layers, long long seq_len, int visual_len,
                                         int layer, int stride);

struct ComputeReport {
    int n_layers = 0;
    int visual_len = 0;
    int layer = 0;
    int stride = 1;
    long long tokens = 0;       // layer-summed visual tokens
    long long tokens_base = 0;  // N*L
    Ratio cr;
    double flops = 0.0;  // forward estimate at text_len + visual tokens
    double flops_base = 0.0;

    std::string to_text() const;
    std::string to_json() const;
};

ComputeReport compute_report(int n_layers, int visual_len, int layer, int stride, int d_model,
                             int vocab_size, int text_len);

}  // namespace vclab
