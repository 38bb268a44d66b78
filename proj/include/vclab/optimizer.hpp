#pragma once

#include <vector>

#include "vclab/tensor.hpp"

namespace vclab {

// Adam with bias correction. State is indexed by parameter position, so
// the parameter list must stay stable across steps.
class AdamOptimizer {
public:
    explicit AdamOptimizer(std::vector<Tensor> params, double beta1 = 0.9,
                           double beta2 = 0.999, double eps = 1e-8);

    // One update from the gradients currently stored on the parameters.
    void step(double lr);
    void zero_grad();

    long long steps_taken() const { return t_; }

private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    double beta1_, beta2_, eps_;
    long long t_ = 0;
};

// Cosine decay to zero with a linear warmup prefix. step in [0, total).
double cosine_lr(double peak, double warmup_frac, long long step, long long total_steps);

}  // namespace vclab
