#include "vclab/optimizer.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vclab {

AdamOptimizer::AdamOptimizer(std::vector<Tensor> params, double beta1, double beta2, double eps)
    : params_(std::move(params)), beta1_(beta1), beta2_(beta2), eps_(eps) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto& p : params_) {
        m_.emplace_back(p.numel(), 0.0);
        v_.emplace_back(p.numel(), 0.0);
    }
}

void AdamOptimizer::step(double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (size_t i = 0; i < params_.size(); ++i) {
        auto& p = params_[i].values();
        const auto& g = params_[i].grad();
        auto& m = m_[i];
        auto& v = v_[i];
        for (size_t j = 0; j < p.size(); ++j) {
            m[j] = beta1_ * m[j] + (1.0 - beta1_) * g[j];
            v[j] = beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j];
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            p[j] -= lr * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

void AdamOptimizer::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

double cosine_lr(double peak, double warmup_frac, long long step, long long total_steps) {
    if (total_steps <= 0) throw std::invalid_argument("cosine_lr: total_steps must be positive");
    if (step < 0 || step >= total_steps) {
        throw std::out_of_range("cosine_lr: step outside [0, total_steps)");
    }
    const double warmup = warmup_frac * static_cast<double>(total_steps);
    const double s = static_cast<double>(step);
    if (warmup > 0.0 && s < warmup) return peak * (s + 1.0) / warmup;
    const double span = static_cast<double>(total_steps) - warmup;
    const double progress = span > 0.0 ? (s - warmup) / span : 1.0;
    return peak * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace vclab
