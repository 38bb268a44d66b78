#include "vclab/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

#include "vclab/rng.hpp"

namespace vclab {

double grad_check(const std::function<Tensor()>& f, Tensor x, double h,
                  int max_entries, uint64_t probe_seed) {
    if (!(h >= 1e-8 && h <= 1e-4)) {
        throw std::invalid_argument("grad_check: step must be in [1e-8, 1e-4]");
    }
    Tensor out = f();
    if (out.numel() != 1) {
        throw std::invalid_argument("grad_check: f must return a scalar, got shape " +
                                    shape_str(out.shape()));
    }
    x.zero_grad();
    backward(out);
    const std::vector<double> analytic = x.grad();

    std::vector<size_t> probe;
    const size_t n = x.numel();
    if (max_entries > 0 && static_cast<size_t>(max_entries) < n) {
        Rng rng(probe_seed, 0x67726164);
        auto idx = rng.sample_indices(static_cast<int>(n), max_entries);
        probe.assign(idx.begin(), idx.end());
    } else {
        probe.resize(n);
        for (size_t i = 0; i < n; ++i) probe[i] = i;
    }

    double worst = 0.0;
    NoGradGuard no_grad;
    for (size_t i : probe) {
        const double saved = x.values()[i];
        x.values()[i] = saved + h;
        const double up = f().item();
        x.values()[i] = saved - h;
        const double down = f().item();
        x.values()[i] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double err = std::abs(analytic[i] - numeric) /
                           std::max(1.0, std::abs(analytic[i]));
        worst = err > worst ? err : worst;
    }
    return worst;
}

}  // namespace vclab
