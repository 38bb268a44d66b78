#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace vclab {

// Deterministic RNG used everywhere randomness is needed. We do not use
// <random> distributions because their output is implementation-defined;
// this generator produces the same stream on every platform.
//
// Streams are derived from (seed, stream) pairs so independent consumers
// (per-sample generation, per-tensor init, data order) never share state.
class Rng {
public:
    explicit Rng(uint64_t seed, uint64_t stream = 0);

    uint64_t next_u64();

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform();

    // Uniform integer in [0, n), unbiased (rejection sampling). n > 0.
    uint64_t uniform_below(uint64_t n);

    // Standard normal via Box-Muller; one spare value is cached.
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct indices from [0, n), returned in ascending order.
    std::vector<int> sample_indices(int n, int k);

private:
    uint64_t state_[4];
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

}  // namespace vclab
