#include "vclab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vclab {

namespace {

uint64_t splitmix64(uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(uint64_t seed, uint64_t stream) {
    // Mix seed and stream through splitmix64 to fill the xoshiro256++ state.
    uint64_t s = seed ^ (0x6a09e667f3bcc909ULL + stream * 0x3c6ef372fe94f82bULL);
    for (auto& w : state_) w = splitmix64(s);
}

uint64_t Rng::next_u64() {
    // xoshiro256++
    uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

uint64_t Rng::uniform_below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::uniform_below: n must be positive");
    uint64_t threshold = (0 - n) % n;
    for (;;) {
        uint64_t r = next_u64();
        if (r >= threshold) return r % n;
    }
}

double Rng::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    // Box-Muller on (0,1] x [0,1).
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    cached_normal_ = r * std::sin(theta);
    has_cached_normal_ = true;
    return r * std::cos(theta);
}

std::vector<int> Rng::sample_indices(int n, int k) {
    if (k < 0 || k > n) throw std::invalid_argument("Rng::sample_indices: k out of range");
    // Partial Fisher-Yates over an index vector, then sort the prefix.
    std::vector<int> idx(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = i;
    for (int i = 0; i < k; ++i) {
        int j = i + static_cast<int>(uniform_below(static_cast<uint64_t>(n - i)));
        std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
    }
    idx.resize(static_cast<size_t>(k));
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace vclab
