#include <cmath>

#include "doctest.h"
#include "vclab/gradcheck.hpp"
#include "vclab/ops.hpp"
#include "vclab/rng.hpp"
#include "vclab/tensor.hpp"

using namespace vclab;

namespace {

Tensor random_tensor(const Shape& shape, uint64_t seed, bool requires_grad = true) {
    Rng rng(seed);
    std::vector<double> v(shape_numel(shape));
    for (auto& x : v) x = rng.normal();
    return Tensor::from_values(shape, std::move(v), requires_grad);
}

constexpr double kTol = 1e-4;
constexpr double kStep = 1e-6;

}  // namespace

TEST_CASE("grad_check calibrations: sum of squares and constants") {
    auto x = Tensor::from_values({3}, {1, 2, 3}, true);
    // f = sum(x^2), analytic gradient 2x.
    CHECK(grad_check([&] { return ops::sum_all(ops::mul(x, x)); }, x, 1e-6) < 1e-8);
    CHECK(grad_check([&] { return ops::scale(ops::sum_all(ops::mul(x, x)), 0.0); }, x, 1e-6) <
          1e-8);
    CHECK_THROWS(grad_check([&] { return ops::mul(x, x); }, x, 1e-6));
    CHECK_THROWS(grad_check([&] { return ops::sum_all(x); }, x, 1e-2));
}

TEST_CASE("matmul gradients match finite differences for both inputs") {
    // The spec's 3x4 by 4x2 case plus varied shapes, 100+ seeds in all.
    for (uint64_t seed = 0; seed < 40; ++seed) {
        auto a = random_tensor({3, 4}, 1000 + seed);
        auto w = random_tensor({4, 2}, 2000 + seed);
        auto f = [&] { return ops::sum_all(ops::matmul(a, w)); };
        CHECK(grad_check(f, a, kStep) < kTol);
        CHECK(grad_check(f, w, kStep) < kTol);
    }
    for (uint64_t seed = 0; seed < 20; ++seed) {
        auto a = random_tensor({2, 3, 5}, 3000 + seed);
        auto w = random_tensor({5, 4}, 4000 + seed);
        auto f = [&] { return ops::sum_all(ops::gelu(ops::matmul(a, w))); };
        CHECK(grad_check(f, a, kStep) < kTol);
        CHECK(grad_check(f, w, kStep) < kTol);
    }
}

TEST_CASE("bmm gradients, both orientations") {
    for (uint64_t seed = 0; seed < 15; ++seed) {
        auto a = random_tensor({2, 3, 4}, 100 + seed);
        auto b = random_tensor({2, 4, 3}, 200 + seed);
        auto bt = random_tensor({2, 5, 4}, 300 + seed);
        auto f_nn = [&] { return ops::sum_all(ops::bmm(a, b, false)); };
        auto f_nt = [&] { return ops::sum_all(ops::bmm(a, bt, true)); };
        CHECK(grad_check(f_nn, a, kStep) < kTol);
        CHECK(grad_check(f_nn, b, kStep) < kTol);
        CHECK(grad_check(f_nt, a, kStep) < kTol);
        CHECK(grad_check(f_nt, bt, kStep) < kTol);
    }
}

TEST_CASE("elementwise and norm gradients over random shapes") {
    for (uint64_t seed = 0; seed < 25; ++seed) {
        Rng shape_rng(seed);
        const int r = 1 + static_cast<int>(shape_rng.uniform_below(5));
        const int c = 2 + static_cast<int>(shape_rng.uniform_below(7));
        auto x = random_tensor({r, c}, 500 + seed);
        auto y = random_tensor({r, c}, 600 + seed);
        auto gain = random_tensor({c}, 700 + seed);

        CHECK(grad_check([&] { return ops::sum_all(ops::mul(ops::add(x, y), y)); }, x, kStep) <
              kTol);
        CHECK(grad_check([&] { return ops::sum_all(ops::mul(ops::add(x, y), y)); }, y, kStep) <
              kTol);
        CHECK(grad_check([&] { return ops::sum_all(ops::gelu(x)); }, x, kStep) < kTol);
        auto f_norm = [&] { return ops::sum_all(ops::mul(ops::rmsnorm(x, gain), y)); };
        CHECK(grad_check(f_norm, x, kStep) < kTol);
        CHECK(grad_check(f_norm, gain, kStep) < kTol);
    }
}

TEST_CASE("softmax and masked cross entropy gradients") {
    for (uint64_t seed = 0; seed < 25; ++seed) {
        auto x = random_tensor({3, 6}, 800 + seed);
        auto w = random_tensor({3, 6}, 900 + seed, false);
        auto f_sm = [&] { return ops::sum_all(ops::mul(ops::softmax_rows(x), w)); };
        CHECK(grad_check(f_sm, x, kStep) < kTol);

        Rng trng(42 + seed);
        std::vector<int> targets(3);
        for (auto& t : targets) t = static_cast<int>(trng.uniform_below(6));
        std::vector<double> mask = {1.0, 0.0, trng.uniform() < 0.5 ? 1.0 : 2.0};
        auto f_ce = [&] { return ops::cross_entropy_masked(x, targets, mask); };
        CHECK(grad_check(f_ce, x, kStep) < kTol);
    }
}

TEST_CASE("embedding scatter and row-scaling gradients") {
    for (uint64_t seed = 0; seed < 15; ++seed) {
        auto table = random_tensor({5, 4}, 1100 + seed);
        std::vector<int> ids = {0, 3, 3, 1, 4, 0};  // repeats exercise accumulation
        std::vector<double> weights = {1.0, 0.0, 0.5, 1.0, 2.0, 1.0};
        auto f = [&] {
            return ops::sum_all(
                ops::gelu(ops::mul_rows(ops::embedding(table, ids, 2, 3), weights)));
        };
        CHECK(grad_check(f, table, kStep) < kTol);
    }
}

TEST_CASE("split/merge heads round trip and gradients") {
    auto x = random_tensor({2, 3, 8}, 77);
    auto round = ops::merge_heads(ops::split_heads(x, 4), 2);
    CHECK(round.values() == x.values());
    auto w = random_tensor({2, 3, 8}, 78, false);
    auto f = [&] {
        return ops::sum_all(ops::mul(ops::merge_heads(ops::split_heads(x, 4), 2), w));
    };
    CHECK(grad_check(f, x, kStep) < kTol);
}
