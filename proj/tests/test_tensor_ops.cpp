#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "vclab/ops.hpp"
#include "vclab/optimizer.hpp"
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

}  // namespace

TEST_CASE("matmul identity and hand cases") {
    auto eye = Tensor::from_values({2, 2}, {1, 0, 0, 1});
    auto col = Tensor::from_values({2, 1}, {3, 4});
    auto r = ops::matmul(eye, col);
    CHECK(r.values() == std::vector<double>{3, 4});

    auto row = Tensor::from_values({1, 2}, {1, 2});
    auto col2 = Tensor::from_values({2, 1}, {3, 4});
    CHECK(ops::matmul(row, col2).item() == doctest::Approx(11).epsilon(1e-15));
}

TEST_CASE("matmul shape errors name both shapes") {
    auto a = Tensor::zeros({2, 3});
    auto b = Tensor::zeros({4, 2});
    try {
        ops::matmul(a, b);
        FAIL("expected dimension error");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("[2x3]") != std::string::npos);
        CHECK(msg.find("[4x2]") != std::string::npos);
    }
}

TEST_CASE("matmul batched against flat reference") {
    Rng rng(7);
    auto a = random_tensor({2, 3, 4}, 1, false);
    auto w = random_tensor({4, 5}, 2, false);
    auto out = ops::matmul(a, w);
    REQUIRE(out.shape() == Shape{2, 3, 5});
    for (int b = 0; b < 2; ++b) {
        for (int m = 0; m < 3; ++m) {
            for (int n = 0; n < 5; ++n) {
                double want = 0;
                for (int k = 0; k < 4; ++k) {
                    want += a.values()[(b * 3 + m) * 4 + k] * w.values()[k * 5 + n];
                }
                CHECK(out.values()[(b * 3 + m) * 5 + n] == doctest::Approx(want).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("bmm matches per-batch loops, both orientations") {
    auto a = random_tensor({3, 2, 4}, 11, false);
    auto b = random_tensor({3, 4, 5}, 12, false);
    auto bt = random_tensor({3, 5, 4}, 13, false);
    auto nn = ops::bmm(a, b, false);
    auto nt = ops::bmm(a, bt, true);
    for (int g = 0; g < 3; ++g) {
        for (int m = 0; m < 2; ++m) {
            for (int n = 0; n < 5; ++n) {
                double want_nn = 0, want_nt = 0;
                for (int k = 0; k < 4; ++k) {
                    want_nn += a.values()[(g * 2 + m) * 4 + k] * b.values()[(g * 4 + k) * 5 + n];
                    want_nt += a.values()[(g * 2 + m) * 4 + k] * bt.values()[(g * 5 + n) * 4 + k];
                }
                CHECK(nn.values()[(g * 2 + m) * 5 + n] == doctest::Approx(want_nn).epsilon(1e-12));
                CHECK(nt.values()[(g * 2 + m) * 5 + n] == doctest::Approx(want_nt).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("softmax uniform, overflow safety, row sums") {
    auto flat = ops::softmax_rows(Tensor::from_values({3}, {0, 0, 0}));
    for (double v : flat.values()) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-15));

    auto big = ops::softmax_rows(Tensor::from_values({2}, {1000, 0}));
    CHECK(big.values()[0] == doctest::Approx(1.0));
    CHECK(big.values()[1] >= 0.0);
    check_finite(big, "softmax overflow case");

    // Random rows sum to 1 within 1e-12 (plain summation as the oracle).
    for (uint64_t seed = 0; seed < 50; ++seed) {
        auto x = random_tensor({4, 8}, 100 + seed, false);
        auto s = ops::softmax_rows(x);
        for (int r = 0; r < 4; ++r) {
            double sum = 0;
            for (int c = 0; c < 8; ++c) {
                const double v = s.values()[r * 8 + c];
                CHECK(v >= 0.0);
                sum += v;
            }
            CHECK(std::abs(sum - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("cross entropy: saturated, uniform, mask contract") {
    // One-hot logits with +30 on the target.
    std::vector<double> logits(16, 0.0);
    logits[5] = 30.0;
    auto saturated = ops::cross_entropy_masked(Tensor::from_values({1, 16}, logits), {5}, {1.0});
    CHECK(saturated.item() < 1e-9);

    auto uniform = ops::cross_entropy_masked(Tensor::zeros({1, 16}), {3}, {1.0});
    CHECK(uniform.item() == doctest::Approx(std::log(16.0)).epsilon(1e-12));

    // Gradient at an unmasked position is exactly zero.
    auto l = random_tensor({2, 8}, 9, true);
    auto loss = ops::cross_entropy_masked(l, {1, 2}, {0.0, 1.0});
    backward(loss);
    for (int v = 0; v < 8; ++v) CHECK(l.grad()[v] == 0.0);

    CHECK_THROWS_AS(ops::cross_entropy_masked(l, {1, 2}, {0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("shared subexpression accumulates gradient once per use") {
    auto x = Tensor::from_values({2}, {3, 5}, true);
    auto y = ops::add(x, x);  // dy/dx = 2
    backward(ops::sum_all(y));
    CHECK(x.grad()[0] == doctest::Approx(2.0));
    CHECK(x.grad()[1] == doctest::Approx(2.0));
}

TEST_CASE("ops are deterministic bit for bit") {
    auto run = [] {
        auto a = random_tensor({6, 12, 16}, 42, false);
        auto w = random_tensor({16, 16}, 43, false);
        return ops::softmax_rows(ops::matmul(ops::gelu(a), w)).values();
    };
    CHECK(run() == run());
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
    auto p = Tensor::from_values({3}, {1, 2, 3}, true);
    p.grad();  // materialize zero gradient
    AdamOptimizer opt({p});
    opt.step(1e-2);
    CHECK(p.values() == std::vector<double>{1, 2, 3});
}

TEST_CASE("adam moves parameters against the gradient") {
    auto p = Tensor::from_values({2}, {1.0, -1.0}, true);
    p.grad() = {0.5, -0.5};
    AdamOptimizer opt({p});
    opt.step(0.1);
    CHECK(p.values()[0] < 1.0);
    CHECK(p.values()[1] > -1.0);
}

TEST_CASE("cosine schedule warms up then decays to zero") {
    const double peak = 1e-3;
    CHECK(cosine_lr(peak, 0.03, 0, 1000) > 0.0);
    CHECK(cosine_lr(peak, 0.03, 29, 1000) == doctest::Approx(peak));
    CHECK(cosine_lr(peak, 0.03, 999, 1000) < 1e-5);
    CHECK(cosine_lr(peak, 0.03, 500, 1000) < peak);
}

TEST_CASE("rng streams are reproducible and distinct") {
    Rng a(123, 0), b(123, 0), c(123, 1);
    CHECK(a.next_u64() == b.next_u64());
    CHECK(a.next_u64() != c.next_u64());
    Rng d(7);
    auto idx = d.sample_indices(10, 4);
    CHECK(idx.size() == 4);
    CHECK(std::is_sorted(idx.begin(), idx.end()));
}
