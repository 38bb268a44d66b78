#include <cmath>

#include "doctest.h"
#include "vclab/accounting.hpp"
#include "vclab/model.hpp"
#include "vclab/schedule.hpp"

using namespace vclab;

TEST_CASE("token totals reproduce the reported table rows at N=32, L=576") {
    CHECK(token_total(32, 576, 2, 8) == 3312);
    CHECK(token_total(32, 576, 16, 8) == 10368);
    CHECK(token_total(32, 576, 2, 2) == 9792);
    CHECK(token_total(32, 576, 16, 2) == 13824);
    CHECK(token_total(32, 576, 1, 64) == 855);
    CHECK(token_total(32, 576, 7, 1) == 18432);  // no compression at any layer
    CHECK_THROWS(token_total(32, 576, 33, 8));
    CHECK_THROWS(token_total(32, 576, 0, 8));
}

TEST_CASE("compression ratios land within one point of the reported percents") {
    auto pct = [](int k, int s) { return compression_ratio(32, 576, k, s).percent(); };
    CHECK(std::abs(pct(2, 8) - 557) <= 1);
    CHECK(std::abs(pct(16, 8) - 178) <= 1);
    CHECK(std::abs(pct(2, 2) - 188) <= 1);
    CHECK(std::abs(pct(16, 2) - 133) <= 1);
    CHECK(std::abs(pct(1, 64) - 2156) <= 1);
    CHECK(pct(16, 1) == 100);

    auto r = compression_ratio(32, 576, 2, 8);
    CHECK(static_cast<double>(r.num) / r.den == doctest::Approx(18432.0 / 3312.0));

    // Desk-scale spot check: N=8, L=64, K=2, S=8.
    auto desk = compression_ratio(8, 64, 2, 8);
    CHECK(token_total(8, 64, 2, 8) == 176);
    CHECK(desk.value() == doctest::Approx(512.0 / 176.0));
    CHECK(desk.percent() == 291);
}

TEST_CASE("CR is monotone: non-increasing in K, non-decreasing in S, always >= 1") {
    for (int s : {2, 4, 8, 64}) {
        double prev = 1e18;
        for (int k = 1; k <= 32; ++k) {
            const double v = compression_ratio(32, 576, k, s).value();
            CHECK(v <= prev + 1e-12);
            CHECK(v >= 1.0);
            prev = v;
        }
    }
    for (int k : {1, 2, 16}) {
        double prev = 0.0;
        for (int s : {1, 2, 4, 8, 16, 64}) {
            const double v = compression_ratio(32, 576, k, s).value();
            CHECK(v >= prev - 1e-12);
            prev = v;
        }
    }
}

TEST_CASE("percent rounding is half away from zero") {
    CHECK((Ratio{3, 2}).percent() == 150);
    CHECK((Ratio{1205, 1000}).percent() == 121);  // 120.5 rounds away
    CHECK((Ratio{1204, 1000}).percent() == 120);
}

TEST_CASE("plan averages: identity plans and the unreconciled paper values") {
    const auto single = named_scheme("single", SchemeScale::paper, 32);
    auto avg = plan_average(single, 32, 576);
    CHECK(avg.avg_tokens == doctest::Approx(18432.0));
    CHECK(avg.avg_cr_percent == doctest::Approx(100.0));

    StagePlan two_identity;
    two_identity.name = "two-identity";
    two_identity.stages = {{0.5, CompressorSpec{}}, {0.5, CompressorSpec{}}};
    auto avg2 = plan_average(two_identity, 32, 576);
    CHECK(avg2.avg_tokens == doctest::Approx(18432.0));

    // Arithmetic mean of the two-stage scheme is 10872; the paper lists
    // 10062 for the same scheme, so the flag must stay raised.
    const auto two = named_scheme("two", SchemeScale::paper, 32);
    auto avg3 = plan_average(two, 32, 576);
    CHECK(avg3.avg_tokens == doctest::Approx((3312.0 + 18432.0) / 2));
    CHECK(avg3.avg_tokens == doctest::Approx(10872.0));
    CHECK(avg3.averaging_unreconciled);

    StagePlan bad;
    bad.name = "bad";
    bad.stages = {{0.5, CompressorSpec{}}, {0.4, CompressorSpec{}}};
    CHECK_THROWS(plan_average(bad, 32, 576));
}

TEST_CASE("flops estimate: hand value, linear-regime halving, monotonicity") {
    // Desk config, T=96 at all 8 layers:
    //   per layer 24*96*128^2 + 4*96^2*128 = 37748736 + 4718592
    //   head 2*96*128*64 = 1572864
    const std::vector<long long> full(8, 96);
    const double want = 8.0 * (37748736.0 + 4718592.0) + 1572864.0;
    CHECK(flops_forward(128, 64, full) == doctest::Approx(want));
    CHECK(flops_train_step(128, 64, full) == doctest::Approx(3.0 * want));

    // With the quadratic term negligible (T << d), halving T roughly halves.
    const std::vector<long long> t16(8, 16), t8(8, 8);
    const double ratio = flops_forward(1024, 64, t8) / flops_forward(1024, 64, t16);
    CHECK(std::abs(ratio - 0.5) < 0.05);

    // Strictly monotone in each layer length.
    std::vector<long long> bumped = full;
    for (size_t i = 0; i < bumped.size(); ++i) {
        bumped[i] += 1;
        CHECK(flops_forward(128, 64, bumped) > flops_forward(128, 64, full));
        bumped[i] -= 1;
    }

    // Identity plan dominates any compressed plan.
    const auto compressed = per_layer_lengths(8, 96, 64, 2, 8);
    CHECK(flops_forward(128, 64, full) >= flops_forward(128, 64, compressed));
    CHECK_THROWS(flops_forward(128, 64, {}));
    CHECK_THROWS(flops_forward(128, 64, {0, 4}));
}

TEST_CASE("per-layer lengths follow the splice point") {
    const auto lens = per_layer_lengths(8, 96, 64, 2, 8);
    REQUIRE(lens.size() == 8);
    CHECK(lens[0] == 96);
    CHECK(lens[1] == 96);
    for (int i = 2; i < 8; ++i) CHECK(lens[static_cast<size_t>(i)] == 96 - 64 + 8);
    const auto id = per_layer_lengths(8, 96, 64, 0, 1);
    for (auto t : id) CHECK(t == 96);
}

TEST_CASE("closed-form parameter count matches the built model") {
    ModelConfig cfg;  // desk defaults: N=8, d=128, d_ff=512, vocab=64, heads=4
    const Model model = build_model(cfg, 1);
    CHECK(model.parameter_count() == param_count(cfg));

    ModelConfig tiny;
    tiny.n_layers = 2;
    tiny.d_model = 32;
    tiny.n_heads = 2;
    tiny.d_ff = 64;
    tiny.vocab_size = 16;
    tiny.max_seq = 48;
    tiny.visual_len = 16;
    tiny.d_patch = 4;
    tiny.n_attrs = 4;
    CHECK(build_model(tiny, 2).parameter_count() == param_count(tiny));
}

TEST_CASE("compute report renders both text and JSON") {
    const auto r = compute_report(32, 576, 2, 8, 128, 64, 32);
    CHECK(r.tokens == 3312);
    CHECK(r.cr.percent() == 557);
    const auto text = r.to_text();
    CHECK(text.find("tokens=3312") != std::string::npos);
    CHECK(text.find("557%") != std::string::npos);
    const auto json = r.to_json();
    CHECK(json.find("\"cr_percent\":557") != std::string::npos);
}
