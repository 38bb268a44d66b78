#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "vclab/compressor.hpp"
#include "vclab/rng.hpp"

using namespace vclab;

namespace {

std::vector<double> random_span(int len, int channels, uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(static_cast<size_t>(len) * channels);
    for (auto& x : v) x = rng.normal();
    return v;
}

// Independent two-loop pooling reference.
std::vector<double> pool_reference(const std::vector<double>& span, int len, int channels,
                                   int stride) {
    const int l_out = (len + stride - 1) / stride;
    std::vector<double> out(static_cast<size_t>(l_out) * channels, 0.0);
    for (int j = 0; j < l_out; ++j) {
        const int begin = j * stride;
        const int end = std::min(begin + stride, len);
        for (int c = 0; c < channels; ++c) {
            double sum = 0.0;
            for (int i = begin; i < end; ++i) sum += span[static_cast<size_t>(i) * channels + c];
            out[static_cast<size_t>(j) * channels + c] = sum / (end - begin);
        }
    }
    return out;
}

CompressorSpec spec_of(CompressorKind kind, int stride, uint64_t seed = 1) {
    CompressorSpec s;
    s.kind = kind;
    s.layer = 1;
    s.stride = stride;
    s.seed = seed;
    return s;
}

}  // namespace

TEST_CASE("avg_pool window means and partial final window") {
    std::vector<double> span = {1, 3, 5, 7};
    auto r = avg_pool(span.data(), 4, 1, 2);
    CHECK(r.values == std::vector<double>{2, 6});

    std::vector<double> five = {1, 2, 3, 4, 10};
    auto r5 = avg_pool(five.data(), 5, 1, 2);
    REQUIRE(r5.l_out() == 3);
    CHECK(r5.values[2] == doctest::Approx(10.0));  // lone element in the last window
    CHECK(r5.source_map[2] == std::vector<int>{4});
}

TEST_CASE("avg_pool equals the two-loop reference on random spans") {
    for (uint64_t seed = 0; seed < 30; ++seed) {
        Rng shape_rng(seed);
        const int len = 1 + static_cast<int>(shape_rng.uniform_below(40));
        const int channels = 1 + static_cast<int>(shape_rng.uniform_below(6));
        const int stride = 1 + static_cast<int>(shape_rng.uniform_below(9));
        auto span = random_span(len, channels, 500 + seed);
        auto got = avg_pool(span.data(), len, channels, stride);
        auto want = pool_reference(span, len, channels, stride);
        REQUIRE(got.values.size() == want.size());
        for (size_t i = 0; i < want.size(); ++i) {
            CHECK(std::abs(got.values[i] - want[i]) <= 1e-12);
        }
    }
}

TEST_CASE("avg_pool commutes with channel permutation") {
    const int len = 9, channels = 5, stride = 4;
    auto span = random_span(len, channels, 99);
    std::vector<int> perm = {3, 0, 4, 1, 2};
    std::vector<double> permuted(span.size());
    for (int i = 0; i < len; ++i) {
        for (int c = 0; c < channels; ++c) {
            permuted[static_cast<size_t>(i) * channels + c] =
                span[static_cast<size_t>(i) * channels + perm[static_cast<size_t>(c)]];
        }
    }
    auto base = avg_pool(span.data(), len, channels, stride);
    auto after = avg_pool(permuted.data(), len, channels, stride);
    for (int j = 0; j < base.l_out(); ++j) {
        for (int c = 0; c < channels; ++c) {
            CHECK(after.values[static_cast<size_t>(j) * channels + c] ==
                  base.values[static_cast<size_t>(j) * channels + perm[static_cast<size_t>(c)]]);
        }
    }
}

TEST_CASE("every kind emits ceil(L/S) tokens over the full grid") {
    const std::vector<int> strides = {1, 2, 4, 8, 16, 64};
    for (int len = 1; len <= 128; ++len) {
        auto span = random_span(len, 3, static_cast<uint64_t>(len));
        for (int stride : strides) {
            const int want = (len + stride - 1) / stride;
            std::vector<double> importance(static_cast<size_t>(len));
            Rng irng(static_cast<uint64_t>(len * 131 + stride));
            for (auto& x : importance) x = irng.uniform();
            for (auto kind : {CompressorKind::avg_pool, CompressorKind::random_drop,
                              CompressorKind::kmeans, CompressorKind::attn_topk,
                              CompressorKind::vcc_lite}) {
                auto r = compress_span(spec_of(kind, stride), span.data(), len, 3, importance,
                                       /*call_seed=*/7);
                CHECK(r.l_out() == want);
            }
        }
    }
}

TEST_CASE("stride 1 is the identity for every kind") {
    const int len = 17, channels = 4;
    auto span = random_span(len, channels, 5);
    std::vector<double> importance(static_cast<size_t>(len), 0.25);
    for (auto kind : {CompressorKind::avg_pool, CompressorKind::random_drop,
                      CompressorKind::kmeans, CompressorKind::attn_topk,
                      CompressorKind::vcc_lite}) {
        auto r = compress_span(spec_of(kind, 1), span.data(), len, channels, importance, 3);
        REQUIRE(r.l_out() == len);
        CHECK(r.values == span);
        for (int i = 0; i < len; ++i) CHECK(r.source_map[static_cast<size_t>(i)] == std::vector<int>{i});
    }
}

TEST_CASE("selection kinds copy source rows bit for bit") {
    const int len = 24, channels = 7;
    auto span = random_span(len, channels, 21);
    std::vector<double> importance(static_cast<size_t>(len));
    Rng irng(77);
    for (auto& x : importance) x = irng.uniform();

    for (auto kind : {CompressorKind::random_drop, CompressorKind::attn_topk}) {
        auto r = compress_span(spec_of(kind, 4), span.data(), len, channels, importance, 9);
        int prev = -1;
        for (int j = 0; j < r.l_out(); ++j) {
            REQUIRE(r.source_map[static_cast<size_t>(j)].size() == 1);
            const int src = r.source_map[static_cast<size_t>(j)][0];
            CHECK(src > prev);  // original order preserved
            prev = src;
            for (int c = 0; c < channels; ++c) {
                CHECK(r.values[static_cast<size_t>(j) * channels + c] ==
                      span[static_cast<size_t>(src) * channels + c]);
            }
        }
    }
}

TEST_CASE("random_drop: boundary strides and seeded determinism") {
    auto span = random_span(8, 2, 3);
    auto all = random_drop(span.data(), 8, 2, 1, 11);
    REQUIRE(all.l_out() == 8);
    for (int i = 0; i < 8; ++i) CHECK(all.source_map[static_cast<size_t>(i)][0] == i);

    auto one = random_drop(span.data(), 8, 2, 8, 11);
    CHECK(one.l_out() == 1);

    auto a = random_drop(span.data(), 8, 2, 2, 1234);
    auto b = random_drop(span.data(), 8, 2, 2, 1234);
    CHECK(a.source_map == b.source_map);
    auto c = random_drop(span.data(), 8, 2, 2, 1235);
    CHECK(a.source_map != c.source_map);  // different seed, different draw (w.h.p.)
}

TEST_CASE("attn_topk ranking, ties, and identity") {
    std::vector<double> span = {10, 20, 30, 40};
    auto r = attn_topk(span.data(), 4, 1, 2, {0.1, 0.5, 0.2, 0.4});
    REQUIRE(r.l_out() == 2);
    CHECK(r.source_map[0] == std::vector<int>{1});
    CHECK(r.source_map[1] == std::vector<int>{3});

    auto ties = attn_topk(span.data(), 4, 1, 2, {0.25, 0.25, 0.25, 0.25});
    CHECK(ties.source_map[0] == std::vector<int>{0});
    CHECK(ties.source_map[1] == std::vector<int>{1});

    auto keep_all = attn_topk(span.data(), 4, 1, 1, {0.1, 0.2, 0.3, 0.4});
    CHECK(keep_all.values == span);
}

TEST_CASE("kmeans: separated pairs, degenerate data, one point per cluster") {
    std::vector<double> span = {0, 0, 10, 10};
    auto r = kmeans_compress(span.data(), 4, 1, 2, 10, 42);
    REQUIRE(r.l_out() == 2);
    CHECK(r.values[0] == doctest::Approx(0.0));
    CHECK(r.values[1] == doctest::Approx(10.0));
    CHECK(r.source_map[0] == std::vector<int>{0, 1});
    CHECK(r.source_map[1] == std::vector<int>{2, 3});

    std::vector<double> same(12, 3.5);
    auto rs = kmeans_compress(same.data(), 12, 1, 4, 10, 7);
    for (double v : rs.values) CHECK(v == doctest::Approx(3.5));

    auto id = kmeans_compress(span.data(), 4, 1, 1, 10, 7);
    CHECK(id.values == span);
}

namespace {

// Exhaustive assignment enumeration: the optimal k-partition of scalar
// points by within-cluster squared distance, clusters ordered by least
// member index.
struct BestPartition {
    double cost = 1e300;
    std::vector<std::vector<int>> groups;
};

BestPartition enumerate_best(const std::vector<double>& pts, int k) {
    const int n = static_cast<int>(pts.size());
    BestPartition best;
    std::vector<int> assign(static_cast<size_t>(n), 0);
    const long long total = static_cast<long long>(std::pow(k, n));
    for (long long code = 0; code < total; ++code) {
        long long c = code;
        for (int i = 0; i < n; ++i) {
            assign[static_cast<size_t>(i)] = static_cast<int>(c % k);
            c /= k;
        }
        std::vector<double> sum(static_cast<size_t>(k), 0.0);
        std::vector<int> count(static_cast<size_t>(k), 0);
        for (int i = 0; i < n; ++i) {
            sum[static_cast<size_t>(assign[static_cast<size_t>(i)])] += pts[static_cast<size_t>(i)];
            ++count[static_cast<size_t>(assign[static_cast<size_t>(i)])];
        }
        bool all_nonempty = true;
        for (int g = 0; g < k; ++g) all_nonempty = all_nonempty && count[static_cast<size_t>(g)] > 0;
        if (!all_nonempty) continue;
        double cost = 0.0;
        for (int i = 0; i < n; ++i) {
            const int g = assign[static_cast<size_t>(i)];
            const double mean = sum[static_cast<size_t>(g)] / count[static_cast<size_t>(g)];
            cost += (pts[static_cast<size_t>(i)] - mean) * (pts[static_cast<size_t>(i)] - mean);
        }
        if (cost < best.cost - 1e-12) {
            best.cost = cost;
            best.groups.assign(static_cast<size_t>(k), {});
            for (int i = 0; i < n; ++i) {
                best.groups[static_cast<size_t>(assign[static_cast<size_t>(i)])].push_back(i);
            }
            std::sort(best.groups.begin(), best.groups.end(),
                      [](const auto& a, const auto& b) { return a.front() < b.front(); });
        }
    }
    return best;
}

}  // namespace

TEST_CASE("kmeans matches exhaustive enumeration on separated scalar sets") {
    for (uint64_t seed = 0; seed < 40; ++seed) {
        Rng rng(9000 + seed);
        const int stride = 2 + static_cast<int>(rng.uniform_below(3));  // 2..4
        const int n = 4 + static_cast<int>(rng.uniform_below(5));       // 4..8
        const int k = (n + stride - 1) / stride;
        if (k < 2) continue;

        // Clusters centered 20 apart, points within +/-1 of their center.
        std::vector<double> pts;
        for (int i = 0; i < n; ++i) {
            const int cluster = std::min<int>(static_cast<int>(rng.uniform_below(static_cast<uint64_t>(k))),
                                              k - 1);
            pts.push_back(20.0 * cluster + 2.0 * rng.uniform() - 1.0);
        }
        // Ensure every cluster is populated so the optimum is unambiguous.
        for (int g = 0; g < k; ++g) pts[static_cast<size_t>(g)] = 20.0 * g + 2.0 * rng.uniform() - 1.0;

        auto want = enumerate_best(pts, k);
        auto got = kmeans_compress(pts.data(), n, 1, stride, 10, 1234 + seed);
        REQUIRE(got.l_out() == k);
        CHECK(got.source_map == want.groups);
        for (int g = 0; g < k; ++g) {
            double mean = 0.0;
            for (int idx : want.groups[static_cast<size_t>(g)]) mean += pts[static_cast<size_t>(idx)];
            mean /= static_cast<double>(want.groups[static_cast<size_t>(g)].size());
            CHECK(got.values[static_cast<size_t>(g)] == doctest::Approx(mean).epsilon(1e-9));
        }
    }
}

TEST_CASE("compressor spec round trips through text") {
    CompressorSpec s;
    s.kind = CompressorKind::avg_pool;
    s.layer = 2;
    s.stride = 8;
    CHECK(CompressorSpec::parse(s.to_string()) == s);
    CHECK(CompressorSpec::parse("identity").is_identity());
    CHECK_THROWS(CompressorSpec::parse("bogus:1:2"));
    CHECK_THROWS(CompressorSpec::parse("avg_pool:2:0"));
}
