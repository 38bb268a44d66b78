#include "vclab/compressor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "vclab/rng.hpp"

namespace vclab {

const char* kind_name(CompressorKind kind) {
    switch (kind) {
        case CompressorKind::identity: return "identity";
        case CompressorKind::avg_pool: return "avg_pool";
        case CompressorKind::random_drop: return "random_drop";
        case CompressorKind::kmeans: return "kmeans";
        case CompressorKind::attn_topk: return "attn_topk";
        case CompressorKind::vcc_lite: return "vcc_lite";
    }
    throw std::logic_error("kind_name: bad enum value");
}

CompressorKind kind_from_name(const std::string& name) {
    for (CompressorKind k : {CompressorKind::identity, CompressorKind::avg_pool,
                             CompressorKind::random_drop, CompressorKind::kmeans,
                             CompressorKind::attn_topk, CompressorKind::vcc_lite}) {
        if (name == kind_name(k)) return k;
    }
    throw std::invalid_argument("unknown compressor kind '" + name + "'");
}

std::string CompressorSpec::to_string() const {
    if (kind == CompressorKind::identity) return "identity";
    std::ostringstream os;
    os << kind_name(kind) << ':' << layer << ':' << stride;
    return os.str();
}

CompressorSpec CompressorSpec::parse(const std::string& text) {
    CompressorSpec spec;
    if (text == "identity" || text.empty()) return spec;
    std::istringstream is(text);
    std::string kind_str;
    if (!std::getline(is, kind_str, ':')) {
        throw std::invalid_argument("bad compressor spec '" + text + "'");
    }
    spec.kind = kind_from_name(kind_str);
    if (spec.kind == CompressorKind::identity) return spec;
    std::string layer_str, stride_str;
    if (!std::getline(is, layer_str, ':') || !std::getline(is, stride_str, ':')) {
        throw std::invalid_argument("compressor spec '" + text + "' needs kind:layer:stride");
    }
    spec.layer = std::stoi(layer_str);
    spec.stride = std::stoi(stride_str);
    if (spec.stride < 1) {
        throw std::invalid_argument("compressor spec '" + text + "': stride must be >= 1");
    }
    return spec;
}

bool operator==(const CompressorSpec& a, const CompressorSpec& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == CompressorKind::identity) return true;
    return a.layer == b.layer && a.stride == b.stride && a.seed == b.seed &&
           a.importance_head_max == b.importance_head_max && a.kmeans_iters == b.kmeans_iters;
}

int output_len(int input_len, int stride) {
    if (input_len < 0 || stride < 1) {
        throw std::invalid_argument("output_len: need len >= 0 and stride >= 1");
    }
    return (input_len + stride - 1) / stride;
}

void mean_of_rows(const double* span, int channels, const std::vector<int>& members,
                  double* out) {
    if (members.size() == 1) {
        // Selection kinds must reproduce the source row bit for bit.
        const double* src = span + static_cast<size_t>(members[0]) * channels;
        std::copy(src, src + channels, out);
        return;
    }
    std::fill(out, out + channels, 0.0);
    for (int idx : members) {
        const double* src = span + static_cast<size_t>(idx) * channels;
        for (int c = 0; c < channels; ++c) out[c] += src[c];
    }
    const double inv = 1.0 / static_cast<double>(members.size());
    for (int c = 0; c < channels; ++c) out[c] *= inv;
}

namespace {

CompressionResult from_source_map(const double* span, int channels,
                                  std::vector<std::vector<int>> source_map) {
    CompressionResult result;
    result.source_map = std::move(source_map);
    result.values.resize(result.source_map.size() * static_cast<size_t>(channels));
    for (size_t j = 0; j < result.source_map.size(); ++j) {
        mean_of_rows(span, channels, result.source_map[j],
                     result.values.data() + j * static_cast<size_t>(channels));
    }
    return result;
}

double sq_dist(const double* a, const double* b, int channels) {
    double d = 0.0;
    for (int c = 0; c < channels; ++c) {
        const double diff = a[c] - b[c];
        d += diff * diff;
    }
    return d;
}

}  // namespace

CompressionResult avg_pool(const double* span, int len, int channels, int stride) {
    if (len < 1 || stride < 1) throw std::invalid_argument("avg_pool: need len >= 1, stride >= 1");
    const int l_out = output_len(len, stride);
    std::vector<std::vector<int>> map(static_cast<size_t>(l_out));
    for (int j = 0; j < l_out; ++j) {
        const int begin = j * stride;
        const int end = std::min(begin + stride, len);  // final window may be partial
        auto& members = map[static_cast<size_t>(j)];
        members.reserve(static_cast<size_t>(end - begin));
        for (int i = begin; i < end; ++i) members.push_back(i);
    }
    return from_source_map(span, channels, std::move(map));
}

CompressionResult random_drop(const double* span, int len, int channels, int stride,
                              uint64_t seed) {
    if (len < 1 || stride < 1) {
        throw std::invalid_argument("random_drop: need len >= 1, stride >= 1");
    }
    const int keep = output_len(len, stride);
    Rng rng(seed, 0x64726f70);
    std::vector<int> kept = rng.sample_indices(len, keep);  // ascending
    std::vector<std::vector<int>> map;
    map.reserve(kept.size());
    for (int idx : kept) map.push_back({idx});
    return from_source_map(span, channels, std::move(map));
}

CompressionResult kmeans_compress(const double* span, int len, int channels, int stride,
                                  int iters, uint64_t seed) {
    if (len < 1 || stride < 1) {
        throw std::invalid_argument("kmeans_compress: need len >= 1, stride >= 1");
    }
    const int k = output_len(len, stride);
    const size_t C = static_cast<size_t>(channels);
    if (k >= len) {
        // One point per cluster is the exact optimum; emit tokens as-is.
        std::vector<std::vector<int>> map(static_cast<size_t>(len));
        for (int i = 0; i < len; ++i) map[static_cast<size_t>(i)] = {i};
        return from_source_map(span, channels, std::move(map));
    }

    // k-means++ style seeding: first centroid uniform, then each next
    // centroid chosen with probability proportional to squared distance
    // to the nearest centroid so far.
    Rng rng(seed, 0x6b6d6e73);
    std::vector<std::vector<double>> centroids;
    centroids.reserve(static_cast<size_t>(k));
    {
        const int first = static_cast<int>(rng.uniform_below(static_cast<uint64_t>(len)));
        centroids.emplace_back(span + first * C, span + (first + 1) * C);
        std::vector<double> d2(static_cast<size_t>(len));
        for (int i = 0; i < len; ++i) {
            d2[static_cast<size_t>(i)] = sq_dist(span + i * C, centroids[0].data(), channels);
        }
        while (static_cast<int>(centroids.size()) < k) {
            double total = std::accumulate(d2.begin(), d2.end(), 0.0);
            int pick;
            if (total <= 0.0) {
                // All points coincide with a centroid; fall back to uniform.
                pick = static_cast<int>(rng.uniform_below(static_cast<uint64_t>(len)));
            } else {
                double r = rng.uniform() * total;
                pick = len - 1;
                double acc = 0.0;
                for (int i = 0; i < len; ++i) {
                    acc += d2[static_cast<size_t>(i)];
                    if (r < acc) {
                        pick = i;
                        break;
                    }
                }
            }
            centroids.emplace_back(span + pick * C, span + (pick + 1) * C);
            for (int i = 0; i < len; ++i) {
                const double d = sq_dist(span + i * C, centroids.back().data(), channels);
                auto& cur = d2[static_cast<size_t>(i)];
                if (d < cur) cur = d;
            }
        }
    }

    std::vector<int> assign(static_cast<size_t>(len), 0);
    auto assign_all = [&] {
        for (int i = 0; i < len; ++i) {
            int best = 0;
            double best_d = sq_dist(span + i * C, centroids[0].data(), channels);
            for (int c = 1; c < k; ++c) {
                const double d = sq_dist(span + i * C, centroids[static_cast<size_t>(c)].data(),
                                         channels);
                if (d < best_d) {  // ties stay with the lower centroid index
                    best_d = d;
                    best = c;
                }
            }
            assign[static_cast<size_t>(i)] = best;
        }
    };

    for (int it = 0; it < iters; ++it) {
        assign_all();
        std::vector<int> counts(static_cast<size_t>(k), 0);
        for (int a : assign) ++counts[static_cast<size_t>(a)];
        // Empty cluster: re-seed at the point farthest from its centroid.
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<size_t>(c)] > 0) continue;
            int farthest = -1;
            double far_d = -1.0;
            for (int i = 0; i < len; ++i) {
                const int a = assign[static_cast<size_t>(i)];
                if (counts[static_cast<size_t>(a)] <= 1) continue;  // keep donors nonempty
                const double d = sq_dist(span + i * C, centroids[static_cast<size_t>(a)].data(),
                                         channels);
                if (d > far_d) {
                    far_d = d;
                    farthest = i;
                }
            }
            if (farthest < 0) break;  // fewer distinct points than centroids
            --counts[static_cast<size_t>(assign[static_cast<size_t>(farthest)])];
            assign[static_cast<size_t>(farthest)] = c;
            counts[static_cast<size_t>(c)] = 1;
            std::copy(span + farthest * C, span + (farthest + 1) * C,
                      centroids[static_cast<size_t>(c)].begin());
        }
        // Update step.
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<size_t>(c)] == 0) continue;
            std::fill(centroids[static_cast<size_t>(c)].begin(),
                      centroids[static_cast<size_t>(c)].end(), 0.0);
        }
        for (int i = 0; i < len; ++i) {
            const int a = assign[static_cast<size_t>(i)];
            if (counts[static_cast<size_t>(a)] == 0) continue;
            auto& cen = centroids[static_cast<size_t>(a)];
            for (size_t ch = 0; ch < C; ++ch) cen[ch] += span[i * C + ch];
        }
        for (int c = 0; c < k; ++c) {
            const int n = counts[static_cast<size_t>(c)];
            if (n == 0) continue;
            for (auto& v : centroids[static_cast<size_t>(c)]) v /= static_cast<double>(n);
        }
    }
    assign_all();

    // Handle clusters left empty by the final assignment.
    {
        std::vector<int> counts(static_cast<size_t>(k), 0);
        for (int a : assign) ++counts[static_cast<size_t>(a)];
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<size_t>(c)] > 0) continue;
            int farthest = -1;
            double far_d = -1.0;
            for (int i = 0; i < len; ++i) {
                const int a = assign[static_cast<size_t>(i)];
                if (counts[static_cast<size_t>(a)] <= 1) continue;
                const double d = sq_dist(span + i * C, centroids[static_cast<size_t>(a)].data(),
                                         channels);
                if (d > far_d) {
                    far_d = d;
                    farthest = i;
                }
            }
            if (farthest < 0) break;
            --counts[static_cast<size_t>(assign[static_cast<size_t>(farthest)])];
            assign[static_cast<size_t>(farthest)] = c;
            counts[static_cast<size_t>(c)] = 1;
        }
    }

    // Emit clusters ordered by their smallest member index; each output
    // value is the mean of its members (frozen final assignment).
    std::vector<std::vector<int>> groups(static_cast<size_t>(k));
    for (int i = 0; i < len; ++i) groups[static_cast<size_t>(assign[static_cast<size_t>(i)])].push_back(i);
    std::vector<std::vector<int>> map;
    map.reserve(static_cast<size_t>(k));
    std::vector<size_t> order;
    for (size_t g = 0; g < groups.size(); ++g) {
        if (!groups[g].empty()) order.push_back(g);
    }
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return groups[a].front() < groups[b].front(); });
    for (size_t g : order) map.push_back(std::move(groups[g]));
    return from_source_map(span, channels, std::move(map));
}

CompressionResult attn_topk(const double* span, int len, int channels, int stride,
                            const std::vector<double>& importance) {
    if (len < 1 || stride < 1) throw std::invalid_argument("attn_topk: need len >= 1, stride >= 1");
    if (static_cast<int>(importance.size()) != len) {
        throw std::invalid_argument("attn_topk: expected " + std::to_string(len) +
                                    " importance scores, got " + std::to_string(importance.size()));
    }
    const int keep = output_len(len, stride);
    std::vector<int> order(static_cast<size_t>(len));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (importance[static_cast<size_t>(a)] != importance[static_cast<size_t>(b)]) {
            return importance[static_cast<size_t>(a)] > importance[static_cast<size_t>(b)];
        }
        return a < b;  // ties toward the lower index
    });
    order.resize(static_cast<size_t>(keep));
    std::sort(order.begin(), order.end());  // original order preserved
    std::vector<std::vector<int>> map;
    map.reserve(order.size());
    for (int idx : order) map.push_back({idx});
    return from_source_map(span, channels, std::move(map));
}

CompressionResult compress_span(const CompressorSpec& spec, const double* span, int len,
                                int channels, const std::vector<double>& importance,
                                uint64_t call_seed) {
    switch (spec.kind) {
        case CompressorKind::identity: {
            std::vector<std::vector<int>> map(static_cast<size_t>(len));
            for (int i = 0; i < len; ++i) map[static_cast<size_t>(i)] = {i};
            return from_source_map(span, channels, std::move(map));
        }
        case CompressorKind::avg_pool:
            return avg_pool(span, len, channels, spec.stride);
        case CompressorKind::random_drop:
            return random_drop(span, len, channels, spec.stride, spec.seed ^ call_seed);
        case CompressorKind::kmeans:
            return kmeans_compress(span, len, channels, spec.stride, spec.kmeans_iters,
                                   spec.seed ^ call_seed);
        case CompressorKind::attn_topk:
        case CompressorKind::vcc_lite:
            return attn_topk(span, len, channels, spec.stride, importance);
    }
    throw std::logic_error("compress_span: bad enum value");
}

}  // namespace vclab
