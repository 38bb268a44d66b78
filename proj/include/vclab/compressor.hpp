#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vclab {

// Compression transforms applied to the visual span's hidden states after
// a chosen transformer layer. avg_pool is the preferred compressor; the
// others are ablation baselines. attn_topk ranks tokens by attention from
// the last instruction token; vcc_lite ranks by mean attention from all
// non-visual tokens and is reported under that label.
enum class CompressorKind {
    identity,
    avg_pool,
    random_drop,
    kmeans,
    attn_topk,
    vcc_lite,
};

const char* kind_name(CompressorKind kind);
CompressorKind kind_from_name(const std::string& name);

struct CompressorSpec {
    CompressorKind kind = CompressorKind::identity;
    int layer = 0;   // compression applied after this layer, 1-based
    int stride = 1;  // reduction factor S; L_out = ceil(L / S)
    uint64_t seed = 0;
    bool importance_head_max = false;  // max over heads instead of mean
    int kmeans_iters = 10;

    bool is_identity() const { return kind == CompressorKind::identity || stride == 1; }
    // "kind:layer:stride" (or "identity"); parse accepts the same form.
    std::string to_string() const;
    static CompressorSpec parse(const std::string& text);
};

bool operator==(const CompressorSpec& a, const CompressorSpec& b);

int output_len(int input_len, int stride);  // ceil(L / S)

// One output token per entry: the ascending input indices it summarizes.
// Pooling kinds partition the input; selection kinds pick singletons.
struct CompressionResult {
    std::vector<std::vector<int>> source_map;
    std::vector<double> values;  // l_out x channels, row-major

    int l_out() const { return static_cast<int>(source_map.size()); }
};

// Mean of the listed rows, accumulated in ascending index order. Shared
// by the standalone ops and the in-model splice so both produce bitwise
// identical values.
void mean_of_rows(const double* span, int channels, const std::vector<int>& members,
                  double* out);

// span: len x channels, row-major hidden states of the visual span.
CompressionResult avg_pool(const double* span, int len, int channels, int stride);
CompressionResult random_drop(const double* span, int len, int channels, int stride,
                              uint64_t seed);
CompressionResult kmeans_compress(const double* span, int len, int channels, int stride,
                                  int iters, uint64_t seed);
// importance: one score per span token; keeps the top ceil(len/stride) in
// original order, ties toward the lower index.
CompressionResult attn_topk(const double* span, int len, int channels, int stride,
                            const std::vector<double>& importance);

// Dispatch on spec.kind. importance may be empty for non-attention kinds.
CompressionResult compress_span(const CompressorSpec& spec, const double* span, int len,
                                int channels, const std::vector<double>& importance,
                                uint64_t call_seed);

}  // namespace vclab
