#pragma once

#include <vector>

#include "vclab/tensor.hpp"

namespace vclab::ops {

// Elementwise; shapes must match exactly.
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);

// a: [..., M, K] (leading dims collapse to rows), w: [K, N].
Tensor matmul(const Tensor& a, const Tensor& w);

// Batched product. a: [G, M, K]; b: [G, K, N], or [G, N, K] with
// transpose_b so attention scores need no explicit transpose.
Tensor bmm(const Tensor& a, const Tensor& b, bool transpose_b = false);

// [B, T, C] -> [B*H, T, C/H] and back.
Tensor split_heads(const Tensor& x, int n_heads);
Tensor merge_heads(const Tensor& x, int batch);

// Softmax over the trailing axis, max-subtracted.
Tensor softmax_rows(const Tensor& x);

Tensor gelu(const Tensor& x);

// RMS normalization over the trailing axis with learned gain w: [C].
Tensor rmsnorm(const Tensor& x, const Tensor& w, double eps = 1e-5);

// table: [V, C], ids: B*T entries in [0, V). Backward scatter-adds into
// the table gradient.
Tensor embedding(const Tensor& table, const std::vector<int>& ids, int batch, int seq_len);

// Scales row r of x (trailing axis = row) by row_weights[r]. Weights are
// constants; gradient flows through x only.
Tensor mul_rows(const Tensor& x, const std::vector<double>& row_weights);

// Mean negative log-likelihood over positions with nonzero mask weight.
// logits: [..., V] with rows R = numel/V; targets, mask: R entries.
// Targets at zero-mask positions are ignored. Throws if the mask is all
// zero or a masked target id is out of range.
Tensor cross_entropy_masked(const Tensor& logits, const std::vector<int>& targets,
                            const std::vector<double>& mask);

Tensor sum_all(const Tensor& x);

}  // namespace vclab::ops
