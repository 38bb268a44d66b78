#include "vclab/ops.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "vclab/parallel.hpp"

namespace vclab::ops {

namespace {

Tensor make_result(Shape shape, std::vector<double> values,
                   std::initializer_list<const Tensor*> parents, const char* op) {
    auto node = std::make_shared<TensorNode>();
    node->shape = std::move(shape);
    node->value = std::move(values);
    node->op = op;
    if (grad_enabled()) {
        for (const Tensor* p : parents) {
            if (p->requires_grad()) {
                node->requires_grad = true;
                break;
            }
        }
        if (node->requires_grad) {
            node->parents.reserve(parents.size());
            for (const Tensor* p : parents) node->parents.push_back(p->node_ptr());
        }
    }
    return Tensor(std::move(node));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                    shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    }
}

// out[R,N] += a[R,K] * w[K,N]
void kern_mm(const double* a, const double* w, double* out, size_t R, size_t K, size_t N) {
    parallel_for(R, [&](size_t r0, size_t r1) {
        for (size_t r = r0; r < r1; ++r) {
            const double* ar = a + r * K;
            double* or_ = out + r * N;
            for (size_t k = 0; k < K; ++k) {
                const double av = ar[k];
                const double* wk = w + k * N;
                for (size_t n = 0; n < N; ++n) or_[n] += av * wk[n];
            }
        }
    });
}

// out[R,K] += d[R,N] * w[K,N]^T   (row-row dot products)
void kern_mm_nt(const double* d, const double* w, double* out, size_t R, size_t K, size_t N) {
    parallel_for(R, [&](size_t r0, size_t r1) {
        for (size_t r = r0; r < r1; ++r) {
            const double* dr = d + r * N;
            double* or_ = out + r * K;
            for (size_t k = 0; k < K; ++k) {
                const double* wk = w + k * N;
                double acc = 0.0;
                for (size_t n = 0; n < N; ++n) acc += dr[n] * wk[n];
                or_[k] += acc;
            }
        }
    });
}

// out[K,N] += a[R,K]^T * d[R,N]   (partitioned over K so accumulation
// into each output row stays single-owner and thread-count invariant)
void kern_mm_tn(const double* a, const double* d, double* out, size_t R, size_t K, size_t N) {
    parallel_for(K, [&](size_t k0, size_t k1) {
        for (size_t k = k0; k < k1; ++k) {
            double* ok = out + k * N;
            for (size_t r = 0; r < R; ++r) {
                const double av = a[r * K + k];
                if (av == 0.0) continue;
                const double* dr = d + r * N;
                for (size_t n = 0; n < N; ++n) ok[n] += av * dr[n];
            }
        }
    });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> out(av.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
    Tensor result = make_result(a.shape(), std::move(out), {&a, &b}, "add");
    if (result.requires_grad()) {
        TensorNode* rn = result.node();
        TensorNode* an = a.node();
        TensorNode* bn = b.node();
        rn->backward_fn = [rn, an, bn] {
            const auto& g = rn->grad;
            if (an->requires_grad) {
                an->ensure_grad();
                for (size_t i = 0; i < g.size(); ++i) an->grad[i] += g[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (size_t i = 0; i < g.size(); ++i) bn->grad[i] += g[i];
            }
        };
    }
    return result;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> out(av.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
    Tensor result = make_result(a.shape(), std::move(out), {&a, &b}, "mul");
    if (result.requires_grad()) {
        TensorNode* rn = result.node();
        TensorNode* an = a.node();
        TensorNode* bn = b.node();
        rn->backward_fn = [rn, an, bn] {
            const auto& g = rn->grad;
            if (an->requires_grad) {
                an->ensure_grad();
                for (size_t i = 0; i < g.size(); ++i) an->grad[i] += g[i] * bn->value[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (size_t i = 0; i < g.size(); ++i) bn->grad[i] += g[i] * an->value[i];
            }
        };
    }
    return result;
}

Tensor scale(const Tensor& a, double factor) {
    const auto& av = a.values();
    std::vector<double> out(av.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] * factor;
    Tensor result = make_result(a.shape(), std::move(out), {&a}, "scale");
    if (result.requires_grad()) {
        TensorNode* rn = result.node();
        TensorNode* an = a.node();
        rn->backward_fn = [rn, an, factor] {
            an->ensure_grad();
            const auto& g = rn->grad;
            for (size_t i = 0; i < g.size(); ++i) an->grad[i] += g[i] * factor;
        };
    }
    return result;
}

Tensor matmul(const Tensor& a, const Tensor& w) {
    if (a.shape().size() < 2 || w.shape().size() != 2) {
        throw std::invalid_argument("matmul: need [...,M,K] by [K,N], got " +
                                    shape_str(a.shape()) + " by " + shape_str(w.shape()));
    }
    const int K = a.dim(-1);
    if (K != w.dim(0)) {
        throw std::invalid_argument("matmul: inner dimensions disagree, " +
                                    shape_str(a.shape()) + " by " + shape_str(w.shape()));
    }
    const size_t N = static_cast<size_t>(w.dim(1));
    const size_t R = a.numel() / static_cast<size_t>(K);
    Shape out_shape = a.shape();
    out_shape.back() = static_cast<int>(N);

    std::vector<double> out(R * N, 0.0);
    kern_mm(a.values().data(), w.values().data(), out.data(), R, static_cast<size_t>(K), N);
    Tensor result = make_result(std::move(out_shape), std::move(out), {&a, &w}, "matmul");
    if (result.requires_grad()) {
        TensorNode* rn = result.node();
        TensorNode* an = a.node();
        TensorNode* wn = w.node();
        const size_t k = static_cast<size_t>(K);
        rn->backward_fn = [rn, an, wn, R, k, N] {
            if (an->requires_grad) {
                an->ensure_grad();
                kern_mm_nt(rn->grad.data(), wn->value.data(), an->grad.data(), R, k, N);
            }
            if (wn->requires_grad) {
                wn->ensure_grad();
                kern_mm_tn(an->value.data(), rn->grad.data(), wn->grad.data(), R, k, N);
            }
        };
    }
    return result;
}

Tensor bmm(const Tensor& a, const Tensor& b, bool transpose_b) {
    if (a.shape().size() != 3 || b.shape().size() != 3 || a.dim(0) != b.dim(0)) {
        throw std::invalid_argument("bmm: need [G,M,K] by [G,*,*] with equal G, got " +
                                    shape_str(a.shape()) + " by " + shape_str(b.shape()));
    }
    const size_t G = static_cast<size_t>(a.dim(0));
    const size_t M = static_cast<size_t>(a.dim(1));
    const size_t K = static_cast<size_t>(a.dim(2));
    const size_t N = static_cast<size_t>(transpose_b ? b.dim(1) : b.dim(2));
    const size_t bK = static_cast<size_t>(transpose_b ? b.dim(2) : b.dim(1));
    if (bK != K) {
        throw std::invalid_argument("bmm: inner dimensions disagree, " + shape_str(a.shape()) +
                                    " by " + shape_str(b.shape()) +
                                    (transpose_b ? " (b transposed)" : ""));
    }

    std::vector<double> out(G * M * N, 0.0);
    const double* ap = a.values().data();
    const double* bp = b.values().data();
    double* op = out.data();
    parallel_for(G * M, [&](size_t i0, size_t i1) {
        for (size_t i = i0; i < i1; ++i) {
            const size_t g = i / M;
            const double* ar = ap + i * K;
            const double* bg = bp + g * (transpose_b ? N * K : K * N);
            double* or_ = op + i * N;
            if (transpose_b) {
                for (size_t n = 0; n < N; ++n) {
                    const double* bn_ = bg + n * K;
                    double acc = 0.0;
                    for (size_t k = 0; k < K; ++k) acc += ar[k] * bn_[k];
                    or_[n] = acc;
                }
            } else {
                for (size_t k = 0; k < K; ++k) {
                    const double av = ar[k];
                    const double* bk = bg + k * N;
                    for (size_t n = 0; n < N; ++n) or_[n] += av * bk[n];
                }
            }
        }
    });

    Tensor result = make_result({static_cast<int>(G), static_cast<int>(M), static_cast<int>(N)},
                                std::move(out), {&a, &b}, "bmm");
    if (result.requires_grad()) {
        TensorNode* rn = result.node();
        TensorNode* an = a.node();
        TensorNode* bn = b.node();
        rn->backward_fn = [rn, an, bn, G, M, K, N, transpose_b] {
            const double* d = rn->grad.data();
            if (an->requires_grad) {
                an->ensure_grad();
                double* da = an->grad.data();
                const double* bv = bn->value.data();
                // dA[g] = dOut[g] * B[g]^T  (or * B[g] when b was transposed)
                for (size_t g = 0; g < G; ++g) {
                    const double* dg = d + g * M * N;
                    const double* bg = bv + g * (transpose_b ? N * K : K * N);
                    double* dag = da + g * M * K;
                    if (transpose_b) {
                        kern_mm(dg, bg, dag, M, N, K);
                    } else {
                        kern_mm_nt(dg, bg, dag, M, K, N);
                    }
                }
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                double* db = bn->grad.data();
                const double* av = an->value.data();
                for (size_t g = 0; g < G; ++g) {
                    const double* dg = d + g * M * N;
                    const double* ag = av + g * M * K;
                    if (transpose_b) {
                        // dB[g,n,:] = sum_m dOut[g,m,n] * A[g,m,:]
                        kern_mm_tn(dg, ag, db + g * N * K, M, N, K);
                    } else {
                        // dB[g,k,:] = sum_m A[g,m,k] * dOut[g,m,:]
                        kern_mm_tn(ag, dg, db + g * K * N, M, K, N);
                    }
                }
            }
        };
    }
    return result;
}

Tensor split_heads(const Tensor& x, int n_heads) {
    if (x.shape().size() != 3) {
        throw std::invalid_argument("split_heads: need [B,T,C], got " + shape_str(x.shape()));
    }
    const int B = x.dim(0), T = x.dim(1), C = x.dim(2);
    if (n_heads <= 0 || C % n_heads != 0) {
        throw std::invalid_argument("split_heads: " + std::to_string(C) + " channels not divisible by " +
                                    std::to_string(n_heads) + " heads");
    }
    const int Dh = C / n_heads;
    std::vector<double> out(x.numel());
    const double* xp = x.values().data();
    for (int b = 0; b < B; ++b) {
        for (int h = 0; h < n_heads; ++h) {
            for (int t = 0; t < T; ++t) {
                const double* src = xp + (static_cast<size_t>(b) * T + t) * C + static_cast<size_t>(h) * Dh;
                double* dst = out.data() +
                              ((static_cast<size_t>(b) * n_heads + h) * T + t) * Dh;
                for (int d = 0; d < Dh; ++d) dst[d] = src[d];
            }
        }
    }
    Tensor result = make_result({B * n_heads, T, Dh}, std::move(out), {&x}, "split_heads");
    if (result.requires_grad()) {
        TensorNode* rn = result.node();
        TensorNode* xn = x.node();
        rn->backward_fn = [rn, xn, B, T, C, n_heads, Dh] {
            xn->ensure_grad();
            const double* g = rn->grad.data();
            double* dx = xn->grad.data();
            for (int b = 0; b < B; ++b) {
                for (int h = 0; h < n_heads; ++h) {
                    for (int t = 0; t < T; ++t) {
                        const double* src = g + ((static_cast<size_t>(b) * n_heads + h) * T + t) * Dh;
                        double* dst = dx + (static_cast<size_t>(b) * T + t) * C +
                                      static_cast<size_t>(h) * Dh;
                        for (int d = 0; d < Dh; ++d) dst[d] += src[d];
                    }
                }
            }
        };
    }
    return result;
}

Tensor merge_heads(const Tensor& x, int batch) {
    if (x.shape().size() != 3) {
        throw std::invalid_argument("merge_heads: need [B*H,T,Dh], got " + shape_str(x.shape()));
    }
    const int BH = x.dim(0), T = x.dim(1), Dh = x.dim(2);
    if (batch <= 0 || BH % batch != 0) {
        throw std::invalid_argument("merge_heads: leading dim " + std::to_string(BH) +
                                    " not divisible by batch " + std::to_string(batch));
    }
    const int H = BH / batch;
    const int C = H * Dh;
    std::vector<double> out(x.numel());
    const double* xp = x.values().data();
    for (int b = 0; b < batch; ++b) {
        for (int h = 0; h < H; ++h) {
            for (int t = 0; t < T; ++t) {
                const double* src = xp + ((static_cast<size_t>(b) * H + h) * T + t) * Dh;
                double* dst = out.data() + (static_cast<size_t>(b) * T + t) * C +
                              static_cast<size_t>(h) * Dh;
                for (int d = 0; d < Dh; ++d) dst[d] = src[d];
            }
        }
    }
    Tensor result = make_result({batch, T, C}, std::move(out), {&x}, "merge_heads");
    if (result.requires_grad()) {
        TensorNode* rn = result.node();
        TensorNode* xn = x.node();
        rn->backward_fn = [rn, xn, batch, H, T, Dh, C] {
            xn->ensure_grad();
            const double* g = rn->grad.data();
            double* dx = xn->grad.data();
            for (int b = 0; b < batch; ++b) {
                for (int h = 0; h < H; ++h) {
                    for (int t = 0; t < T; ++t) {
                        const double* src = g + (static_cast<size_t>(b) * T + t) * C +
                                            static_cast<size_t>(h) * Dh;
                        double* dst = dx + ((static_cast<size_t>(b) * H + h) * T + t) * Dh;
                        for (int d = 0; d < Dh; ++d) dst[d] += src[d];
                    }
                }
            }
        };
    }
    return result;
}

Tensor softmax_rows(const Tensor& x) {
    if (x.shape().empty()) throw std::invalid_argument("softmax_rows: scalar input");
    const size_t T = static_cast<size_t>(x.dim(-1));
    const size_t R = x.numel() / T;
    std::vector<double> out(x.numel());
    const double* xp = x.values().data();
    double* op = out.data();
    parallel_for(R, [&](size_t r0, size_t r1) {
        for (size_t r = r0; r < r1; ++r) {
            const double* row = xp + r * T;
            double* orow = op + r * T;
            double m = row[0];
            for (size_t t = 1; t < T; ++t) m = row[t] > m ? row[t] : m;
            double sum = 0.0;
            for (size_t t = 0; t < T; ++t) {
                const double e = std::exp(row[t] - m);
                orow[t] = e;
                sum += e;
            }
            const double inv = 1.0 / sum;
            for (size_t t = 0; t < T; ++t) orow[t] *= inv;
        }
    });
    Tensor result = make_result(x.shape(), std::move(out), {&x}, "softmax_rows");
    if (result.requires_grad()) {
        TensorNode* rn = result.node();
        TensorNode* xn = x.node();
        rn->backward_fn = [rn, xn, R, T] {
            xn->ensure_grad();
            const double* g = rn->grad.data();
            const double* s = rn->value.data();
            double* dx = xn->grad.data();
            parallel_for(R, [&](size_t r0, size_t r1) {
                for (size_t r = r0; r < r1; ++r) {
                    const double* gr = g + r * T;
                    const double* sr = s + r * T;
                    double dot = 0.0;
                    for (size_t t = 0; t < T; ++t) dot += gr[t] * sr[t];
                    double* dr = dx + r * T;
                    for (size_t t = 0; t < T; ++t) dr[t] += sr[t] * (gr[t] - dot);
                }
            });
        };
    }
    return result;
}

Tensor gelu(const Tensor& x) {
    const auto& xv = x.values();
    std::vector<double> out(xv.size());
    constexpr double inv_sqrt2 = std::numbers::sqrt2 / 2.0;
    for (size_t i = 0; i < out.size(); ++i) {
        out[i] = 0.5 * xv[i] * (1.0 + std::erf(xv[i] * inv_sqrt2));
    }
    Tensor result = make_result(x.shape(), std::move(out), {&x}, "gelu");
    if (result.requires_grad()) {
        TensorNode* rn = result.node();
        TensorNode* xn = x.node();
        rn->backward_fn = [rn, xn] {
            xn->ensure_grad();
            constexpr double inv_sqrt2pi = 0.3989422804014327;
            const auto& g = rn->grad;
            for (size_t i = 0; i < g.size(); ++i) {
                const double v = xn->value[i];
                const double cdf = 0.5 * (1.0 + std::erf(v * inv_sqrt2));
                const double pdf = inv_sqrt2pi * std::exp(-0.5 * v * v);
                xn->grad[i] += g[i] * (cdf + v * pdf);
            }
        };
    }
    return result;
}

Tensor rmsnorm(const Tensor& x, const Tensor& w, double eps) {
    if (w.shape().size() != 1 || w.dim(0) != x.dim(-1)) {
        throw std::invalid_argument("rmsnorm: gain shape " + shape_str(w.shape()) +
                                    " does not match trailing dim of " + shape_str(x.shape()));
    }
    const size_t C = static_cast<size_t>(x.dim(-1));
    const size_t R = x.numel() / C;
    std::vector<double> out(x.numel());
    const double* xp = x.values().data();
    const double* wp = w.values().data();
    double* op = out.data();
    parallel_for(R, [&](size_t r0, size_t r1) {
        for (size_t r = r0; r < r1; ++r) {
            const double* row = xp + r * C;
            double ss = 0.0;
            for (size_t c = 0; c < C; ++c) ss += row[c] * row[c];
            const double inv = 1.0 / std::sqrt(ss / static_cast<double>(C) + eps);
            double* orow = op + r * C;
            for (size_t c = 0; c < C; ++c) orow[c] = row[c] * inv * wp[c];
        }
    });
    Tensor result = make_result(x.shape(), std::move(out), {&x, &w}, "rmsnorm");
    if (result.requires_grad()) {
        TensorNode* rn = result.node();
        TensorNode* xn = x.node();
        TensorNode* wn = w.node();
        rn->backward_fn = [rn, xn, wn, R, C, eps] {
            const double* g = rn->grad.data();
            const double* xv = xn->value.data();
            const double* wv = wn->value.data();
            if (xn->requires_grad) {
                xn->ensure_grad();
                double* dx = xn->grad.data();
                parallel_for(R, [&](size_t r0, size_t r1) {
                    for (size_t r = r0; r < r1; ++r) {
                        const double* row = xv + r * C;
                        const double* gr = g + r * C;
                        double ss = 0.0;
                        for (size_t c = 0; c < C; ++c) ss += row[c] * row[c];
                        const double ms = ss / static_cast<double>(C) + eps;
                        const double inv = 1.0 / std::sqrt(ms);
                        double dot = 0.0;
                        for (size_t c = 0; c < C; ++c) dot += gr[c] * wv[c] * row[c];
                        const double coef = dot * inv / (ms * static_cast<double>(C));
                        double* dr = dx + r * C;
                        for (size_t c = 0; c < C; ++c) {
                            dr[c] += gr[c] * wv[c] * inv - row[c] * coef;
                        }
                    }
                });
            }
            if (wn->requires_grad) {
                wn->ensure_grad();
                double* dw = wn->grad.data();
                for (size_t r = 0; r < R; ++r) {
                    const double* row = xv + r * C;
                    const double* gr = g + r * C;
                    double ss = 0.0;
                    for (size_t c = 0; c < C; ++c) ss += row[c] * row[c];
                    const double inv = 1.0 / std::sqrt(ss / static_cast<double>(C) + eps);
                    for (size_t c = 0; c < C; ++c) dw[c] += gr[c] * row[c] * inv;
                }
            }
        };
    }
    return result;
}

Tensor embedding(const Tensor& table, const std::vector<int>& ids, int batch, int seq_len) {
    if (table.shape().size() != 2) {
        throw std::invalid_argument("embedding: table must be [V,C], got " + shape_str(table.shape()));
    }
    const size_t R = static_cast<size_t>(batch) * static_cast<size_t>(seq_len);
    if (ids.size() != R) {
        throw std::invalid_argument("embedding: expected " + std::to_string(R) + " ids, got " +
                                    std::to_string(ids.size()));
    }
    const int V = table.dim(0);
    const size_t C = static_cast<size_t>(table.dim(1));
    std::vector<double> out(R * C);
    const double* tp = table.values().data();
    for (size_t r = 0; r < R; ++r) {
        const int id = ids[r];
        if (id < 0 || id >= V) {
            throw std::out_of_range("embedding: id " + std::to_string(id) + " outside table of " +
                                    std::to_string(V) + " rows");
        }
        const double* src = tp + static_cast<size_t>(id) * C;
        double* dst = out.data() + r * C;
        for (size_t c = 0; c < C; ++c) dst[c] = src[c];
    }
    Tensor result = make_result({batch, seq_len, static_cast<int>(C)}, std::move(out),
                                {&table}, "embedding");
    if (result.requires_grad()) {
        TensorNode* rn = result.node();
        TensorNode* tn = table.node();
        auto ids_copy = ids;
        rn->backward_fn = [rn, tn, ids_copy, R, C] {
            tn->ensure_grad();
            const double* g = rn->grad.data();
            double* dt = tn->grad.data();
            // Partition over channels: rows sharing an id collide, columns do not.
            parallel_for(C, [&](size_t c0, size_t c1) {
                for (size_t r = 0; r < R; ++r) {
                    const double* gr = g + r * C;
                    double* row = dt + static_cast<size_t>(ids_copy[r]) * C;
                    for (size_t c = c0; c < c1; ++c) row[c] += gr[c];
                }
            });
        };
    }
    return result;
}

Tensor mul_rows(const Tensor& x, const std::vector<double>& row_weights) {
    if (x.shape().empty()) throw std::invalid_argument("mul_rows: scalar input");
    const size_t C = static_cast<size_t>(x.dim(-1));
    const size_t R = x.numel() / C;
    if (row_weights.size() != R) {
        throw std::invalid_argument("mul_rows: expected " + std::to_string(R) + " weights, got " +
                                    std::to_string(row_weights.size()));
    }
    std::vector<double> out(x.numel());
    const double* xp = x.values().data();
    for (size_t r = 0; r < R; ++r) {
        const double wv = row_weights[r];
        const double* src = xp + r * C;
        double* dst = out.data() + r * C;
        for (size_t c = 0; c < C; ++c) dst[c] = src[c] * wv;
    }
    Tensor result = make_result(x.shape(), std::move(out), {&x}, "mul_rows");
    if (result.requires_grad()) {
        TensorNode* rn = result.node();
        TensorNode* xn = x.node();
        auto w = row_weights;
        rn->backward_fn = [rn, xn, w, R, C] {
            xn->ensure_grad();
            const double* g = rn->grad.data();
            double* dx = xn->grad.data();
            for (size_t r = 0; r < R; ++r) {
                const double wv = w[r];
                const double* gr = g + r * C;
                double* dr = dx + r * C;
                for (size_t c = 0; c < C; ++c) dr[c] += gr[c] * wv;
            }
        };
    }
    return result;
}

Tensor cross_entropy_masked(const Tensor& logits, const std::vector<int>& targets,
                            const std::vector<double>& mask) {
    if (logits.shape().empty()) throw std::invalid_argument("cross_entropy_masked: scalar logits");
    const size_t V = static_cast<size_t>(logits.dim(-1));
    const size_t R = logits.numel() / V;
    if (targets.size() != R || mask.size() != R) {
        throw std::invalid_argument("cross_entropy_masked: logits rows " + std::to_string(R) +
                                    " vs targets " + std::to_string(targets.size()) + ", mask " +
                                    std::to_string(mask.size()));
    }
    double mask_total = 0.0;
    for (double m : mask) mask_total += m;
    if (mask_total <= 0.0) {
        throw std::invalid_argument("cross_entropy_masked: mask selects no positions");
    }

    const double* lp = logits.values().data();
    double loss = 0.0;
    for (size_t r = 0; r < R; ++r) {
        if (mask[r] == 0.0) continue;
        const int tgt = targets[r];
        if (tgt < 0 || tgt >= static_cast<int>(V)) {
            throw std::out_of_range("cross_entropy_masked: target id " + std::to_string(tgt) +
                                    " outside vocab of " + std::to_string(V));
        }
        const double* row = lp + r * V;
        double m = row[0];
        for (size_t v = 1; v < V; ++v) m = row[v] > m ? row[v] : m;
        double sum = 0.0;
        for (size_t v = 0; v < V; ++v) sum += std::exp(row[v] - m);
        const double lse = m + std::log(sum);
        loss += mask[r] * (lse - row[static_cast<size_t>(tgt)]);
    }
    loss /= mask_total;

    Tensor result = make_result({1}, {loss}, {&logits}, "cross_entropy_masked");
    if (result.requires_grad()) {
        TensorNode* rn = result.node();
        TensorNode* ln = logits.node();
        auto t = targets;
        auto w = mask;
        rn->backward_fn = [rn, ln, t, w, R, V, mask_total] {
            ln->ensure_grad();
            const double gout = rn->grad[0];
            const double* lv = ln->value.data();
            double* dl = ln->grad.data();
            parallel_for(R, [&](size_t r0, size_t r1) {
                for (size_t r = r0; r < r1; ++r) {
                    if (w[r] == 0.0) continue;
                    const double* row = lv + r * V;
                    double* drow = dl + r * V;
                    double m = row[0];
                    for (size_t v = 1; v < V; ++v) m = row[v] > m ? row[v] : m;
                    double sum = 0.0;
                    for (size_t v = 0; v < V; ++v) sum += std::exp(row[v] - m);
                    const double coef = gout * w[r] / mask_total;
                    for (size_t v = 0; v < V; ++v) {
                        double p = std::exp(row[v] - m) / sum;
                        drow[v] += coef * (p - (static_cast<int>(v) == t[r] ? 1.0 : 0.0));
                    }
                }
            });
        };
    }
    return result;
}

Tensor sum_all(const Tensor& x) {
    double s = 0.0;
    for (double v : x.values()) s += v;
    Tensor result = make_result({1}, {s}, {&x}, "sum_all");
    if (result.requires_grad()) {
        TensorNode* rn = result.node();
        TensorNode* xn = x.node();
        rn->backward_fn = [rn, xn] {
            xn->ensure_grad();
            const double g = rn->grad[0];
            for (auto& d : xn->grad) d += g;
        };
    }
    return result;
}

}  // namespace vclab::ops
