#include "vclab/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vclab/ops.hpp"
#include "vclab/rng.hpp"

namespace vclab {

void ModelConfig::validate() const {
    if (n_layers < 1) throw std::invalid_argument("config: n_layers must be >= 1");
    if (d_model < 1 || n_heads < 1 || d_ff < 1 || vocab_size < 2 || d_patch < 1 || n_attrs < 1) {
        throw std::invalid_argument("config: dimensions must be positive");
    }
    if (d_model % n_heads != 0) {
        throw std::invalid_argument("config: d_model " + std::to_string(d_model) +
                                    " not divisible by n_heads " + std::to_string(n_heads));
    }
    if (visual_len < 1 || visual_len > max_seq) {
        throw std::invalid_argument("config: visual_len must lie in [1, max_seq]");
    }
}

const char* role_name(Role r) {
    switch (r) {
        case Role::system: return "system";
        case Role::visual: return "visual";
        case Role::instruction: return "instruction";
        case Role::answer: return "answer";
        case Role::pad: return "pad";
    }
    throw std::logic_error("role_name: bad enum value");
}

void RoleTaggedSequence::validate() const {
    const size_t n = token_ids.size();
    if (roles.size() != n || loss_mask.size() != n) {
        throw std::invalid_argument("sequence: token/role/mask lengths disagree");
    }
    if (visual_start < 0 || visual_end < visual_start || visual_end > static_cast<int>(n)) {
        throw std::invalid_argument("sequence: bad visual span");
    }
    for (size_t i = 0; i < n; ++i) {
        const bool in_span = static_cast<int>(i) >= visual_start && static_cast<int>(i) < visual_end;
        if (in_span != (roles[i] == Role::visual)) {
            throw std::invalid_argument("sequence: visual roles not aligned with span");
        }
        if ((loss_mask[i] != 0.0) != (roles[i] == Role::answer)) {
            throw std::invalid_argument("sequence: loss mask must select exactly answer positions");
        }
    }
}

double AttentionCapture::at(int layer, int b, int head, int query, int key) const {
    const int t = layer_lens.at(static_cast<size_t>(layer));
    const auto& blob = layers.at(static_cast<size_t>(layer));
    const size_t idx = ((static_cast<size_t>(b) * n_heads + head) * t + query) * t + key;
    return blob.at(idx);
}

std::vector<Tensor> Model::parameters() const {
    std::vector<Tensor> out = {tok_emb, pos_emb, patch_proj};
    for (const auto& l : layers) {
        out.insert(out.end(), {l.attn_norm, l.wq, l.wk, l.wv, l.wo, l.ffn_norm, l.w_up, l.w_down});
    }
    out.push_back(final_norm);
    out.push_back(head);
    return out;
}

std::vector<std::pair<std::string, Tensor>> Model::named_tensors() const {
    std::vector<std::pair<std::string, Tensor>> out = {
        {"tok_emb", tok_emb}, {"pos_emb", pos_emb}, {"patch_emb", patch_emb},
        {"patch_proj", patch_proj}};
    for (size_t i = 0; i < layers.size(); ++i) {
        const std::string p = "layers." + std::to_string(i) + ".";
        const auto& l = layers[i];
        out.emplace_back(p + "attn_norm", l.attn_norm);
        out.emplace_back(p + "wq", l.wq);
        out.emplace_back(p + "wk", l.wk);
        out.emplace_back(p + "wv", l.wv);
        out.emplace_back(p + "wo", l.wo);
        out.emplace_back(p + "ffn_norm", l.ffn_norm);
        out.emplace_back(p + "w_up", l.w_up);
        out.emplace_back(p + "w_down", l.w_down);
    }
    out.emplace_back("final_norm", final_norm);
    out.emplace_back("head", head);
    return out;
}

long long Model::parameter_count() const {
    long long n = 0;
    for (const auto& [name, t] : named_tensors()) n += static_cast<long long>(t.numel());
    return n;
}

namespace {

Tensor init_normal(const Shape& shape, double stddev, Rng& rng, bool requires_grad = true) {
    std::vector<double> v(shape_numel(shape));
    for (auto& x : v) x = rng.normal(0.0, stddev);
    return Tensor::from_values(shape, std::move(v), requires_grad);
}

}  // namespace

Model build_model(const ModelConfig& config, uint64_t seed) {
    config.validate();
    Model m;
    m.config = config;
    m.seed = seed;
    const int d = config.d_model;
    const double sigma = 0.02;
    const double residual_sigma = sigma / std::sqrt(2.0 * config.n_layers);

    uint64_t stream = 0;
    auto next_rng = [&] { return Rng(seed, stream++); };

    {
        Rng r = next_rng();
        m.tok_emb = init_normal({config.vocab_size, d}, sigma, r);
    }
    {
        Rng r = next_rng();
        m.pos_emb = init_normal({config.max_seq, d}, sigma, r);
    }
    {
        Rng r = next_rng();
        m.patch_emb = init_normal({config.n_attrs, config.d_patch}, 1.0, r,
                                  /*requires_grad=*/false);  // frozen vision features
    }
    {
        Rng r = next_rng();
        m.patch_proj = init_normal({config.d_patch, d}, sigma, r);
    }
    m.layers.resize(static_cast<size_t>(config.n_layers));
    for (auto& l : m.layers) {
        l.attn_norm = Tensor::full({d}, 1.0, true);
        {
            Rng r = next_rng();
            l.wq = init_normal({d, d}, sigma, r);
        }
        {
            Rng r = next_rng();
            l.wk = init_normal({d, d}, sigma, r);
        }
        {
            Rng r = next_rng();
            l.wv = init_normal({d, d}, sigma, r);
        }
        {
            Rng r = next_rng();
            l.wo = init_normal({d, d}, residual_sigma, r);
        }
        l.ffn_norm = Tensor::full({d}, 1.0, true);
        {
            Rng r = next_rng();
            l.w_up = init_normal({d, config.d_ff}, sigma, r);
        }
        {
            Rng r = next_rng();
            l.w_down = init_normal({config.d_ff, d}, residual_sigma, r);
        }
    }
    m.final_norm = Tensor::full({d}, 1.0, true);
    {
        Rng r = next_rng();
        m.head = init_normal({d, config.vocab_size}, sigma, r);
    }
    return m;
}

namespace {

// Padded-batch view assembled from the input sequences.
struct BatchState {
    int batch = 0;
    int seq_len = 0;
    std::vector<int> tokens;        // -1 marks synthetic pooled rows
    std::vector<Role> roles;
    std::vector<double> loss_mask;
    std::vector<int> visual_start;  // per sample
    int visual_len = 0;             // shared across the batch
};

constexpr double kMaskOff = -1e30;

BatchState make_batch(const std::vector<const RoleTaggedSequence*>& batch, int max_seq) {
    if (batch.empty()) throw std::invalid_argument("forward: empty batch");
    BatchState st;
    st.batch = static_cast<int>(batch.size());
    int vlen = -1;
    for (const auto* seq : batch) {
        seq->validate();
        st.seq_len = std::max(st.seq_len, seq->length());
        if (vlen < 0) vlen = seq->visual_len();
        if (seq->visual_len() != vlen) {
            throw std::invalid_argument("forward: batch mixes visual span lengths");
        }
    }
    if (st.seq_len > max_seq) {
        throw std::invalid_argument("forward: sequence length " + std::to_string(st.seq_len) +
                                    " exceeds max_seq " + std::to_string(max_seq));
    }
    st.visual_len = vlen;
    const size_t n = static_cast<size_t>(st.batch) * st.seq_len;
    st.tokens.assign(n, 0);
    st.roles.assign(n, Role::pad);
    st.loss_mask.assign(n, 0.0);
    st.visual_start.resize(static_cast<size_t>(st.batch));
    for (int b = 0; b < st.batch; ++b) {
        const auto& seq = *batch[static_cast<size_t>(b)];
        st.visual_start[static_cast<size_t>(b)] = seq.visual_start;
        const size_t off = static_cast<size_t>(b) * st.seq_len;
        for (int t = 0; t < seq.length(); ++t) {
            st.tokens[off + t] = seq.token_ids[static_cast<size_t>(t)];
            st.roles[off + t] = seq.roles[static_cast<size_t>(t)];
            st.loss_mask[off + t] = seq.loss_mask[static_cast<size_t>(t)];
        }
    }
    return st;
}

// Causal additive mask; pad keys are hidden from every later query and pad
// queries see only themselves so their softmax rows stay well-formed.
Tensor make_attn_mask(const BatchState& st, int n_heads) {
    const int B = st.batch, T = st.seq_len;
    std::vector<double> mask(static_cast<size_t>(B) * n_heads * T * T, kMaskOff);
    for (int b = 0; b < B; ++b) {
        const Role* roles = st.roles.data() + static_cast<size_t>(b) * T;
        for (int i = 0; i < T; ++i) {
            double* row0 = mask.data() +
                           ((static_cast<size_t>(b) * n_heads) * T + i) * T;
            for (int j = 0; j <= i; ++j) {
                if (roles[j] != Role::pad || j == i) row0[j] = 0.0;
            }
        }
        // Replicate the sample's mask across its heads.
        const size_t plane = static_cast<size_t>(T) * T;
        const double* src = mask.data() + static_cast<size_t>(b) * n_heads * plane;
        for (int h = 1; h < n_heads; ++h) {
            std::copy(src, src + plane,
                      mask.data() + (static_cast<size_t>(b) * n_heads + h) * plane);
        }
    }
    return Tensor::from_values({B * n_heads, T, T}, std::move(mask));
}

struct AttnOut {
    Tensor hidden;
    Tensor probs;  // [B*H, T, T]
};

AttnOut attention_block(const Model& m, const Model::Layer& layer, const Tensor& x,
                        const Tensor& mask, int batch) {
    const int H = m.config.n_heads;
    const int dh = m.config.d_model / H;
    Tensor normed = ops::rmsnorm(x, layer.attn_norm);
    Tensor q = ops::split_heads(ops::matmul(normed, layer.wq), H);
    Tensor k = ops::split_heads(ops::matmul(normed, layer.wk), H);
    Tensor v = ops::split_heads(ops::matmul(normed, layer.wv), H);
    Tensor scores = ops::scale(ops::bmm(q, k, /*transpose_b=*/true),
                               1.0 / std::sqrt(static_cast<double>(dh)));
    Tensor probs = ops::softmax_rows(ops::add(scores, mask));
    Tensor ctx = ops::merge_heads(ops::bmm(probs, v), batch);
    Tensor out = ops::add(x, ops::matmul(ctx, layer.wo));
    return {std::move(out), std::move(probs)};
}

Tensor ffn_block(const Model::Layer& layer, const Tensor& x) {
    Tensor normed = ops::rmsnorm(x, layer.ffn_norm);
    Tensor up = ops::gelu(ops::matmul(normed, layer.w_up));
    return ops::add(x, ops::matmul(up, layer.w_down));
}

// Mean (or max) over heads of attention into each visual key from the
// chosen query rows of this sample's plane.
std::vector<double> importance_scores(const Tensor& probs, const BatchState& st, int b,
                                      int n_heads, const CompressorSpec& spec) {
    const int T = st.seq_len;
    const int vs = st.visual_start[static_cast<size_t>(b)];
    const int L = st.visual_len;
    const Role* roles = st.roles.data() + static_cast<size_t>(b) * T;

    std::vector<int> queries;
    if (spec.kind == CompressorKind::attn_topk) {
        // Last instruction-role position.
        for (int t = T - 1; t >= 0; --t) {
            if (roles[t] == Role::instruction) {
                queries.push_back(t);
                break;
            }
        }
        if (queries.empty()) {
            throw std::runtime_error("attn_topk: sample has no instruction position");
        }
    } else {
        for (int t = 0; t < T; ++t) {
            if (roles[t] != Role::visual && roles[t] != Role::pad) queries.push_back(t);
        }
        if (queries.empty()) throw std::runtime_error("vcc_lite: sample has no non-visual tokens");
    }

    const double* p = probs.values().data();
    std::vector<double> importance(static_cast<size_t>(L), 0.0);
    for (int i = 0; i < L; ++i) {
        double agg = spec.importance_head_max ? -1.0 : 0.0;
        for (int h = 0; h < n_heads; ++h) {
            const double* plane = p + (static_cast<size_t>(b) * n_heads + h) *
                                          static_cast<size_t>(T) * T;
            double q_mean = 0.0;
            for (int q : queries) q_mean += plane[static_cast<size_t>(q) * T + vs + i];
            q_mean /= static_cast<double>(queries.size());
            if (spec.importance_head_max) {
                agg = std::max(agg, q_mean);
            } else {
                agg += q_mean;
            }
        }
        importance[static_cast<size_t>(i)] =
            spec.importance_head_max ? agg : agg / static_cast<double>(n_heads);
    }
    return importance;
}

// Tape op: rebuilds the batch with each sample's visual span replaced by
// its compressed rows. Gradient sends 1/|members| to each source row.
Tensor splice_compressed(const Tensor& hidden, const BatchState& st,
                         const std::vector<CompressionResult>& results, int l_out) {
    const int B = st.batch, T = st.seq_len, L = st.visual_len;
    const int C = hidden.dim(2);
    const int T_out = T - L + l_out;
    std::vector<double> out(static_cast<size_t>(B) * T_out * C);
    const double* hp = hidden.values().data();
    for (int b = 0; b < B; ++b) {
        const int vs = st.visual_start[static_cast<size_t>(b)];
        const double* src = hp + static_cast<size_t>(b) * T * C;
        double* dst = out.data() + static_cast<size_t>(b) * T_out * C;
        std::copy(src, src + static_cast<size_t>(vs) * C, dst);
        const auto& map = results[static_cast<size_t>(b)].source_map;
        for (int j = 0; j < l_out; ++j) {
            std::vector<int> abs_members;
            abs_members.reserve(map[static_cast<size_t>(j)].size());
            for (int rel : map[static_cast<size_t>(j)]) abs_members.push_back(vs + rel);
            mean_of_rows(src, C, abs_members, dst + static_cast<size_t>(vs + j) * C);
        }
        std::copy(src + static_cast<size_t>(vs + L) * C, src + static_cast<size_t>(T) * C,
                  dst + static_cast<size_t>(vs + l_out) * C);
    }

    auto node = std::make_shared<TensorNode>();
    node->shape = {B, T_out, C};
    node->value = std::move(out);
    node->op = "splice_compressed";
    Tensor result(node);
    if (grad_enabled() && hidden.requires_grad()) {
        node->requires_grad = true;
        node->parents = {hidden.node_ptr()};
        TensorNode* rn = node.get();
        TensorNode* hn = hidden.node();
        auto spans = st.visual_start;
        std::vector<std::vector<std::vector<int>>> maps;
        maps.reserve(results.size());
        for (const auto& r : results) maps.push_back(r.source_map);
        rn->backward_fn = [rn, hn, spans, maps, B, T, T_out, L, l_out, C] {
            hn->ensure_grad();
            const double* g = rn->grad.data();
            double* dh = hn->grad.data();
            const size_t c = static_cast<size_t>(C);
            for (int b = 0; b < B; ++b) {
                const int vs = spans[static_cast<size_t>(b)];
                const double* gb = g + static_cast<size_t>(b) * T_out * C;
                double* db = dh + static_cast<size_t>(b) * T * C;
                for (int t = 0; t < vs; ++t) {
                    const double* grow = gb + static_cast<size_t>(t) * c;
                    double* drow = db + static_cast<size_t>(t) * c;
                    for (size_t i = 0; i < c; ++i) drow[i] += grow[i];
                }
                const auto& map = maps[static_cast<size_t>(b)];
                for (int j = 0; j < l_out; ++j) {
                    const double* grow = gb + static_cast<size_t>(vs + j) * c;
                    const double w = 1.0 / static_cast<double>(map[static_cast<size_t>(j)].size());
                    for (int rel : map[static_cast<size_t>(j)]) {
                        double* drow = db + static_cast<size_t>(vs + rel) * c;
                        for (size_t i = 0; i < c; ++i) drow[i] += grow[i] * w;
                    }
                }
                for (int t = vs + l_out; t < T_out; ++t) {
                    const double* grow = gb + static_cast<size_t>(t) * c;
                    double* drow = db + static_cast<size_t>(t + L - l_out) * c;
                    for (size_t i = 0; i < c; ++i) drow[i] += grow[i];
                }
            }
        };
    }
    return result;
}

// Shrinks the bookkeeping arrays the same way splice_compressed shrinks
// the hidden states.
void splice_batch_state(BatchState& st, int l_out) {
    const int B = st.batch, T = st.seq_len, L = st.visual_len;
    const int T_out = T - L + l_out;
    std::vector<int> tokens(static_cast<size_t>(B) * T_out);
    std::vector<Role> roles(static_cast<size_t>(B) * T_out);
    std::vector<double> mask(static_cast<size_t>(B) * T_out);
    for (int b = 0; b < B; ++b) {
        const int vs = st.visual_start[static_cast<size_t>(b)];
        const size_t src = static_cast<size_t>(b) * T;
        const size_t dst = static_cast<size_t>(b) * T_out;
        for (int t = 0; t < vs; ++t) {
            tokens[dst + t] = st.tokens[src + t];
            roles[dst + t] = st.roles[src + t];
            mask[dst + t] = st.loss_mask[src + t];
        }
        for (int j = 0; j < l_out; ++j) {
            tokens[dst + vs + j] = -1;  // pooled rows have no source token
            roles[dst + vs + j] = Role::visual;
            mask[dst + vs + j] = 0.0;
        }
        for (int t = vs + l_out; t < T_out; ++t) {
            tokens[dst + t] = st.tokens[src + t + L - l_out];
            roles[dst + t] = st.roles[src + t + L - l_out];
            mask[dst + t] = st.loss_mask[src + t + L - l_out];
        }
    }
    st.tokens = std::move(tokens);
    st.roles = std::move(roles);
    st.loss_mask = std::move(mask);
    st.seq_len = T_out;
}

void capture_layer(AttentionCapture& cap, const Tensor& probs, int seq_len) {
    cap.layers.push_back(probs.values());
    cap.layer_lens.push_back(seq_len);
}

}  // namespace

ForwardResult forward(const Model& model, const std::vector<const RoleTaggedSequence*>& batch,
                      const CompressorSpec& spec, bool capture, uint64_t call_seed) {
    const auto& cfg = model.config;
    const bool compressing = !spec.is_identity();
    if (compressing && (spec.layer < 1 || spec.layer > cfg.n_layers)) {
        throw std::invalid_argument("forward: compressor layer " + std::to_string(spec.layer) +
                                    " outside [1, " + std::to_string(cfg.n_layers) + "]");
    }

    BatchState st = make_batch(batch, cfg.max_seq);
    const int B = st.batch;
    const int T0 = st.seq_len;
    const size_t n0 = static_cast<size_t>(B) * T0;

    // Input embeddings: text rows from the vocab table, visual rows from
    // the frozen patch table through the trainable projection, plus
    // learned absolute positions. Positions are embedded once; splicing
    // later keeps whatever positional signal rows already carry.
    std::vector<int> text_ids(n0, 0), vis_ids(n0, 0), pos_ids(n0, 0);
    std::vector<double> text_w(n0, 0.0), vis_w(n0, 0.0);
    for (int b = 0; b < B; ++b) {
        for (int t = 0; t < T0; ++t) {
            const size_t i = static_cast<size_t>(b) * T0 + t;
            pos_ids[i] = t;
            if (st.roles[i] == Role::visual) {
                vis_ids[i] = st.tokens[i];
                vis_w[i] = 1.0;
            } else {
                text_ids[i] = st.tokens[i];
                text_w[i] = 1.0;
            }
        }
    }
    Tensor x = ops::add(
        ops::add(ops::mul_rows(ops::embedding(model.tok_emb, text_ids, B, T0), text_w),
                 ops::mul_rows(ops::matmul(ops::embedding(model.patch_emb, vis_ids, B, T0),
                                           model.patch_proj),
                               vis_w)),
        ops::embedding(model.pos_emb, pos_ids, B, T0));

    ForwardResult res;
    res.batch = B;
    if (capture) {
        res.capture.emplace();
        res.capture->batch = B;
        res.capture->n_heads = cfg.n_heads;
    }

    Tensor mask = make_attn_mask(st, cfg.n_heads);
    for (int l = 0; l < cfg.n_layers; ++l) {
        res.layer_lengths.push_back(st.seq_len);
        AttnOut attn = attention_block(model, model.layers[static_cast<size_t>(l)], x, mask, B);
        if (capture) capture_layer(*res.capture, attn.probs, st.seq_len);
        x = ffn_block(model.layers[static_cast<size_t>(l)], attn.hidden);

        if (compressing && l + 1 == spec.layer) {
            const int L = st.visual_len;
            const int C = cfg.d_model;
            std::vector<CompressionResult> results;
            results.reserve(static_cast<size_t>(B));
            int l_out = -1;
            for (int b = 0; b < B; ++b) {
                const int vs = st.visual_start[static_cast<size_t>(b)];
                const double* span = x.values().data() +
                                     (static_cast<size_t>(b) * st.seq_len + vs) * C;
                std::vector<double> importance;
                if (spec.kind == CompressorKind::attn_topk ||
                    spec.kind == CompressorKind::vcc_lite) {
                    importance = importance_scores(attn.probs, st, b, cfg.n_heads, spec);
                }
                CompressionResult r = compress_span(spec, span, L, C, importance,
                                                    call_seed * 0x9e3779b9ULL +
                                                        static_cast<uint64_t>(b));
                if (r.l_out() > L) {
                    throw std::runtime_error("forward: compressor produced " +
                                             std::to_string(r.l_out()) + " tokens from a span of " +
                                             std::to_string(L));
                }
                if (l_out < 0) l_out = r.l_out();
                if (r.l_out() != l_out) {
                    throw std::runtime_error("forward: compressor output length varies in batch");
                }
                results.push_back(std::move(r));
            }
            x = splice_compressed(x, st, results, l_out);
            splice_batch_state(st, l_out);
            st.visual_len = l_out;
            mask = make_attn_mask(st, cfg.n_heads);
        }
    }

    Tensor final_hidden = ops::rmsnorm(x, model.final_norm);
    res.logits = ops::matmul(final_hidden, model.head);
    res.seq_len = st.seq_len;
    res.tokens = std::move(st.tokens);
    res.roles = std::move(st.roles);
    res.loss_mask = std::move(st.loss_mask);
    return res;
}

ForwardResult forward(const Model& model, const RoleTaggedSequence& seq,
                      const CompressorSpec& spec, bool capture, uint64_t call_seed) {
    return forward(model, std::vector<const RoleTaggedSequence*>{&seq}, spec, capture, call_seed);
}

std::vector<std::vector<int>> generate_answer(const Model& model,
                                              const std::vector<const RoleTaggedSequence*>& prompts,
                                              const CompressorSpec& spec, int max_new, int eos_id) {
    if (prompts.empty()) return {};
    NoGradGuard no_grad;
    const int B = static_cast<int>(prompts.size());
    const int prompt_len = prompts[0]->length();
    for (const auto* p : prompts) {
        if (p->length() != prompt_len) {
            throw std::invalid_argument("generate_answer: prompts must share one length");
        }
    }
    if (prompt_len + max_new > model.config.max_seq) {
        throw std::invalid_argument("generate_answer: prompt length " +
                                    std::to_string(prompt_len) + " plus " +
                                    std::to_string(max_new) + " new tokens exceeds max_seq " +
                                    std::to_string(model.config.max_seq));
    }

    std::vector<RoleTaggedSequence> work;
    work.reserve(static_cast<size_t>(B));
    for (const auto* p : prompts) work.push_back(*p);
    std::vector<std::vector<int>> out(static_cast<size_t>(B));
    std::vector<bool> done(static_cast<size_t>(B), false);

    for (int step = 0; step < max_new; ++step) {
        std::vector<const RoleTaggedSequence*> view;
        view.reserve(work.size());
        for (const auto& w : work) view.push_back(&w);
        ForwardResult fr = forward(model, view, spec, /*capture=*/false, /*call_seed=*/0);
        const int T = fr.seq_len;
        const int V = model.config.vocab_size;
        bool all_done = true;
        for (int b = 0; b < B; ++b) {
            if (done[static_cast<size_t>(b)]) continue;
            const double* row = fr.logits.values().data() +
                                (static_cast<size_t>(b) * T + (T - 1)) * V;
            int best = 0;
            for (int v = 1; v < V; ++v) {
                if (row[v] > row[best]) best = v;
            }
            if (best == eos_id) {
                done[static_cast<size_t>(b)] = true;
            } else {
                out[static_cast<size_t>(b)].push_back(best);
                all_done = false;
            }
            auto& w = work[static_cast<size_t>(b)];
            w.token_ids.push_back(best);
            w.roles.push_back(Role::answer);
            w.loss_mask.push_back(1.0);
        }
        if (all_done) break;
    }
    return out;
}

std::vector<int> generate_answer(const Model& model, const RoleTaggedSequence& prompt,
                                 const CompressorSpec& spec, int max_new, int eos_id) {
    return generate_answer(model, std::vector<const RoleTaggedSequence*>{&prompt}, spec, max_new,
                           eos_id)[0];
}

}  // namespace vclab
