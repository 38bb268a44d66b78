#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vclab/compressor.hpp"
#include "vclab/tensor.hpp"

namespace vclab {

struct ModelConfig {
    int n_layers = 8;
    int d_model = 128;
    int n_heads = 4;
    int d_ff = 512;
    int vocab_size = 64;
    int max_seq = 128;
    int visual_len = 64;
    // Synthetic patch embedder standing in for a frozen vision tower: a
    // fixed per-attribute table plus a trainable projection into d_model.
    int d_patch = 16;
    int n_attrs = 8;

    void validate() const;
};

enum class Role : uint8_t { system = 0, visual = 1, instruction = 2, answer = 3, pad = 4 };

const char* role_name(Role r);

// One example as the model consumes it. token_ids holds text-vocab ids
// except on the visual span, where it holds patch-table attribute ids.
struct RoleTaggedSequence {
    std::vector<int> token_ids;
    std::vector<Role> roles;
    int visual_start = 0;  // [visual_start, visual_end) covers every visual position
    int visual_end = 0;
    std::vector<double> loss_mask;  // nonzero exactly on answer positions

    int length() const { return static_cast<int>(token_ids.size()); }
    int visual_len() const { return visual_end - visual_start; }
    void validate() const;
};

// Post-softmax attention weights recorded per layer when requested.
// Layer l holds batch*heads*T_l*T_l weights at that layer's length.
struct AttentionCapture {
    int batch = 0;
    int n_heads = 0;
    std::vector<std::vector<double>> layers;
    std::vector<int> layer_lens;

    double at(int layer, int b, int head, int query, int key) const;
};

struct Model {
    ModelConfig config;
    uint64_t seed = 0;

    Tensor tok_emb;     // [vocab, d]
    Tensor pos_emb;     // [max_seq, d]
    Tensor patch_emb;   // [n_attrs, d_patch], frozen
    Tensor patch_proj;  // [d_patch, d]
    struct Layer {
        Tensor attn_norm, wq, wk, wv, wo;
        Tensor ffn_norm, w_up, w_down;
    };
    std::vector<Layer> layers;
    Tensor final_norm;
    Tensor head;  // [d, vocab]

    // Trainable parameters in fixed order (excludes the frozen patch table).
    std::vector<Tensor> parameters() const;
    // Every tensor, named, for checkpointing.
    std::vector<std::pair<std::string, Tensor>> named_tensors() const;
    long long parameter_count() const;  // trainable + frozen
};

// Deterministic init: normal(0, 0.02) for projections and embeddings with
// the residual-side projections scaled by 1/sqrt(2N), unit gains for the
// norms, normal(0, 1) for the frozen patch table.
Model build_model(const ModelConfig& config, uint64_t seed);

struct ForwardResult {
    Tensor logits;  // [B, T_out, vocab]
    int batch = 0;
    int seq_len = 0;  // post-splice length T_out
    // Post-splice bookkeeping, row-major B x T_out. Pooled visual rows
    // carry token id -1 and zero loss mask.
    std::vector<int> tokens;
    std::vector<Role> roles;
    std::vector<double> loss_mask;
    std::vector<long long> layer_lengths;  // sequence length seen by each layer
    std::optional<AttentionCapture> capture;
};

// Teacher-forced forward over a padded batch. All sequences must share
// visual_len; shorter ones are padded at the end. When spec is not the
// identity, the visual span's hidden states are compressed after layer
// spec.layer and layers above run on the shortened sequence; rows outside
// the span are never touched. call_seed feeds seeded compressors so the
// trainer can vary draws per step while staying reproducible.
ForwardResult forward(const Model& model, const std::vector<const RoleTaggedSequence*>& batch,
                      const CompressorSpec& spec, bool capture = false, uint64_t call_seed = 0);

ForwardResult forward(const Model& model, const RoleTaggedSequence& seq,
                      const CompressorSpec& spec, bool capture = false, uint64_t call_seed = 0);

// Greedy decoding of up to max_new tokens per prompt; stops per-sample at
// eos_id. Prompts must all have the same length (callers bucket by
// length). Gradients are never recorded.
std::vector<std::vector<int>> generate_answer(const Model& model,
                                              const std::vector<const RoleTaggedSequence*>& prompts,
                                              const CompressorSpec& spec, int max_new, int eos_id);

std::vector<int> generate_answer(const Model& model, const RoleTaggedSequence& prompt,
                                 const CompressorSpec& spec, int max_new, int eos_id);

// Single-file binary checkpoint (magic, version byte, config echo with
// seed, then shape-headed f64 tensors); round-trips bit-exactly.
void save_checkpoint(const Model& model, const std::string& path);
Model load_checkpoint(const std::string& path);

}  // namespace vclab
