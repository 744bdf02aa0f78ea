#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ctk/linalg.hpp"
#include "ctk/prng.hpp"

namespace ctk {

enum class HeadVariant { standard_pooled, mean_last_two };
enum class RunMode { train, eval };

struct EncoderConfig {
    std::size_t num_layers = 2;
    std::size_t hidden_dim = 32;
    std::size_t num_heads = 2;
    std::size_t ff_dim = 0;  // 0 -> 4 * hidden_dim
    std::size_t max_seq_len = 64;
    std::size_t vocab_size = 0;
    double dropout_p = 0.1;
    double head_dropout_p = -1.0;  // < 0 -> dropout_p
    HeadVariant head_variant = HeadVariant::mean_last_two;

    std::size_t ff() const { return ff_dim == 0 ? 4 * hidden_dim : ff_dim; }
    double head_p() const { return head_dropout_p < 0.0 ? dropout_p : head_dropout_p; }
    std::size_t head_dim() const { return hidden_dim / num_heads; }
    void validate() const;
};

struct LayerWeights {
    Matrix q_w, q_b, k_w, k_b, v_w, v_b, o_w, o_b;
    Matrix ln1_scale, ln1_offset;
    Matrix ff1_w, ff1_b, ff2_w, ff2_b;
    Matrix ln2_scale, ln2_offset;
};

struct EncoderWeights {
    Matrix tok_emb;  // vocab_size x hidden
    Matrix pos_emb;  // max_seq_len x hidden
    std::vector<LayerWeights> layers;
    Matrix pooler_w, pooler_b;  // standard head dense
    Matrix cls_w, cls_b;        // hidden x 2, 1 x 2

    static EncoderWeights zeros(const EncoderConfig& config);

    // Visits every parameter tensor with a stable name; iteration order is
    // fixed and shared by Adam, checkpoints, and the gradient checker.
    void for_each(const std::function<void(const std::string&, Matrix&)>& fn);
    void for_each(
        const std::function<void(const std::string&, const Matrix&)>& fn) const;
};

// states[0] = embedding output, states[l] = output of block l.
struct HiddenStates {
    std::vector<Matrix> states;
    std::size_t valid_len = 0;  // positions beyond this are padding
};

struct Logits {
    double negative = 0.0;
    double positive = 0.0;
};

// Per-layer intermediates kept for the backward pass.
struct LayerCache {
    Matrix x_in, q, k, v;
    std::vector<Matrix> attn_probs;  // one n x n matrix per head
    Matrix attn_concat;
    std::vector<double> attn_drop_mask, ff_drop_mask;
    Matrix ln1_norm;  // x-hat
    std::vector<double> ln1_inv_sigma;
    Matrix x_mid, ff_pre, ff_act;
    Matrix ln2_norm;
    std::vector<double> ln2_inv_sigma;
};

struct ForwardCache {
    std::vector<int> ids;
    std::size_t valid_len = 0;
    HiddenStates hidden;
    std::vector<LayerCache> layers;
    // head intermediates
    std::vector<double> pool_pre, pool_out, head_drop_mask;
    Logits logits;
};

EncoderWeights init_weights(const EncoderConfig& config, std::uint64_t seed);

// Full forward pass. rng is consumed only in train mode (dropout masks);
// valid_len = 0 means the whole sequence is valid.
ForwardCache forward(const std::vector<int>& ids, const EncoderWeights& weights,
                     const EncoderConfig& config, RunMode mode, SplitMix64& rng,
                     std::size_t valid_len = 0);

// Gradient of the scalar loss w.r.t. every parameter, given dloss/dlogits.
EncoderWeights backward(const ForwardCache& cache, const EncoderWeights& weights,
                        const EncoderConfig& config, const Logits& dlogits);

std::vector<double> pool_standard(const HiddenStates& states,
                                  const EncoderWeights& weights);
std::vector<double> pool_mean_last_two(const HiddenStates& states);

std::vector<double> apply_dropout(const std::vector<double>& v, double p,
                                  RunMode mode, SplitMix64& rng);

Logits classify(const std::vector<double>& pooled, const EncoderWeights& weights);

void save_checkpoint(const std::string& path, const EncoderConfig& config,
                     const EncoderWeights& weights);
std::pair<EncoderConfig, EncoderWeights> load_checkpoint(const std::string& path);

}  // namespace ctk
