#include "ctk/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "ctk/errors.hpp"

namespace ctk {

namespace {

constexpr double kLayerNormEps = 1e-12;
constexpr double kMaskValue = -1e30;

double gelu(double x) {
    return 0.5 * x * (1.0 + std::erf(x * 0.7071067811865475244));
}

double gelu_grad(double x) {
    double cdf = 0.5 * (1.0 + std::erf(x * 0.7071067811865475244));
    double pdf = std::exp(-0.5 * x * x) * 0.3989422804014326779;
    return cdf + x * pdf;
}

// y = gamma * (x - mu) / sigma + beta, per row. Stores x-hat and 1/sigma.
void layer_norm(const Matrix& x, const Matrix& scale, const Matrix& offset,
                Matrix& norm, std::vector<double>& inv_sigma, Matrix& out) {
    const std::size_t n = x.rows, h = x.cols;
    norm = Matrix(n, h);
    out = Matrix(n, h);
    inv_sigma.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = x.row(i);
        double mean = 0.0;
        for (std::size_t j = 0; j < h; ++j) mean += row[j];
        mean /= static_cast<double>(h);
        double var = 0.0;
        for (std::size_t j = 0; j < h; ++j) {
            double d = row[j] - mean;
            var += d * d;
        }
        var /= static_cast<double>(h);
        double is = 1.0 / std::sqrt(var + kLayerNormEps);
        inv_sigma[i] = is;
        for (std::size_t j = 0; j < h; ++j) {
            double xh = (row[j] - mean) * is;
            norm(i, j) = xh;
            out(i, j) = scale(0, j) * xh + offset(0, j);
        }
    }
}

// Given dL/dy, accumulates parameter grads and returns dL/dx.
void layer_norm_backward(const Matrix& dy, const Matrix& norm,
                         const std::vector<double>& inv_sigma, const Matrix& scale,
                         Matrix& dscale, Matrix& doffset, Matrix& dx) {
    const std::size_t n = dy.rows, h = dy.cols;
    dx = Matrix(n, h);
    for (std::size_t i = 0; i < n; ++i) {
        double mean_dxh = 0.0, mean_dxh_xh = 0.0;
        for (std::size_t j = 0; j < h; ++j) {
            double dyv = dy(i, j);
            dscale(0, j) += dyv * norm(i, j);
            doffset(0, j) += dyv;
            double dxh = dyv * scale(0, j);
            mean_dxh += dxh;
            mean_dxh_xh += dxh * norm(i, j);
        }
        mean_dxh /= static_cast<double>(h);
        mean_dxh_xh /= static_cast<double>(h);
        for (std::size_t j = 0; j < h; ++j) {
            double dxh = dy(i, j) * scale(0, j);
            dx(i, j) = inv_sigma[i] * (dxh - mean_dxh - norm(i, j) * mean_dxh_xh);
        }
    }
}

std::vector<double> make_dropout_mask(std::size_t n, double p, RunMode mode,
                                      SplitMix64& rng) {
    std::vector<double> mask(n, 1.0);
    if (mode == RunMode::train && p > 0.0) {
        double keep_scale = 1.0 / (1.0 - p);
        for (std::size_t i = 0; i < n; ++i)
            mask[i] = rng.next_double() < p ? 0.0 : keep_scale;
    }
    return mask;
}

void apply_mask(Matrix& m, const std::vector<double>& mask) {
    for (std::size_t i = 0; i < m.data.size(); ++i) m.data[i] *= mask[i];
}

void add_colsum(const Matrix& m, Matrix& bias_grad) {
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) bias_grad(0, j) += m(i, j);
}

Matrix head_slice(const Matrix& m, std::size_t head, std::size_t d) {
    Matrix out(m.rows, d);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < d; ++j) out(i, j) = m(i, head * d + j);
    return out;
}

void head_slice_add(Matrix& full, const Matrix& part, std::size_t head,
                    std::size_t d) {
    for (std::size_t i = 0; i < part.rows; ++i)
        for (std::size_t j = 0; j < d; ++j) full(i, head * d + j) += part(i, j);
}

}  // namespace

void EncoderConfig::validate() const {
    if (hidden_dim == 0 || num_heads == 0 || num_layers == 0)
        throw ConfigError("encoder dimensions must be positive");
    if (hidden_dim % num_heads != 0)
        throw ConfigError("hidden_dim " + std::to_string(hidden_dim) +
                          " not divisible by num_heads " + std::to_string(num_heads));
    if (max_seq_len < 2)
        throw ConfigError("max_seq_len must be at least 2");
    if (vocab_size == 0) throw ConfigError("vocab_size must be positive");
    if (dropout_p < 0.0 || dropout_p >= 1.0)
        throw ConfigError("dropout_p must be in [0, 1)");
    if (head_dropout_p >= 1.0) throw ConfigError("head dropout must be below 1");
    if (head_variant == HeadVariant::mean_last_two && num_layers < 2)
        throw ConfigError("mean_last_two head requires at least 2 layers");
}

EncoderWeights EncoderWeights::zeros(const EncoderConfig& c) {
    EncoderWeights w;
    const std::size_t h = c.hidden_dim, f = c.ff();
    w.tok_emb = Matrix(c.vocab_size, h);
    w.pos_emb = Matrix(c.max_seq_len, h);
    w.layers.resize(c.num_layers);
    for (LayerWeights& l : w.layers) {
        l.q_w = Matrix(h, h); l.q_b = Matrix(1, h);
        l.k_w = Matrix(h, h); l.k_b = Matrix(1, h);
        l.v_w = Matrix(h, h); l.v_b = Matrix(1, h);
        l.o_w = Matrix(h, h); l.o_b = Matrix(1, h);
        l.ln1_scale = Matrix(1, h); l.ln1_offset = Matrix(1, h);
        l.ff1_w = Matrix(h, f); l.ff1_b = Matrix(1, f);
        l.ff2_w = Matrix(f, h); l.ff2_b = Matrix(1, h);
        l.ln2_scale = Matrix(1, h); l.ln2_offset = Matrix(1, h);
    }
    w.pooler_w = Matrix(h, h);
    w.pooler_b = Matrix(1, h);
    w.cls_w = Matrix(h, 2);
    w.cls_b = Matrix(1, 2);
    return w;
}

void EncoderWeights::for_each(
    const std::function<void(const std::string&, Matrix&)>& fn) {
    fn("tok_emb", tok_emb);
    fn("pos_emb", pos_emb);
    for (std::size_t i = 0; i < layers.size(); ++i) {
        std::string p = "layer" + std::to_string(i) + ".";
        LayerWeights& l = layers[i];
        fn(p + "q_w", l.q_w); fn(p + "q_b", l.q_b);
        fn(p + "k_w", l.k_w); fn(p + "k_b", l.k_b);
        fn(p + "v_w", l.v_w); fn(p + "v_b", l.v_b);
        fn(p + "o_w", l.o_w); fn(p + "o_b", l.o_b);
        fn(p + "ln1_scale", l.ln1_scale); fn(p + "ln1_offset", l.ln1_offset);
        fn(p + "ff1_w", l.ff1_w); fn(p + "ff1_b", l.ff1_b);
        fn(p + "ff2_w", l.ff2_w); fn(p + "ff2_b", l.ff2_b);
        fn(p + "ln2_scale", l.ln2_scale); fn(p + "ln2_offset", l.ln2_offset);
    }
    fn("pooler_w", pooler_w);
    fn("pooler_b", pooler_b);
    fn("cls_w", cls_w);
    fn("cls_b", cls_b);
}

void EncoderWeights::for_each(
    const std::function<void(const std::string&, const Matrix&)>& fn) const {
    const_cast<EncoderWeights*>(this)->for_each(
        [&](const std::string& name, Matrix& m) { fn(name, m); });
}

EncoderWeights init_weights(const EncoderConfig& config, std::uint64_t seed) {
    config.validate();
    EncoderWeights w = EncoderWeights::zeros(config);
    SplitMix64 rng(seed);
    w.for_each([&](const std::string& name, Matrix& m) {
        if (name.find("ln1_scale") != std::string::npos ||
            name.find("ln2_scale") != std::string::npos) {
            for (double& v : m.data) v = 1.0;
        } else if (name.find("ln1_offset") != std::string::npos ||
                   name.find("ln2_offset") != std::string::npos ||
                   name.ends_with("_b")) {
            // biases and layer-norm offsets start at zero
        } else {
            for (double& v : m.data) v = 0.02 * rng.next_normal();
        }
    });
    return w;
}

ForwardCache forward(const std::vector<int>& ids, const EncoderWeights& weights,
                     const EncoderConfig& config, RunMode mode, SplitMix64& rng,
                     std::size_t valid_len) {
    config.validate();
    const std::size_t n = ids.size();
    if (n == 0) throw ContractError("forward requires a non-empty sequence");
    if (n > config.max_seq_len)
        throw ValidationError("sequence length " + std::to_string(n) +
                              " exceeds max_seq_len " +
                              std::to_string(config.max_seq_len));
    for (int id : ids)
        if (id < 0 || static_cast<std::size_t>(id) >= config.vocab_size)
            throw ContractError("token id out of range: " + std::to_string(id));
    if (valid_len == 0 || valid_len > n) valid_len = n;

    const std::size_t h = config.hidden_dim;
    const std::size_t heads = config.num_heads;
    const std::size_t d = config.head_dim();
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

    ForwardCache cache;
    cache.ids = ids;
    cache.valid_len = valid_len;
    cache.hidden.valid_len = valid_len;

    Matrix x(n, h);
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t j = 0; j < h; ++j)
            x(p, j) = weights.tok_emb(static_cast<std::size_t>(ids[p]), j) +
                      weights.pos_emb(p, j);
    cache.hidden.states.push_back(x);

    for (std::size_t li = 0; li < config.num_layers; ++li) {
        const LayerWeights& lw = weights.layers[li];
        LayerCache lc;
        lc.x_in = x;

        linalg::matmul(x, lw.q_w, lc.q);
        linalg::add_row_broadcast(lc.q, lw.q_b);
        linalg::matmul(x, lw.k_w, lc.k);
        linalg::add_row_broadcast(lc.k, lw.k_b);
        linalg::matmul(x, lw.v_w, lc.v);
        linalg::add_row_broadcast(lc.v, lw.v_b);

        lc.attn_concat = Matrix(n, h);
        lc.attn_probs.resize(heads);
        for (std::size_t hd = 0; hd < heads; ++hd) {
            Matrix qh = head_slice(lc.q, hd, d);
            Matrix kh = head_slice(lc.k, hd, d);
            Matrix vh = head_slice(lc.v, hd, d);
            Matrix scores;
            linalg::matmul_transb(qh, kh, scores);
            for (double& s : scores.data) s *= inv_sqrt_d;
            // padded key columns are masked out of every query row
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = valid_len; j < n; ++j) scores(i, j) = kMaskValue;
            for (std::size_t i = 0; i < n; ++i) softmax_inplace(scores.row(i), n);
            lc.attn_probs[hd] = scores;
            Matrix oh;
            linalg::matmul(scores, vh, oh);
            head_slice_add(lc.attn_concat, oh, hd, d);
        }

        Matrix attn_out;
        linalg::matmul(lc.attn_concat, lw.o_w, attn_out);
        linalg::add_row_broadcast(attn_out, lw.o_b);
        lc.attn_drop_mask = make_dropout_mask(n * h, config.dropout_p, mode, rng);
        apply_mask(attn_out, lc.attn_drop_mask);

        Matrix resid1(n, h);
        for (std::size_t i = 0; i < n * h; ++i)
            resid1.data[i] = x.data[i] + attn_out.data[i];
        layer_norm(resid1, lw.ln1_scale, lw.ln1_offset, lc.ln1_norm,
                   lc.ln1_inv_sigma, lc.x_mid);

        linalg::matmul(lc.x_mid, lw.ff1_w, lc.ff_pre);
        linalg::add_row_broadcast(lc.ff_pre, lw.ff1_b);
        lc.ff_act = lc.ff_pre;
        for (double& v : lc.ff_act.data) v = gelu(v);
        Matrix ff_out;
        linalg::matmul(lc.ff_act, lw.ff2_w, ff_out);
        linalg::add_row_broadcast(ff_out, lw.ff2_b);
        lc.ff_drop_mask = make_dropout_mask(n * h, config.dropout_p, mode, rng);
        apply_mask(ff_out, lc.ff_drop_mask);

        Matrix resid2(n, h);
        for (std::size_t i = 0; i < n * h; ++i)
            resid2.data[i] = lc.x_mid.data[i] + ff_out.data[i];
        Matrix x_out;
        layer_norm(resid2, lw.ln2_scale, lw.ln2_offset, lc.ln2_norm,
                   lc.ln2_inv_sigma, x_out);

        cache.layers.push_back(std::move(lc));
        x = std::move(x_out);
        cache.hidden.states.push_back(x);
    }

    // classification head
    std::vector<double> pooled;
    if (config.head_variant == HeadVariant::standard_pooled) {
        pooled = pool_standard(cache.hidden, weights);
        cache.pool_pre.assign(h, 0.0);  // pre-tanh, recomputed for backward
        const Matrix& last = cache.hidden.states.back();
        for (std::size_t j = 0; j < h; ++j) {
            double s = weights.pooler_b(0, j);
            for (std::size_t i = 0; i < h; ++i) s += last(0, i) * weights.pooler_w(i, j);
            cache.pool_pre[j] = s;
        }
        cache.head_drop_mask.assign(h, 1.0);
    } else {
        pooled = pool_mean_last_two(cache.hidden);
        cache.head_drop_mask = make_dropout_mask(h, config.head_p(), mode, rng);
        for (std::size_t j = 0; j < h; ++j) pooled[j] *= cache.head_drop_mask[j];
    }
    cache.pool_out = pooled;
    cache.logits = classify(pooled, weights);
    return cache;
}

std::vector<double> pool_standard(const HiddenStates& states,
                                  const EncoderWeights& weights) {
    if (states.states.empty() || states.states.back().rows == 0)
        throw ContractError("pool_standard requires a non-empty sequence");
    const Matrix& last = states.states.back();
    const std::size_t h = last.cols;
    std::vector<double> out(h, 0.0);
    for (std::size_t j = 0; j < h; ++j) {
        double s = weights.pooler_b(0, j);
        for (std::size_t i = 0; i < h; ++i) s += last(0, i) * weights.pooler_w(i, j);
        out[j] = std::tanh(s);
    }
    return out;
}

std::vector<double> pool_mean_last_two(const HiddenStates& states) {
    if (states.states.size() < 3)  // embedding layer + at least 2 blocks
        throw ConfigError("mean_last_two pooling requires at least 2 encoder layers");
    const Matrix& last = states.states[states.states.size() - 1];
    const Matrix& prev = states.states[states.states.size() - 2];
    if (last.rows == 0) throw ContractError("pool_mean_last_two: empty sequence");
    std::size_t valid = states.valid_len == 0 ? last.rows : states.valid_len;
    const std::size_t h = last.cols;
    std::vector<double> out(h, 0.0);
    for (std::size_t p = 0; p < valid; ++p)
        for (std::size_t j = 0; j < h; ++j)
            out[j] += 0.5 * (last(p, j) + prev(p, j));
    for (std::size_t j = 0; j < h; ++j) out[j] /= static_cast<double>(valid);
    return out;
}

std::vector<double> apply_dropout(const std::vector<double>& v, double p,
                                  RunMode mode, SplitMix64& rng) {
    if (p < 0.0 || p >= 1.0) throw ConfigError("dropout probability must be in [0, 1)");
    if (mode == RunMode::eval || p == 0.0) return v;
    std::vector<double> out(v.size());
    double keep_scale = 1.0 / (1.0 - p);
    for (std::size_t i = 0; i < v.size(); ++i)
        out[i] = rng.next_double() < p ? 0.0 : v[i] * keep_scale;
    return out;
}

Logits classify(const std::vector<double>& pooled, const EncoderWeights& weights) {
    if (pooled.size() != weights.cls_w.rows)
        throw ContractError("classify: pooled vector dimension mismatch");
    double l0 = weights.cls_b(0, 0), l1 = weights.cls_b(0, 1);
    for (std::size_t i = 0; i < pooled.size(); ++i) {
        l0 += pooled[i] * weights.cls_w(i, 0);
        l1 += pooled[i] * weights.cls_w(i, 1);
    }
    return {l0, l1};
}

EncoderWeights backward(const ForwardCache& cache, const EncoderWeights& weights,
                        const EncoderConfig& config, const Logits& dlogits) {
    const std::size_t n = cache.ids.size();
    const std::size_t h = config.hidden_dim;
    const std::size_t heads = config.num_heads;
    const std::size_t d = config.head_dim();
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    const std::size_t L = config.num_layers;

    EncoderWeights g = EncoderWeights::zeros(config);

    // head
    std::vector<double> dpooled(h, 0.0);
    for (std::size_t i = 0; i < h; ++i) {
        g.cls_w(i, 0) += cache.pool_out[i] * dlogits.negative;
        g.cls_w(i, 1) += cache.pool_out[i] * dlogits.positive;
        dpooled[i] = weights.cls_w(i, 0) * dlogits.negative +
                     weights.cls_w(i, 1) * dlogits.positive;
    }
    g.cls_b(0, 0) += dlogits.negative;
    g.cls_b(0, 1) += dlogits.positive;

    std::vector<Matrix> dstates(L + 1, Matrix(n, h));
    if (config.head_variant == HeadVariant::standard_pooled) {
        const Matrix& last = cache.hidden.states.back();
        for (std::size_t j = 0; j < h; ++j) {
            double t = std::tanh(cache.pool_pre[j]);
            double dpre = dpooled[j] * (1.0 - t * t);
            g.pooler_b(0, j) += dpre;
            for (std::size_t i = 0; i < h; ++i) {
                g.pooler_w(i, j) += last(0, i) * dpre;
                dstates[L](0, i) += dpre * weights.pooler_w(i, j);
            }
        }
    } else {
        std::size_t valid = cache.valid_len;
        for (std::size_t j = 0; j < h; ++j) {
            double dv = dpooled[j] * cache.head_drop_mask[j];
            double spread = 0.5 * dv / static_cast<double>(valid);
            for (std::size_t p = 0; p < valid; ++p) {
                dstates[L](p, j) += spread;
                dstates[L - 1](p, j) += spread;
            }
        }
    }

    for (std::size_t li = L; li-- > 0;) {
        const LayerWeights& lw = weights.layers[li];
        LayerWeights& lg = g.layers[li];
        const LayerCache& lc = cache.layers[li];
        const Matrix& dy = dstates[li + 1];

        Matrix dresid2;
        layer_norm_backward(dy, lc.ln2_norm, lc.ln2_inv_sigma, lw.ln2_scale,
                            lg.ln2_scale, lg.ln2_offset, dresid2);
        Matrix dx_mid = dresid2;  // residual branch
        Matrix dff_out = dresid2;
        apply_mask(dff_out, lc.ff_drop_mask);

        linalg::add_matmul_transa(lc.ff_act, dff_out, lg.ff2_w);
        add_colsum(dff_out, lg.ff2_b);
        Matrix dff_act;
        linalg::matmul_transb(dff_out, lw.ff2_w, dff_act);
        for (std::size_t i = 0; i < dff_act.data.size(); ++i)
            dff_act.data[i] *= gelu_grad(lc.ff_pre.data[i]);
        linalg::add_matmul_transa(lc.x_mid, dff_act, lg.ff1_w);
        add_colsum(dff_act, lg.ff1_b);
        Matrix dx_mid_ff;
        linalg::matmul_transb(dff_act, lw.ff1_w, dx_mid_ff);
        for (std::size_t i = 0; i < dx_mid.data.size(); ++i)
            dx_mid.data[i] += dx_mid_ff.data[i];

        Matrix dresid1;
        layer_norm_backward(dx_mid, lc.ln1_norm, lc.ln1_inv_sigma, lw.ln1_scale,
                            lg.ln1_scale, lg.ln1_offset, dresid1);
        Matrix dx_in = dresid1;  // residual branch
        Matrix dattn_out = dresid1;
        apply_mask(dattn_out, lc.attn_drop_mask);

        linalg::add_matmul_transa(lc.attn_concat, dattn_out, lg.o_w);
        add_colsum(dattn_out, lg.o_b);
        Matrix dconcat;
        linalg::matmul_transb(dattn_out, lw.o_w, dconcat);

        Matrix dq_full(n, h), dk_full(n, h), dv_full(n, h);
        for (std::size_t hd = 0; hd < heads; ++hd) {
            Matrix doh = head_slice(dconcat, hd, d);
            Matrix qh = head_slice(lc.q, hd, d);
            Matrix kh = head_slice(lc.k, hd, d);
            Matrix vh = head_slice(lc.v, hd, d);
            const Matrix& probs = lc.attn_probs[hd];

            Matrix dvh;
            linalg::matmul_transa(probs, doh, dvh);
            Matrix dprobs;
            linalg::matmul_transb(doh, vh, dprobs);

            Matrix dscores(n, n);
            for (std::size_t i = 0; i < n; ++i) {
                double dot = 0.0;
                for (std::size_t j = 0; j < n; ++j)
                    dot += dprobs(i, j) * probs(i, j);
                for (std::size_t j = 0; j < n; ++j)
                    dscores(i, j) = probs(i, j) * (dprobs(i, j) - dot);
            }
            Matrix dqh, dkh;
            linalg::matmul(dscores, kh, dqh);
            for (double& v : dqh.data) v *= inv_sqrt_d;
            linalg::matmul_transa(dscores, qh, dkh);
            for (double& v : dkh.data) v *= inv_sqrt_d;

            head_slice_add(dq_full, dqh, hd, d);
            head_slice_add(dk_full, dkh, hd, d);
            head_slice_add(dv_full, dvh, hd, d);
        }

        linalg::add_matmul_transa(lc.x_in, dq_full, lg.q_w);
        add_colsum(dq_full, lg.q_b);
        linalg::add_matmul_transa(lc.x_in, dk_full, lg.k_w);
        add_colsum(dk_full, lg.k_b);
        linalg::add_matmul_transa(lc.x_in, dv_full, lg.v_w);
        add_colsum(dv_full, lg.v_b);

        Matrix tmp;
        linalg::matmul_transb(dq_full, lw.q_w, tmp);
        for (std::size_t i = 0; i < dx_in.data.size(); ++i) dx_in.data[i] += tmp.data[i];
        linalg::matmul_transb(dk_full, lw.k_w, tmp);
        for (std::size_t i = 0; i < dx_in.data.size(); ++i) dx_in.data[i] += tmp.data[i];
        linalg::matmul_transb(dv_full, lw.v_w, tmp);
        for (std::size_t i = 0; i < dx_in.data.size(); ++i) dx_in.data[i] += tmp.data[i];

        for (std::size_t i = 0; i < dx_in.data.size(); ++i)
            dstates[li].data[i] += dx_in.data[i];
    }

    // embeddings
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t j = 0; j < h; ++j) {
            g.tok_emb(static_cast<std::size_t>(cache.ids[p]), j) += dstates[0](p, j);
            g.pos_emb(p, j) += dstates[0](p, j);
        }
    return g;
}

namespace {

void write_u64(std::ofstream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::ifstream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) throw ParseError("truncated checkpoint file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void write_f64(std::ofstream& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    write_u64(out, bits);
}

double read_f64(std::ifstream& in) {
    std::uint64_t bits = read_u64(in);
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}

constexpr char kMagic[8] = {'C', 'T', 'K', 'W', 'T', 'S', '0', '1'};

}  // namespace

void save_checkpoint(const std::string& path, const EncoderConfig& config,
                     const EncoderWeights& weights) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write checkpoint: " + path);
    out.write(kMagic, 8);
    write_u64(out, config.num_layers);
    write_u64(out, config.hidden_dim);
    write_u64(out, config.num_heads);
    write_u64(out, config.ff());
    write_u64(out, config.max_seq_len);
    write_u64(out, config.vocab_size);
    write_f64(out, config.dropout_p);
    write_f64(out, config.head_dropout_p);
    write_u64(out, config.head_variant == HeadVariant::mean_last_two ? 1 : 0);
    std::uint64_t count = 0;
    weights.for_each([&](const std::string&, const Matrix&) { ++count; });
    write_u64(out, count);
    weights.for_each([&](const std::string& name, const Matrix& m) {
        write_u64(out, name.size());
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_u64(out, m.rows);
        write_u64(out, m.cols);
        for (double v : m.data) write_f64(out, v);
    });
}

std::pair<EncoderConfig, EncoderWeights> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw ParseError("not a checkpoint file: " + path);
    EncoderConfig c;
    c.num_layers = read_u64(in);
    c.hidden_dim = read_u64(in);
    c.num_heads = read_u64(in);
    c.ff_dim = read_u64(in);
    c.max_seq_len = read_u64(in);
    c.vocab_size = read_u64(in);
    c.dropout_p = read_f64(in);
    c.head_dropout_p = read_f64(in);
    c.head_variant =
        read_u64(in) == 1 ? HeadVariant::mean_last_two : HeadVariant::standard_pooled;
    c.validate();
    EncoderWeights w = EncoderWeights::zeros(c);
    std::uint64_t count = read_u64(in);
    std::uint64_t seen = 0;
    w.for_each([&](const std::string& name, Matrix& m) {
        std::uint64_t name_len = read_u64(in);
        std::string stored(name_len, '\0');
        in.read(stored.data(), static_cast<std::streamsize>(name_len));
        if (stored != name)
            throw ParseError("checkpoint tensor order mismatch: expected " + name +
                             ", found " + stored);
        std::uint64_t rows = read_u64(in), cols = read_u64(in);
        if (rows != m.rows || cols != m.cols)
            throw ParseError("checkpoint shape mismatch for " + name + ": stored " +
                             std::to_string(rows) + "x" + std::to_string(cols) +
                             ", config requires " + std::to_string(m.rows) + "x" +
                             std::to_string(m.cols));
        for (double& v : m.data) v = read_f64(in);
        ++seen;
    });
    if (seen != count) throw ParseError("checkpoint tensor count mismatch");
    return {c, w};
}

}  // namespace ctk
