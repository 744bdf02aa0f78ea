#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <numeric>

#include "ctk/errors.hpp"
#include "ctk/model.hpp"
#include "ctk/train.hpp"

using namespace ctk;

namespace {

EncoderConfig small_config(HeadVariant head) {
    EncoderConfig c;
    c.num_layers = 2;
    c.hidden_dim = 8;
    c.num_heads = 2;
    c.ff_dim = 16;
    c.max_seq_len = 8;
    c.vocab_size = 12;
    c.dropout_p = 0.0;  // eval-equivalent even in train mode
    c.head_variant = head;
    return c;
}

double loss_at(const std::vector<int>& ids, const EncoderWeights& w,
               const EncoderConfig& c, int label) {
    SplitMix64 rng(0);
    ForwardCache cache = forward(ids, w, c, RunMode::eval, rng);
    return cross_entropy(cache.logits, label).loss;
}

// Central finite differences over every parameter, compared group-wise with a
// norm-based relative error.
void gradient_check(HeadVariant head, double emb_scale) {
    EncoderConfig c = small_config(head);
    EncoderWeights w = init_weights(c, 17);
    // scaling the embeddings up makes every gradient group non-tiny, so the
    // strict relative bound applies to all of them
    for (double& v : w.tok_emb.data) v *= emb_scale;
    for (double& v : w.pos_emb.data) v *= emb_scale;
    std::vector<int> ids = {1, 4, 5, 6, 2};
    int label = 1;

    SplitMix64 rng(0);
    ForwardCache cache = forward(ids, w, c, RunMode::eval, rng);
    LossAndGrad lg = cross_entropy(cache.logits, label);
    EncoderWeights analytic = backward(cache, w, c, lg.dlogits);

    const double h = 1e-4;
    w.for_each([&](const std::string& name, Matrix& param) {
        Matrix* grad = nullptr;
        analytic.for_each([&](const std::string& gname, Matrix& g) {
            if (gname == name) grad = &g;
        });
        REQUIRE(grad != nullptr);
        double num_sq = 0.0, an_sq = 0.0, diff_sq = 0.0;
        for (double& v : param.data) {
            double saved = v;
            v = saved + h;
            double up = loss_at(ids, w, c, label);
            v = saved - h;
            double down = loss_at(ids, w, c, label);
            v = saved;
            double fd = (up - down) / (2.0 * h);
            std::size_t idx = static_cast<std::size_t>(&v - param.data.data());
            double an = grad->data[idx];
            num_sq += fd * fd;
            an_sq += an * an;
            diff_sq += (fd - an) * (fd - an);
        }
        double num_n = std::sqrt(num_sq), an_n = std::sqrt(an_sq);
        if (num_n < 1e-12 && an_n < 1e-12) return;  // unused by this head
        double diff_n = std::sqrt(diff_sq);
        double rel = diff_n / std::max({num_n, an_n, 1e-12});
        INFO("group ", name, " rel err ", rel, " an_norm ", an_n, " fd_norm ",
             num_n);
        // tiny-gradient groups: the FD quotient is dominated by cancellation
        // noise in the loss (~1e-16 / 2h = 5e-13 per element), so fall back to
        // an absolute bound there
        double abs_floor = emb_scale > 1.0 ? 1e-10 : 1e-9;
        CHECK((rel < 1e-5 || diff_n < abs_floor));
    });
}

}  // namespace

TEST_CASE("analytic gradients match finite differences (mean_last_two head)") {
    gradient_check(HeadVariant::mean_last_two, 1.0);
    gradient_check(HeadVariant::mean_last_two, 25.0);
}

TEST_CASE("analytic gradients match finite differences (standard head)") {
    gradient_check(HeadVariant::standard_pooled, 1.0);
    gradient_check(HeadVariant::standard_pooled, 25.0);
}

TEST_CASE("attention rows are probability distributions") {
    EncoderConfig c = small_config(HeadVariant::mean_last_two);
    EncoderWeights w = init_weights(c, 3);
    std::vector<int> ids = {1, 4, 5, 0, 0};  // padded tail
    SplitMix64 rng(0);
    ForwardCache cache = forward(ids, w, c, RunMode::eval, rng, 3);
    for (const LayerCache& layer : cache.layers)
        for (const Matrix& probs : layer.attn_probs)
            for (std::size_t i = 0; i < probs.rows; ++i) {
                double sum = 0.0;
                for (std::size_t j = 0; j < probs.cols; ++j) {
                    sum += probs(i, j);
                    // padded key columns must carry no mass
                    if (j >= 3) CHECK(probs(i, j) == doctest::Approx(0.0));
                }
                CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
            }
}

TEST_CASE("layer outputs are normalized per position") {
    EncoderConfig c = small_config(HeadVariant::mean_last_two);
    EncoderWeights w = init_weights(c, 5);
    std::vector<int> ids = {1, 7, 8, 2};
    SplitMix64 rng(0);
    ForwardCache cache = forward(ids, w, c, RunMode::eval, rng);
    // with scale=1, offset=0 untouched by init, each block output row has
    // mean ~0 and variance ~1
    for (std::size_t l = 1; l < cache.hidden.states.size(); ++l) {
        const Matrix& h = cache.hidden.states[l];
        for (std::size_t i = 0; i < h.rows; ++i) {
            double mean = 0.0, var = 0.0;
            for (std::size_t j = 0; j < h.cols; ++j) mean += h(i, j);
            mean /= static_cast<double>(h.cols);
            for (std::size_t j = 0; j < h.cols; ++j)
                var += (h(i, j) - mean) * (h(i, j) - mean);
            var /= static_cast<double>(h.cols);
            CHECK(mean == doctest::Approx(0.0).epsilon(1e-9));
            CHECK(var == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
}

TEST_CASE("eval forward is deterministic and ignores the rng") {
    EncoderConfig c = small_config(HeadVariant::standard_pooled);
    c.dropout_p = 0.5;  // would perturb outputs if applied
    EncoderWeights w = init_weights(c, 9);
    std::vector<int> ids = {1, 3, 4, 2};
    SplitMix64 r1(1), r2(999);
    ForwardCache a = forward(ids, w, c, RunMode::eval, r1);
    ForwardCache b = forward(ids, w, c, RunMode::eval, r2);
    CHECK(a.logits.negative == b.logits.negative);
    CHECK(a.logits.positive == b.logits.positive);
}

TEST_CASE("forward input validation") {
    EncoderConfig c = small_config(HeadVariant::mean_last_two);
    EncoderWeights w = init_weights(c, 1);
    SplitMix64 rng(0);
    std::vector<int> too_long(c.max_seq_len + 1, 1);
    CHECK_THROWS_AS(forward(too_long, w, c, RunMode::eval, rng), ValidationError);
    std::vector<int> bad_id = {1, static_cast<int>(c.vocab_size), 2};
    CHECK_THROWS_AS(forward(bad_id, w, c, RunMode::eval, rng), ContractError);
}

TEST_CASE("pool_mean_last_two averages the last two layers over valid positions") {
    HiddenStates hs;
    hs.valid_len = 2;
    // three "layers" (embedding + 2 blocks), 3 positions x 2 dims
    Matrix l0(3, 2), l1(3, 2), l2(3, 2);
    double fill1[6] = {1, 2, 3, 4, 100, 100};
    double fill2[6] = {5, 6, 7, 8, -100, -100};
    std::copy(fill1, fill1 + 6, l1.data.begin());
    std::copy(fill2, fill2 + 6, l2.data.begin());
    hs.states = {l0, l1, l2};
    std::vector<double> pooled = pool_mean_last_two(hs);
    REQUIRE(pooled.size() == 2);
    // brute force: mean over {l1 row0, l1 row1, l2 row0, l2 row1}
    CHECK(pooled[0] == doctest::Approx((1 + 3 + 5 + 7) / 4.0));
    CHECK(pooled[1] == doctest::Approx((2 + 4 + 6 + 8) / 4.0));

    // identical layers -> pooled equals the per-layer mean
    hs.states[1] = hs.states[2];
    std::vector<double> same = pool_mean_last_two(hs);
    CHECK(same[0] == doctest::Approx((5 + 7) / 2.0));

    // opposite layers cancel
    Matrix neg = hs.states[2];
    for (double& v : neg.data) v = -v;
    hs.states[1] = neg;
    std::vector<double> cancel = pool_mean_last_two(hs);
    CHECK(cancel[0] == doctest::Approx(0.0));
    CHECK(cancel[1] == doctest::Approx(0.0));
}

TEST_CASE("pool_standard is a tanh dense layer on the first token") {
    EncoderConfig c = small_config(HeadVariant::standard_pooled);
    EncoderWeights w = EncoderWeights::zeros(c);
    // identity-ish pooler: w = I scaled, b = 0.5
    for (std::size_t i = 0; i < c.hidden_dim; ++i) w.pooler_w(i, i) = 1.0;
    for (std::size_t j = 0; j < c.hidden_dim; ++j) w.pooler_b(0, j) = 0.5;
    HiddenStates hs;
    hs.valid_len = 2;
    Matrix h(2, c.hidden_dim);
    for (std::size_t j = 0; j < c.hidden_dim; ++j) h(0, j) = 0.25 * (j + 1);
    hs.states = {h, h, h};
    std::vector<double> pooled = pool_standard(hs, w);
    for (std::size_t j = 0; j < c.hidden_dim; ++j)
        CHECK(pooled[j] == doctest::Approx(std::tanh(0.25 * (j + 1) + 0.5)));
}

TEST_CASE("apply_dropout scales and matches its rate") {
    std::vector<double> ones(100000, 1.0);
    SplitMix64 rng(77);
    std::vector<double> dropped = apply_dropout(ones, 0.5, RunMode::train, rng);
    double mean = std::accumulate(dropped.begin(), dropped.end(), 0.0) /
                  static_cast<double>(dropped.size());
    CHECK(mean == doctest::Approx(1.0).epsilon(0.01));
    for (double v : dropped) CHECK((v == 0.0 || v == doctest::Approx(2.0)));

    std::vector<double> kept = apply_dropout(ones, 0.5, RunMode::eval, rng);
    CHECK(kept == ones);
    std::vector<double> p0 = apply_dropout(ones, 0.0, RunMode::train, rng);
    CHECK(p0 == ones);
}

TEST_CASE("classify is a linear map on the pooled vector") {
    EncoderConfig c = small_config(HeadVariant::standard_pooled);
    EncoderWeights w = EncoderWeights::zeros(c);
    w.cls_w(0, 0) = 2.0;   // negative logit reads pooled[0]
    w.cls_w(1, 1) = -3.0;  // positive logit reads pooled[1]
    w.cls_b(0, 0) = 0.25;
    w.cls_b(0, 1) = -0.5;
    std::vector<double> pooled(c.hidden_dim, 0.0);
    pooled[0] = 1.5;
    pooled[1] = 2.0;
    Logits out = classify(pooled, w);
    CHECK(out.negative == doctest::Approx(2.0 * 1.5 + 0.25));
    CHECK(out.positive == doctest::Approx(-3.0 * 2.0 - 0.5));
}

TEST_CASE("init_weights is seeded and validated") {
    EncoderConfig c = small_config(HeadVariant::mean_last_two);
    EncoderWeights a = init_weights(c, 4);
    EncoderWeights b = init_weights(c, 4);
    EncoderWeights d = init_weights(c, 5);
    CHECK(a.tok_emb.data == b.tok_emb.data);
    CHECK(a.tok_emb.data != d.tok_emb.data);
    // layer norm scales start at one, biases at zero
    CHECK(a.layers[0].ln1_scale(0, 0) == 1.0);
    CHECK(a.layers[0].q_b(0, 0) == 0.0);
    // weight std close to 0.02
    double sq = 0.0;
    for (double v : a.tok_emb.data) sq += v * v;
    CHECK(std::sqrt(sq / static_cast<double>(a.tok_emb.data.size())) ==
          doctest::Approx(0.02).epsilon(0.15));

    EncoderConfig bad = c;
    bad.num_heads = 3;  // does not divide hidden_dim = 8
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    EncoderConfig one_layer = c;
    one_layer.num_layers = 1;
    CHECK_THROWS_AS(one_layer.validate(), ConfigError);  // mean_last_two needs 2
    one_layer.head_variant = HeadVariant::standard_pooled;
    CHECK_NOTHROW(one_layer.validate());
}

TEST_CASE("checkpoint round trip preserves config and every tensor") {
    EncoderConfig c = small_config(HeadVariant::standard_pooled);
    c.dropout_p = 0.2;
    c.head_dropout_p = 0.05;
    EncoderWeights w = init_weights(c, 21);
    std::string path =
        (std::filesystem::temp_directory_path() / "model_roundtrip.ckpt").string();
    save_checkpoint(path, c, w);
    auto [c2, w2] = load_checkpoint(path);
    CHECK(c2.num_layers == c.num_layers);
    CHECK(c2.hidden_dim == c.hidden_dim);
    CHECK(c2.vocab_size == c.vocab_size);
    CHECK(c2.dropout_p == c.dropout_p);
    CHECK(c2.head_dropout_p == c.head_dropout_p);
    CHECK(c2.head_variant == c.head_variant);
    w.for_each([&](const std::string& name, Matrix& tensor) {
        w2.for_each([&](const std::string& name2, Matrix& tensor2) {
            if (name2 == name) CHECK(tensor.data == tensor2.data);
        });
    });
    // identical logits after reload
    SplitMix64 rng(0);
    std::vector<int> ids = {1, 6, 2};
    ForwardCache fa = forward(ids, w, c, RunMode::eval, rng);
    ForwardCache fb = forward(ids, w2, c2, RunMode::eval, rng);
    CHECK(fa.logits.positive == fb.logits.positive);

    CHECK_THROWS_AS(load_checkpoint(path + ".missing"), ValidationError);
}
