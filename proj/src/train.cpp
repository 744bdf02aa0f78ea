#include "ctk/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ctk/errors.hpp"

namespace ctk {

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
}

AdamState AdamState::init(const EncoderConfig& config) {
    AdamState s;
    s.first_moment = EncoderWeights::zeros(config);
    s.second_moment = EncoderWeights::zeros(config);
    s.step = 0;
    return s;
}

LossAndGrad cross_entropy(const Logits& logits, int label) {
    if (label != 0 && label != 1)
        throw ContractError("cross_entropy: label must be 0 or 1, got " +
                            std::to_string(label));
    // loss = -log softmax(logits)[label], via log-sum-exp
    double mx = std::max(logits.negative, logits.positive);
    double lse = mx + std::log(std::exp(logits.negative - mx) +
                               std::exp(logits.positive - mx));
    double target = label == 1 ? logits.positive : logits.negative;
    LossAndGrad out;
    out.loss = lse - target;
    double pn = std::exp(logits.negative - lse);
    double pp = std::exp(logits.positive - lse);
    out.dlogits.negative = pn - (label == 0 ? 1.0 : 0.0);
    out.dlogits.positive = pp - (label == 1 ? 1.0 : 0.0);
    return out;
}

void adam_step(EncoderWeights& params, const EncoderWeights& grads, AdamState& state,
               const TrainConfig& config) {
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(config.adam_beta1, t);
    const double bc2 = 1.0 - std::pow(config.adam_beta2, t);

    std::vector<std::pair<std::string, Matrix*>> p, m, v;
    std::vector<std::pair<std::string, const Matrix*>> g;
    params.for_each([&](const std::string& n, Matrix& mat) { p.emplace_back(n, &mat); });
    grads.for_each(
        [&](const std::string& n, const Matrix& mat) { g.emplace_back(n, &mat); });
    state.first_moment.for_each(
        [&](const std::string& n, Matrix& mat) { m.emplace_back(n, &mat); });
    state.second_moment.for_each(
        [&](const std::string& n, Matrix& mat) { v.emplace_back(n, &mat); });

    for (std::size_t i = 0; i < p.size(); ++i) {
        const Matrix& gi = *g[i].second;
        for (double gv : gi.data)
            if (!std::isfinite(gv))
                throw std::runtime_error("non-finite gradient in parameter group " +
                                         g[i].first);
        Matrix& pi = *p[i].second;
        Matrix& mi = *m[i].second;
        Matrix& vi = *v[i].second;
        for (std::size_t k = 0; k < pi.data.size(); ++k) {
            mi.data[k] = config.adam_beta1 * mi.data[k] +
                         (1.0 - config.adam_beta1) * gi.data[k];
            vi.data[k] = config.adam_beta2 * vi.data[k] +
                         (1.0 - config.adam_beta2) * gi.data[k] * gi.data[k];
            double mhat = mi.data[k] / bc1;
            double vhat = vi.data[k] / bc2;
            pi.data[k] -=
                config.learning_rate * mhat / (std::sqrt(vhat) + config.adam_epsilon);
        }
    }
}

std::vector<int> encode_text(const std::string& text, const Vocabulary& vocab,
                             const EncoderConfig& config) {
    if (vocab.scheme != VocabScheme::wordpiece)
        throw ConfigError("training path requires a wordpiece vocabulary");
    TokenSequence seq = wordpiece_tokenize(text, vocab);
    std::vector<int> ids;
    ids.reserve(seq.ids.size() + 2);
    ids.push_back(vocab.sequence_start_id);
    // head truncation: keep the first max_seq_len - 2 subword tokens
    std::size_t keep = std::min(seq.ids.size(), config.max_seq_len - 2);
    ids.insert(ids.end(), seq.ids.begin(), seq.ids.begin() + static_cast<long>(keep));
    ids.push_back(vocab.sequence_end_id);
    return ids;
}

namespace {

struct EvalStats {
    double loss = 0.0;
    double accuracy = 0.0;
    double pos_p = 0.0, pos_r = 0.0, pos_f1 = 0.0;
    double neg_p = 0.0, neg_r = 0.0, neg_f1 = 0.0;
};

EvalStats evaluate(const Dataset& set, const EncoderWeights& weights,
                   const EncoderConfig& model_config, const Vocabulary& vocab) {
    EvalStats s;
    if (set.tweets.empty()) return s;
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    double loss = 0.0;
    SplitMix64 rng(0);
    for (const Tweet& t : set.tweets) {
        std::vector<int> ids = encode_text(t.text, vocab, model_config);
        ForwardCache fc = forward(ids, weights, model_config, RunMode::eval, rng);
        loss += cross_entropy(fc.logits, *t.label).loss;
        int pred = fc.logits.positive > fc.logits.negative ? 1 : 0;
        if (*t.label == 1)
            pred == 1 ? ++tp : ++fn;
        else
            pred == 1 ? ++fp : ++tn;
    }
    auto ratio = [](std::size_t a, std::size_t b) {
        return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
    };
    s.loss = loss / static_cast<double>(set.tweets.size());
    s.accuracy = ratio(tp + tn, tp + tn + fp + fn);
    s.pos_p = ratio(tp, tp + fp);
    s.pos_r = ratio(tp, tp + fn);
    s.pos_f1 = (s.pos_p + s.pos_r) == 0.0 ? 0.0
                                          : 2.0 * s.pos_p * s.pos_r / (s.pos_p + s.pos_r);
    s.neg_p = ratio(tn, tn + fn);
    s.neg_r = ratio(tn, tn + fp);
    s.neg_f1 = (s.neg_p + s.neg_r) == 0.0 ? 0.0
                                          : 2.0 * s.neg_p * s.neg_r / (s.neg_p + s.neg_r);
    return s;
}

}  // namespace

TrainHistory fine_tune(EncoderWeights& weights, const EncoderConfig& model_config,
                       const Dataset& train_set, const Dataset& val_set,
                       const Vocabulary& vocab, const TrainConfig& config) {
    config.validate();
    model_config.validate();
    if (train_set.tweets.empty()) throw ContractError("fine_tune: empty training set");
    if (!train_set.fully_labeled() || !val_set.fully_labeled())
        throw ContractError("fine_tune requires labeled train and validation sets");
    if (vocab.size() != model_config.vocab_size)
        throw ConfigError("vocabulary size " + std::to_string(vocab.size()) +
                          " does not match model vocab_size " +
                          std::to_string(model_config.vocab_size));

    const std::size_t n = train_set.tweets.size();

    // Pre-encode once; tokenization is pure.
    std::vector<std::vector<int>> encoded(n);
    for (std::size_t i = 0; i < n; ++i)
        encoded[i] = encode_text(train_set.tweets[i].text, vocab, model_config);

    AdamState adam = AdamState::init(model_config);
    TrainHistory history;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::vector<std::size_t> order =
            shuffled_indices(n, SplitMix64::mix(config.seed, epoch));
        double epoch_loss = 0.0;

        for (std::size_t start = 0; start < n; start += config.batch_size) {
            std::size_t end = std::min(n, start + config.batch_size);
            std::size_t bs = end - start;

            // pad within the batch; padded positions are masked downstream
            std::size_t max_len = 0;
            for (std::size_t b = 0; b < bs; ++b)
                max_len = std::max(max_len, encoded[order[start + b]].size());

            std::vector<EncoderWeights> item_grads(bs);
            std::vector<double> item_loss(bs, 0.0);
#pragma omp parallel for schedule(dynamic)
            for (long long bi = 0; bi < static_cast<long long>(bs); ++bi) {
                std::size_t b = static_cast<std::size_t>(bi);
                std::size_t idx = order[start + b];
                std::vector<int> ids = encoded[idx];
                std::size_t valid = ids.size();
                ids.resize(max_len, vocab.padding_id);
                SplitMix64 item_rng(
                    SplitMix64::mix(config.seed, (epoch << 32) ^ (start + b)));
                ForwardCache fc = forward(ids, weights, model_config, RunMode::train,
                                          item_rng, valid);
                LossAndGrad lg =
                    cross_entropy(fc.logits, *train_set.tweets[idx].label);
                item_loss[b] = lg.loss;
                // mean loss over the batch
                Logits dl{lg.dlogits.negative / static_cast<double>(bs),
                          lg.dlogits.positive / static_cast<double>(bs)};
                item_grads[b] = backward(fc, weights, model_config, dl);
            }

            // serial in-order reduction keeps results thread-count independent
            EncoderWeights batch_grad = EncoderWeights::zeros(model_config);
            std::vector<Matrix*> acc;
            batch_grad.for_each(
                [&](const std::string&, Matrix& m) { acc.push_back(&m); });
            for (std::size_t b = 0; b < bs; ++b) {
                std::size_t ti = 0;
                item_grads[b].for_each([&](const std::string&, Matrix& m) {
                    for (std::size_t k = 0; k < m.data.size(); ++k)
                        acc[ti]->data[k] += m.data[k];
                    ++ti;
                });
                epoch_loss += item_loss[b];
            }
            adam_step(weights, batch_grad, adam, config);
        }

        EvalStats vs = evaluate(val_set, weights, model_config, vocab);
        EpochRecord rec;
        rec.epoch = epoch + 1;
        rec.train_loss = epoch_loss / static_cast<double>(n);
        rec.val_loss = vs.loss;
        rec.val_accuracy = vs.accuracy;
        rec.pos_precision = vs.pos_p;
        rec.pos_recall = vs.pos_r;
        rec.pos_f1 = vs.pos_f1;
        rec.neg_precision = vs.neg_p;
        rec.neg_recall = vs.neg_r;
        rec.neg_f1 = vs.neg_f1;
        history.epochs.push_back(rec);
    }
    return history;
}

GridSearchResult grid_search(const std::vector<TrainConfig>& grid,
                             const EncoderConfig& model_config,
                             const EncoderWeights& initial_weights,
                             const Dataset& train_set, const Dataset& val_set,
                             const Vocabulary& vocab) {
    if (grid.empty()) throw ContractError("grid_search: empty grid");
    GridSearchResult result;
    for (const TrainConfig& cfg : grid) {
        EncoderWeights w = initial_weights;
        result.histories.push_back(
            fine_tune(w, model_config, train_set, val_set, vocab, cfg));
        result.trained.push_back(std::move(w));
    }
    // highest final positive-class F1, ties by lower val loss, then grid order
    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const EpochRecord& a = result.histories[i].epochs.back();
        const EpochRecord& b = result.histories[best].epochs.back();
        if (a.pos_f1 > b.pos_f1 || (a.pos_f1 == b.pos_f1 && a.val_loss < b.val_loss))
            best = i;
    }
    result.best_index = best;
    result.best_config = grid[best];
    return result;
}

void save_history(const TrainHistory& history, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write history file: " + path);
    out << "epoch\ttrain_loss\tval_loss\tval_acc\tpos_P\tpos_R\tpos_F1\tneg_P\tneg_R"
           "\tneg_F1\n";
    for (const EpochRecord& r : history.epochs)
        out << r.epoch << '\t' << format_fixed(r.train_loss, 6) << '\t'
            << format_fixed(r.val_loss, 6) << '\t' << format_fixed(r.val_accuracy, 4)
            << '\t' << format_fixed(r.pos_precision, 4) << '\t'
            << format_fixed(r.pos_recall, 4) << '\t' << format_fixed(r.pos_f1, 4)
            << '\t' << format_fixed(r.neg_precision, 4) << '\t'
            << format_fixed(r.neg_recall, 4) << '\t' << format_fixed(r.neg_f1, 4)
            << '\n';
}

std::vector<ScoredTweet> predict(const Dataset& dataset,
                                 const EncoderWeights& weights,
                                 const EncoderConfig& model_config,
                                 const Vocabulary& vocab) {
    std::vector<ScoredTweet> out(dataset.tweets.size());
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(dataset.tweets.size()); ++i) {
        const Tweet& t = dataset.tweets[static_cast<std::size_t>(i)];
        std::vector<int> ids = encode_text(t.text, vocab, model_config);
        SplitMix64 rng(0);
        ForwardCache fc = forward(ids, weights, model_config, RunMode::eval, rng);
        auto [pn, pp] = softmax2(fc.logits.negative, fc.logits.positive);
        ScoredTweet& s = out[static_cast<std::size_t>(i)];
        s.topic_id = t.topic_id;
        s.tweet_id = t.tweet_id;
        s.p_negative = pn;
        s.p_positive = pp;
        s.score = score(pn, pp);
    }
    return out;
}

}  // namespace ctk
