#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctk/corpus.hpp"
#include "ctk/model.hpp"
#include "ctk/rank.hpp"
#include "ctk/tokenizer.hpp"

namespace ctk {

struct TrainConfig {
    std::size_t epochs = 2;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 0;

    void validate() const;
};

struct AdamState {
    EncoderWeights first_moment;
    EncoderWeights second_moment;
    std::uint64_t step = 0;

    static AdamState init(const EncoderConfig& config);
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
    double pos_precision = 0.0, pos_recall = 0.0, pos_f1 = 0.0;
    double neg_precision = 0.0, neg_recall = 0.0, neg_f1 = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
};

struct LossAndGrad {
    double loss = 0.0;
    Logits dlogits;  // softmax(logits) - one_hot(label)
};

LossAndGrad cross_entropy(const Logits& logits, int label);

// One Adam update over every parameter tensor, in place.
void adam_step(EncoderWeights& params, const EncoderWeights& grads, AdamState& state,
               const TrainConfig& config);

// Tokenize, truncate to max_seq_len - 2, wrap in sequence-start/end ids.
std::vector<int> encode_text(const std::string& text, const Vocabulary& vocab,
                             const EncoderConfig& config);

TrainHistory fine_tune(EncoderWeights& weights, const EncoderConfig& model_config,
                       const Dataset& train_set, const Dataset& val_set,
                       const Vocabulary& vocab, const TrainConfig& config);

struct GridSearchResult {
    std::size_t best_index = 0;
    TrainConfig best_config;
    std::vector<TrainHistory> histories;
    std::vector<EncoderWeights> trained;
};

GridSearchResult grid_search(const std::vector<TrainConfig>& grid,
                             const EncoderConfig& model_config,
                             const EncoderWeights& initial_weights,
                             const Dataset& train_set, const Dataset& val_set,
                             const Vocabulary& vocab);

void save_history(const TrainHistory& history, const std::string& path);

// Scores every tweet with the trained model (eval mode).
std::vector<ScoredTweet> predict(const Dataset& dataset,
                                 const EncoderWeights& weights,
                                 const EncoderConfig& model_config,
                                 const Vocabulary& vocab);

}  // namespace ctk
