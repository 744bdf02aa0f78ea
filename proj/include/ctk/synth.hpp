#pragma once

#include <cstdint>
#include <string>

#include "ctk/corpus.hpp"
#include "ctk/metrics.hpp"
#include "ctk/rank.hpp"

namespace ctk {

// Seeded generator for offline fixtures: no real tweet data ships with the
// repo. Positive-class texts carry claim-flavored marker words, so the corpus
// is separable by construction.
struct SynthSpec {
    std::size_t topics = 10;
    std::size_t tweets_per_topic = 20;
    double positive_fraction = 0.3;
    std::uint64_t seed = 1;
};

Dataset generate_synthetic(const SynthSpec& spec);

// Exact-count variant: `positives` of `total` tweets labeled 1, spread over
// `topics` topics. Used for class-balance and augmentation count fixtures.
Dataset generate_labeled(std::size_t total, std::size_t positives,
                         std::size_t topics, std::uint64_t seed);

// WordPiece vocabulary covering every word the generator (and its mock
// back-translations) can emit, plus the special tokens.
void write_synth_vocab(const std::string& path);

// Mock translation table for the generator's word list; back-translations
// rotate within a word class so the label signal survives the round trip.
void write_synth_mock_table(const std::string& path);

RelevanceJudgments qrels_from_labels(const Dataset& dataset);
void save_qrels(const RelevanceJudgments& qrels, const std::string& path);

// Baseline: uniform random scores in [-1, 1].
std::vector<ScoredTweet> random_ranker(const Dataset& dataset, std::uint64_t seed);

}  // namespace ctk
