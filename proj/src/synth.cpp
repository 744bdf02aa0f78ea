#include "ctk/synth.hpp"

#include <fstream>

#include "ctk/errors.hpp"
#include "ctk/prng.hpp"

namespace ctk {

namespace {

const std::vector<std::string>& neutral_words() {
    static const std::vector<std::string> words = {
        "weather", "lunch",  "music",   "traffic", "garden",  "coffee",
        "movie",   "sunset", "weekend", "picnic",  "holiday", "recipe",
        "puppy",   "soccer", "novel",   "beach",   "museum",  "concert",
        "bicycle", "market", "painting", "dinner", "morning", "river"};
    return words;
}

const std::vector<std::string>& claim_words() {
    static const std::vector<std::string> words = {
        "cure",    "vaccine",  "outbreak", "minister", "statistic", "deaths",
        "economy", "election", "fraud",    "hospital", "lockdown",  "billion"};
    return words;
}

std::string pick(const std::vector<std::string>& words, SplitMix64& rng) {
    return words[rng.next_below(words.size())];
}

std::string make_text(bool positive, SplitMix64& rng) {
    std::string text;
    if (positive) {
        std::size_t markers = 2 + rng.next_below(2);
        for (std::size_t i = 0; i < markers; ++i) {
            if (!text.empty()) text += ' ';
            text += pick(claim_words(), rng);
        }
    }
    std::size_t filler = 3 + rng.next_below(4);
    for (std::size_t i = 0; i < filler; ++i) {
        if (!text.empty()) text += ' ';
        text += pick(neutral_words(), rng);
    }
    return text;
}

}  // namespace

Dataset generate_synthetic(const SynthSpec& spec) {
    Dataset ds;
    ds.name = "synthetic";
    SplitMix64 rng(spec.seed);
    std::size_t counter = 0;
    for (std::size_t t = 0; t < spec.topics; ++t) {
        std::string topic = "topic" + std::to_string(t + 1);
        for (std::size_t i = 0; i < spec.tweets_per_topic; ++i) {
            Tweet tw;
            tw.topic_id = topic;
            tw.tweet_id = "t" + std::to_string(++counter);
            tw.label = rng.next_double() < spec.positive_fraction ? 1 : 0;
            tw.text = make_text(*tw.label == 1, rng);
            ds.tweets.push_back(std::move(tw));
        }
    }
    return ds;
}

Dataset generate_labeled(std::size_t total, std::size_t positives,
                         std::size_t topics, std::uint64_t seed) {
    if (positives > total)
        throw ContractError("generate_labeled: positives exceed total");
    Dataset ds;
    ds.name = "fixture";
    SplitMix64 rng(seed);
    // deterministic label placement: shuffle positions, first `positives` are 1
    std::vector<std::size_t> order = shuffled_indices(total, seed ^ 0xF1A7u);
    std::vector<int> labels(total, 0);
    for (std::size_t i = 0; i < positives; ++i) labels[order[i]] = 1;
    for (std::size_t i = 0; i < total; ++i) {
        Tweet tw;
        tw.topic_id = "topic" + std::to_string(1 + i % topics);
        tw.tweet_id = "t" + std::to_string(i + 1);
        tw.label = labels[i];
        tw.text = make_text(labels[i] == 1, rng);
        ds.tweets.push_back(std::move(tw));
    }
    return ds;
}

void write_synth_vocab(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write vocabulary: " + path);
    out << "[PAD]\n[UNK]\n[CLS]\n[SEP]\n";
    for (const std::string& w : neutral_words()) out << w << '\n';
    for (const std::string& w : claim_words()) out << w << '\n';
    // pivot-language forms emitted by the mock translator
    for (const std::string& w : neutral_words()) out << "en_" << w << '\n';
    for (const std::string& w : claim_words()) out << "en_" << w << '\n';
}

void write_synth_mock_table(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write mock table: " + path);
    auto emit = [&](const std::vector<std::string>& words) {
        for (std::size_t i = 0; i < words.size(); ++i) {
            const std::string& next = words[(i + 1) % words.size()];
            out << words[i] << "\ten_" << words[i] << '\t' << next << '\n';
        }
    };
    emit(neutral_words());
    emit(claim_words());
}

RelevanceJudgments qrels_from_labels(const Dataset& dataset) {
    if (!dataset.fully_labeled())
        throw ContractError("qrels_from_labels requires a labeled dataset");
    RelevanceJudgments qrels;
    for (const Tweet& t : dataset.tweets)
        qrels.topics[t.topic_id][t.tweet_id] = *t.label;
    return qrels;
}

void save_qrels(const RelevanceJudgments& qrels, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write qrels: " + path);
    for (const auto& [topic, judgments] : qrels.topics)
        for (const auto& [tweet, rel] : judgments)
            out << topic << '\t' << tweet << '\t' << rel << '\n';
}

std::vector<ScoredTweet> random_ranker(const Dataset& dataset, std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<ScoredTweet> out;
    out.reserve(dataset.tweets.size());
    for (const Tweet& t : dataset.tweets) {
        ScoredTweet s;
        s.topic_id = t.topic_id;
        s.tweet_id = t.tweet_id;
        s.p_positive = rng.next_double();
        s.p_negative = 1.0 - s.p_positive;
        s.score = s.p_positive - s.p_negative;
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace ctk
