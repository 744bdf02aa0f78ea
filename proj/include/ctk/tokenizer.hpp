#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ctk/corpus.hpp"

namespace ctk {

enum class VocabScheme { wordpiece, bpe };

struct SpecialTokens {
    std::string unknown = "[UNK]";
    std::string sequence_start = "[CLS]";
    std::string sequence_end = "[SEP]";
    std::string padding = "[PAD]";
};

struct Vocabulary {
    VocabScheme scheme = VocabScheme::wordpiece;
    std::vector<std::string> entries;  // index = id
    std::unordered_map<std::string, int> ids;
    std::string continuation_prefix = "##";
    SpecialTokens special;
    int unknown_id = -1;
    int sequence_start_id = -1;
    int sequence_end_id = -1;
    int padding_id = -1;

    std::size_t size() const { return entries.size(); }
    bool contains(const std::string& token) const { return ids.count(token) != 0; }
    int id_of(const std::string& token) const;
};

struct MergeTable {
    std::vector<std::pair<std::string, std::string>> merges;  // position = rank
};

struct TokenSequence {
    std::vector<std::string> tokens;
    std::vector<int> ids;
    std::string source_text;
};

struct OverlapReport {
    std::size_t corpus_unique_tokens = 0;
    std::size_t overlapping = 0;
    double fraction = 0.0;
    // Missing tokens ordered by corpus frequency (desc), then token.
    std::vector<std::pair<std::string, std::size_t>> sample_missing;
};

// Cleaning applied before the vocabulary-overlap count. Defaults mirror a
// no-preprocessing policy except URL/mention stripping and punctuation splits.
struct OverlapNormalizer {
    bool lowercase = false;
    bool strip_urls = true;
    bool strip_mentions = true;
    bool split_punctuation = true;
    bool strip_diacritics = false;  // Arabic harakat
    std::size_t max_missing_samples = 20;
};

Vocabulary load_vocab(const std::string& path, VocabScheme scheme,
                      const SpecialTokens& special = {});
MergeTable load_merges(const std::string& path);

TokenSequence wordpiece_tokenize(const std::string& text, const Vocabulary& vocab,
                                 std::size_t max_word_chars = 100);

TokenSequence bpe_tokenize(const std::string& text, const Vocabulary& vocab,
                           const MergeTable& merges, bool byte_level = false);

OverlapReport vocab_overlap(const Dataset& corpus, const Vocabulary& vocab,
                            const OverlapNormalizer& normalizer = {});

// Splits on ASCII whitespace; exposed for the overlap analyzer and tests.
std::vector<std::string> whitespace_split(const std::string& text);

// Splits a UTF-8 string into code-point substrings.
std::vector<std::string> utf8_chars(const std::string& text);

}  // namespace ctk
