#include "ctk/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>

#include "ctk/errors.hpp"

namespace ctk {

int Vocabulary::id_of(const std::string& token) const {
    auto it = ids.find(token);
    return it == ids.end() ? unknown_id : it->second;
}

std::vector<std::string> whitespace_split(const std::string& text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) out.push_back(text.substr(start, i - start));
    }
    return out;
}

std::vector<std::string> utf8_chars(const std::string& text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        std::size_t len = 1;
        if ((c & 0x80) == 0x00) len = 1;
        else if ((c & 0xE0) == 0xC0) len = 2;
        else if ((c & 0xF0) == 0xE0) len = 3;
        else if ((c & 0xF8) == 0xF0) len = 4;
        if (i + len > text.size()) len = 1;  // malformed tail, treat as one byte
        out.push_back(text.substr(i, len));
        i += len;
    }
    return out;
}

Vocabulary load_vocab(const std::string& path, VocabScheme scheme,
                      const SpecialTokens& special) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open vocabulary file: " + path);
    Vocabulary v;
    v.scheme = scheme;
    v.special = special;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto [it, inserted] = v.ids.emplace(line, static_cast<int>(v.entries.size()));
        if (!inserted)
            throw ValidationError("duplicate vocabulary token '" + line +
                                  "' at line " + std::to_string(lineno));
        v.entries.push_back(line);
    }
    auto require = [&](const std::string& tok, const char* role) {
        auto it = v.ids.find(tok);
        if (it == v.ids.end())
            throw ValidationError("vocabulary missing " + std::string(role) +
                                  " token '" + tok + "'");
        return it->second;
    };
    v.unknown_id = require(special.unknown, "unknown");
    v.sequence_start_id = require(special.sequence_start, "sequence-start");
    v.sequence_end_id = require(special.sequence_end, "sequence-end");
    v.padding_id = require(special.padding, "padding");
    return v;
}

MergeTable load_merges(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open merges file: " + path);
    MergeTable table;
    std::set<std::pair<std::string, std::string>> seen;
    std::set<std::string> derivable;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::size_t sp = line.find(' ');
        if (sp == std::string::npos || sp == 0 || sp + 1 >= line.size())
            throw ParseError("merges line " + std::to_string(lineno) +
                             ": expected two space-separated symbols");
        std::pair<std::string, std::string> merge{line.substr(0, sp),
                                                  line.substr(sp + 1)};
        if (!seen.insert(merge).second)
            throw ValidationError("duplicate merge at line " + std::to_string(lineno));
        // A multi-character operand must be the product of an earlier merge.
        for (const std::string& sym : {merge.first, merge.second}) {
            if (utf8_chars(sym).size() > 1 && derivable.count(sym) == 0)
                throw ValidationError("merges line " + std::to_string(lineno) +
                                      ": symbol '" + sym +
                                      "' is not derivable from earlier merges");
        }
        derivable.insert(merge.first + merge.second);
        table.merges.push_back(std::move(merge));
    }
    return table;
}

TokenSequence wordpiece_tokenize(const std::string& text, const Vocabulary& vocab,
                                 std::size_t max_word_chars) {
    if (vocab.scheme != VocabScheme::wordpiece)
        throw ContractError("wordpiece_tokenize requires a wordpiece vocabulary");
    TokenSequence seq;
    seq.source_text = text;
    for (const std::string& word : whitespace_split(text)) {
        std::vector<std::string> chars = utf8_chars(word);
        if (chars.size() > max_word_chars) {
            seq.tokens.push_back(vocab.special.unknown);
            seq.ids.push_back(vocab.unknown_id);
            continue;
        }
        std::vector<std::string> pieces;
        bool bad = false;
        std::size_t start = 0;
        while (start < chars.size()) {
            // longest vocabulary match starting at `start`
            std::size_t end = chars.size();
            std::string found;
            while (end > start) {
                std::string sub;
                for (std::size_t i = start; i < end; ++i) sub += chars[i];
                if (start > 0) sub = vocab.continuation_prefix + sub;
                if (vocab.contains(sub)) {
                    found = sub;
                    break;
                }
                --end;
            }
            if (found.empty()) {
                bad = true;
                break;
            }
            pieces.push_back(found);
            start = end;
        }
        if (bad) {
            seq.tokens.push_back(vocab.special.unknown);
            seq.ids.push_back(vocab.unknown_id);
        } else {
            for (const std::string& p : pieces) {
                seq.tokens.push_back(p);
                seq.ids.push_back(vocab.id_of(p));
            }
        }
    }
    return seq;
}

namespace {

std::vector<std::string> base_symbols(const std::string& word, bool byte_level) {
    if (!byte_level) return utf8_chars(word);
    std::vector<std::string> out;
    out.reserve(word.size());
    for (char c : word) out.emplace_back(1, c);
    return out;
}

// Apply merges in rank order; within a rank, occurrences merge left to right.
void apply_merges(std::vector<std::string>& symbols, const MergeTable& merges) {
    for (;;) {
        std::size_t best_rank = merges.merges.size();
        for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
            for (std::size_t r = 0; r < best_rank; ++r) {
                if (merges.merges[r].first == symbols[i] &&
                    merges.merges[r].second == symbols[i + 1]) {
                    best_rank = r;
                    break;
                }
            }
        }
        if (best_rank == merges.merges.size()) return;
        const auto& [a, b] = merges.merges[best_rank];
        std::vector<std::string> next;
        next.reserve(symbols.size());
        std::size_t i = 0;
        while (i < symbols.size()) {
            if (i + 1 < symbols.size() && symbols[i] == a && symbols[i + 1] == b) {
                next.push_back(a + b);
                i += 2;
            } else {
                next.push_back(symbols[i]);
                ++i;
            }
        }
        symbols = std::move(next);
    }
}

}  // namespace

TokenSequence bpe_tokenize(const std::string& text, const Vocabulary& vocab,
                           const MergeTable& merges, bool byte_level) {
    if (vocab.scheme != VocabScheme::bpe)
        throw ContractError("bpe_tokenize requires a bpe vocabulary");
    TokenSequence seq;
    seq.source_text = text;
    for (const std::string& word : whitespace_split(text)) {
        std::vector<std::string> symbols = base_symbols(word, byte_level);
        apply_merges(symbols, merges);
        for (const std::string& sym : symbols) {
            if (vocab.contains(sym)) {
                seq.tokens.push_back(sym);
                seq.ids.push_back(vocab.id_of(sym));
            } else {
                // fall back to base units; unknown id for anything still missing
                for (const std::string& unit : base_symbols(sym, byte_level)) {
                    seq.tokens.push_back(unit);
                    seq.ids.push_back(vocab.id_of(unit));
                }
            }
        }
    }
    return seq;
}

namespace {

bool looks_like_url(const std::string& tok) {
    return tok.rfind("http://", 0) == 0 || tok.rfind("https://", 0) == 0 ||
           tok.rfind("www.", 0) == 0;
}

// Arabic harakat and related combining marks: U+064B..U+065F, U+0670.
bool is_diacritic(const std::string& cp) {
    if (cp.size() != 2) return false;
    unsigned char b0 = static_cast<unsigned char>(cp[0]);
    unsigned char b1 = static_cast<unsigned char>(cp[1]);
    unsigned int code = ((b0 & 0x1Fu) << 6) | (b1 & 0x3Fu);
    return (code >= 0x064B && code <= 0x065F) || code == 0x0670;
}

}  // namespace

OverlapReport vocab_overlap(const Dataset& corpus, const Vocabulary& vocab,
                            const OverlapNormalizer& norm) {
    std::map<std::string, std::size_t> freq;
    for (const Tweet& tweet : corpus.tweets) {
        for (const std::string& raw : whitespace_split(tweet.text)) {
            if (norm.strip_urls && looks_like_url(raw)) continue;
            if (norm.strip_mentions && !raw.empty() && raw[0] == '@') continue;
            std::vector<std::string> pieces;
            if (norm.split_punctuation) {
                std::string cur;
                for (const std::string& cp : utf8_chars(raw)) {
                    bool punct = cp.size() == 1 &&
                                 std::ispunct(static_cast<unsigned char>(cp[0]));
                    if (punct) {
                        if (!cur.empty()) pieces.push_back(cur);
                        cur.clear();
                    } else {
                        cur += cp;
                    }
                }
                if (!cur.empty()) pieces.push_back(cur);
            } else {
                pieces.push_back(raw);
            }
            for (std::string tok : pieces) {
                if (norm.strip_diacritics) {
                    std::string stripped;
                    for (const std::string& cp : utf8_chars(tok))
                        if (!is_diacritic(cp)) stripped += cp;
                    tok = std::move(stripped);
                }
                if (norm.lowercase)
                    std::transform(tok.begin(), tok.end(), tok.begin(), [](char c) {
                        return static_cast<char>(
                            std::tolower(static_cast<unsigned char>(c)));
                    });
                if (!tok.empty()) ++freq[tok];
            }
        }
    }

    OverlapReport report;
    report.corpus_unique_tokens = freq.size();
    std::vector<std::pair<std::string, std::size_t>> missing;
    for (const auto& [tok, count] : freq) {
        if (vocab.contains(tok))
            ++report.overlapping;
        else
            missing.emplace_back(tok, count);
    }
    report.fraction = report.corpus_unique_tokens == 0
                          ? 0.0
                          : static_cast<double>(report.overlapping) /
                                static_cast<double>(report.corpus_unique_tokens);
    std::stable_sort(missing.begin(), missing.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    if (missing.size() > norm.max_missing_samples)
        missing.resize(norm.max_missing_samples);
    report.sample_missing = std::move(missing);
    return report;
}

}  // namespace ctk
