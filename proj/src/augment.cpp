#include "ctk/augment.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "ctk/errors.hpp"
#include "ctk/tokenizer.hpp"

#include "httplib.h"
#include "json.hpp"

namespace ctk {

namespace {

std::string fnv1a64_hex(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string escape_field(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '\\') out += "\\\\";
        else if (c == '\t') out += "\\t";
        else if (c == '\n') out += "\\n";
        else out += c;
    }
    return out;
}

std::string unescape_field(const std::string& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
            char n = s[++i];
            out += n == 't' ? '\t' : n == 'n' ? '\n' : n;
        } else {
            out += s[i];
        }
    }
    return out;
}

std::string map_words(const std::string& text,
                      const std::map<std::string, std::string>& table) {
    std::string out;
    bool first = true;
    for (const std::string& word : whitespace_split(text)) {
        if (!first) out += ' ';
        first = false;
        auto it = table.find(word);
        out += it == table.end() ? word : it->second;
    }
    return out;
}

std::string translate_with_retry(TranslationProvider& provider,
                                 const std::string& text, const std::string& source,
                                 const std::string& target, std::size_t retry_limit) {
    std::size_t attempts = 0;
    for (;;) {
        try {
            return provider.translate(text, source, target);
        } catch (const ProviderError&) {
            if (attempts++ >= retry_limit) throw;
        }
    }
}

}  // namespace

DictionaryMockProvider::DictionaryMockProvider(const std::string& table_path,
                                               std::string source_lang,
                                               std::string pivot_lang)
    : source_lang_(std::move(source_lang)), pivot_lang_(std::move(pivot_lang)) {
    std::ifstream in(table_path, std::ios::binary);
    if (!in) throw ValidationError("cannot open mock translation table: " + table_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string src, pivot, back;
        if (!std::getline(ss, src, '\t') || !std::getline(ss, pivot, '\t') ||
            !std::getline(ss, back, '\t'))
            throw ParseError("mock table line " + std::to_string(lineno) +
                             ": expected 3 tab-separated words");
        to_pivot_[src] = pivot;
        from_pivot_[pivot] = back;
    }
}

bool DictionaryMockProvider::supports(const std::string& source,
                                      const std::string& target) const {
    return (source == source_lang_ && target == pivot_lang_) ||
           (source == pivot_lang_ && target == source_lang_);
}

std::string DictionaryMockProvider::translate(const std::string& text,
                                              const std::string& source,
                                              const std::string& target) {
    if (!supports(source, target))
        throw ProviderError("unsupported language pair " + source + "->" + target);
    return map_words(text, source == source_lang_ ? to_pivot_ : from_pivot_);
}

HttpProvider::HttpProvider(std::string endpoint_url, std::string credential_env,
                           std::vector<std::pair<std::string, std::string>> pairs,
                           std::size_t retry_limit)
    : endpoint_(std::move(endpoint_url)),
      credential_env_(std::move(credential_env)),
      pairs_(std::move(pairs)),
      retry_limit_(retry_limit) {}

bool HttpProvider::supports(const std::string& source,
                            const std::string& target) const {
    if (pairs_.empty()) return true;
    for (const auto& [s, t] : pairs_)
        if (s == source && t == target) return true;
    return false;
}

std::string HttpProvider::translate(const std::string& text,
                                    const std::string& source,
                                    const std::string& target) {
    if (!supports(source, target))
        throw ProviderError("unsupported language pair " + source + "->" + target);
    // split endpoint into scheme://host[:port] and path
    std::size_t scheme_end = endpoint_.find("://");
    std::size_t path_start = scheme_end == std::string::npos
                                 ? endpoint_.find('/')
                                 : endpoint_.find('/', scheme_end + 3);
    std::string base = path_start == std::string::npos ? endpoint_
                                                       : endpoint_.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/"
                                                       : endpoint_.substr(path_start);

    httplib::Client client(base);
    client.set_connection_timeout(5);
    client.set_read_timeout(10);
    httplib::Headers headers;
    if (!credential_env_.empty()) {
        const char* cred = std::getenv(credential_env_.c_str());
        if (cred != nullptr)
            headers.emplace("Authorization", std::string("Bearer ") + cred);
    }
    nlohmann::json body = {{"text", text}, {"source", source}, {"target", target}};

    std::size_t attempts = 0;
    for (;;) {
        auto res = client.Post(path, headers, body.dump(), "application/json");
        if (res && res->status == 200) {
            try {
                auto parsed = nlohmann::json::parse(res->body);
                return parsed.at("text").get<std::string>();
            } catch (const std::exception& e) {
                throw ProviderError(std::string("malformed translation response: ") +
                                    e.what());
            }
        }
        if (attempts++ >= retry_limit_)
            throw ProviderError("translation request to " + endpoint_ + " failed" +
                                (res ? " with status " + std::to_string(res->status)
                                     : " (no response)"));
    }
}

CachingProvider::CachingProvider(std::shared_ptr<TranslationProvider> inner,
                                 std::string cache_path)
    : inner_(std::move(inner)), cache_path_(std::move(cache_path)) {
    std::ifstream in(cache_path_, std::ios::binary);
    if (!in) return;  // cold cache
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string hash, src, tgt, text;
        if (std::getline(ss, hash, '\t') && std::getline(ss, src, '\t') &&
            std::getline(ss, tgt, '\t') && std::getline(ss, text))
            cache_[hash + "|" + src + "|" + tgt] = unescape_field(text);
    }
}

bool CachingProvider::supports(const std::string& source,
                               const std::string& target) const {
    return inner_->supports(source, target);
}

std::string CachingProvider::translate(const std::string& text,
                                       const std::string& source,
                                       const std::string& target) {
    std::string key = fnv1a64_hex(text) + "|" + source + "|" + target;
    auto it = cache_.find(key);
    if (it != cache_.end()) {
        ++hits_;
        return it->second;
    }
    std::string result = inner_->translate(text, source, target);
    ++calls_;
    cache_[key] = result;
    std::ofstream out(cache_path_, std::ios::binary | std::ios::app);
    if (out)
        out << fnv1a64_hex(text) << '\t' << source << '\t' << target << '\t'
            << escape_field(result) << '\n';
    return result;
}

BackTranslation back_translate(const std::string& text, TranslationProvider& provider,
                               const std::string& source, const std::string& pivot,
                               std::size_t retry_limit) {
    if (!provider.supports(source, pivot) || !provider.supports(pivot, source))
        throw ContractError("provider does not support " + source + "<->" + pivot);
    BackTranslation bt;
    bt.pivot = translate_with_retry(provider, text, source, pivot, retry_limit);
    bt.back = translate_with_retry(provider, bt.pivot, pivot, source, retry_limit);
    return bt;
}

std::string augmented_id(const std::string& source_id, AugmentStrategyKind,
                         bool pivot_copy) {
    return source_id + (pivot_copy ? "_pv" : "_bt");
}

std::string source_id_of(const std::string& tweet_id) {
    if (tweet_id.size() > 3 &&
        (tweet_id.ends_with("_bt") || tweet_id.ends_with("_pv")))
        return tweet_id.substr(0, tweet_id.size() - 3);
    return tweet_id;
}

std::pair<Dataset, AugmentReport> upsample_positive(const Dataset& dataset,
                                                    const AugmentStrategy& strategy,
                                                    TranslationProvider& provider) {
    if (!dataset.fully_labeled())
        throw ContractError("upsample_positive requires a labeled dataset");
    if (strategy.pivot_lang == strategy.source_lang)
        throw ConfigError("pivot language must differ from source language");

    AugmentReport report;
    report.before = class_balance(dataset);

    Dataset out = dataset;
    out.name = dataset.name;
    std::vector<Tweet> added;

    auto* caching = dynamic_cast<CachingProvider*>(&provider);
    std::size_t calls_before = caching ? caching->calls() : 0;
    std::size_t hits_before = caching ? caching->cache_hits() : 0;

    for (const Tweet& t : dataset.tweets) {
        if (*t.label != 1) continue;
        BackTranslation bt;
        try {
            bt = back_translate(t.text, provider, strategy.source_lang,
                                strategy.pivot_lang, strategy.retry_limit);
        } catch (const ProviderError&) {
            ++report.skipped;
            report.skipped_ids.push_back(t.tweet_id);
            continue;
        }
        ++report.originals_translated;
        if (strategy.kind == AugmentStrategyKind::BackTranslate ||
            strategy.kind == AugmentStrategyKind::Both) {
            Tweet copy;
            copy.topic_id = t.topic_id;
            copy.tweet_id = augmented_id(t.tweet_id, strategy.kind, false);
            copy.text = bt.back;
            copy.label = 1;
            copy.origin = Origin::augmented;
            added.push_back(std::move(copy));
        }
        if (strategy.kind == AugmentStrategyKind::PivotOnly ||
            strategy.kind == AugmentStrategyKind::Both) {
            Tweet copy;
            copy.topic_id = t.topic_id;
            copy.tweet_id = augmented_id(t.tweet_id, strategy.kind, true);
            copy.text = bt.pivot;
            copy.label = 1;
            copy.origin = Origin::augmented;
            copy.lang = strategy.pivot_lang;
            added.push_back(std::move(copy));
        }
    }

    report.tweets_added = added.size();
    for (Tweet& t : added) out.tweets.push_back(std::move(t));
    report.after = class_balance(out);
    if (caching) {
        report.provider_calls = caching->calls() - calls_before;
        report.cache_hits = caching->cache_hits() - hits_before;
    }
    return {std::move(out), std::move(report)};
}

GuardResult guard_splits(const std::vector<std::pair<std::string, Dataset>>& splits,
                         const std::string& augment_target, bool allow_leakage) {
    GuardResult result;
    std::map<std::string, std::string> original_split;  // source id -> split name
    for (const auto& [name, ds] : splits)
        for (const Tweet& t : ds.tweets)
            if (t.origin == Origin::original) original_split[t.tweet_id] = name;

    std::set<std::string> offending;
    for (const auto& [name, ds] : splits) {
        for (const Tweet& t : ds.tweets) {
            if (t.origin != Origin::augmented) continue;
            if (name != augment_target) {
                offending.insert(t.tweet_id);
                continue;
            }
            // an augmented copy of a tweet held out for evaluation leaks labels
            auto it = original_split.find(source_id_of(t.tweet_id));
            if (it != original_split.end() && it->second != augment_target)
                offending.insert(t.tweet_id);
        }
    }

    result.offending_ids.assign(offending.begin(), offending.end());
    if (offending.empty()) {
        result.ok = true;
        return result;
    }
    if (allow_leakage) {
        result.ok = true;
        std::string msg = "WARNING: label leakage permitted for " +
                          std::to_string(offending.size()) +
                          " augmented tweet(s):";
        for (const std::string& id : result.offending_ids) msg += " " + id;
        result.warnings.push_back(msg);
        return result;
    }
    std::string msg = "label leakage detected:";
    for (const std::string& id : result.offending_ids) msg += " " + id;
    throw ValidationError(msg);
}

}  // namespace ctk
