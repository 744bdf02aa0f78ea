#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ctk/corpus.hpp"

namespace ctk {

// Pluggable translation backend. Implementations must be deterministic per
// (text, source, target) within a session.
class TranslationProvider {
public:
    virtual ~TranslationProvider() = default;
    virtual bool supports(const std::string& source, const std::string& target) const = 0;
    virtual std::string translate(const std::string& text, const std::string& source,
                                  const std::string& target) = 0;
};

// Passes text through unchanged; useful for plumbing tests.
class IdentityProvider : public TranslationProvider {
public:
    bool supports(const std::string&, const std::string&) const override { return true; }
    std::string translate(const std::string& text, const std::string&,
                          const std::string&) override {
        return text;
    }
};

// Word-substitution tables loaded from a file. Each line:
//   source_word<TAB>pivot_word<TAB>back_word
// source->pivot maps column 1 to column 2; pivot->source maps column 2 to
// column 3 (the paraphrase). Unlisted words pass through unchanged.
class DictionaryMockProvider : public TranslationProvider {
public:
    DictionaryMockProvider(const std::string& table_path, std::string source_lang,
                           std::string pivot_lang);
    bool supports(const std::string& source, const std::string& target) const override;
    std::string translate(const std::string& text, const std::string& source,
                          const std::string& target) override;

private:
    std::string source_lang_, pivot_lang_;
    std::map<std::string, std::string> to_pivot_, from_pivot_;
};

// Generic JSON-over-HTTP client: POST {text, source, target} -> {text}.
// Credential (if any) is read from the named environment variable and sent
// as a bearer token.
class HttpProvider : public TranslationProvider {
public:
    HttpProvider(std::string endpoint_url, std::string credential_env,
                 std::vector<std::pair<std::string, std::string>> language_pairs,
                 std::size_t retry_limit = 2);
    bool supports(const std::string& source, const std::string& target) const override;
    std::string translate(const std::string& text, const std::string& source,
                          const std::string& target) override;

private:
    std::string endpoint_;
    std::string credential_env_;
    std::vector<std::pair<std::string, std::string>> pairs_;
    std::size_t retry_limit_;
};

// Wraps any provider with an append-only on-disk cache keyed by
// (hash of text, source, target). Repeated experiments cost zero calls.
class CachingProvider : public TranslationProvider {
public:
    CachingProvider(std::shared_ptr<TranslationProvider> inner,
                    std::string cache_path);
    bool supports(const std::string& source, const std::string& target) const override;
    std::string translate(const std::string& text, const std::string& source,
                          const std::string& target) override;

    std::size_t calls() const { return calls_; }
    std::size_t cache_hits() const { return hits_; }

private:
    std::shared_ptr<TranslationProvider> inner_;
    std::string cache_path_;
    std::map<std::string, std::string> cache_;  // key -> translated text
    std::size_t calls_ = 0;
    std::size_t hits_ = 0;
};

enum class AugmentStrategyKind { BackTranslate, PivotOnly, Both };

struct AugmentStrategy {
    AugmentStrategyKind kind = AugmentStrategyKind::BackTranslate;
    std::string source_lang = "ar";
    std::string pivot_lang = "en";
    std::size_t retry_limit = 2;
};

struct AugmentReport {
    std::size_t originals_translated = 0;
    std::size_t tweets_added = 0;
    std::size_t skipped = 0;
    std::vector<std::string> skipped_ids;
    ClassBalance before;
    ClassBalance after;
    std::size_t provider_calls = 0;
    std::size_t cache_hits = 0;
};

struct BackTranslation {
    std::string back;   // source -> pivot -> source
    std::string pivot;  // intermediate pivot-language text
};

BackTranslation back_translate(const std::string& text, TranslationProvider& provider,
                               const std::string& source, const std::string& pivot,
                               std::size_t retry_limit = 2);

std::pair<Dataset, AugmentReport> upsample_positive(const Dataset& dataset,
                                                    const AugmentStrategy& strategy,
                                                    TranslationProvider& provider);

struct GuardResult {
    bool ok = false;
    std::vector<std::string> offending_ids;
    std::vector<std::string> warnings;
};

// Default policy: augmented tweets may live only in the augment-target split,
// and no augmented tweet's source id may appear in any other split.
// allow_leakage reproduces the leaky protocol with a prominent warning.
GuardResult guard_splits(
    const std::vector<std::pair<std::string, Dataset>>& splits,
    const std::string& augment_target, bool allow_leakage);

// "<original id><suffix>" scheme used for augmented tweet ids.
std::string augmented_id(const std::string& source_id, AugmentStrategyKind kind,
                         bool pivot_copy);
// Recovers the source id, or returns the input unchanged for originals.
std::string source_id_of(const std::string& tweet_id);

}  // namespace ctk
