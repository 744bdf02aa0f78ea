#include "ctk/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ctk/errors.hpp"
#include "ctk/linalg.hpp"
#include "ctk/prng.hpp"

namespace ctk {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        std::size_t pos = line.find('\t', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

bool is_unicode_space(const std::string& s, std::size_t i, std::size_t& len) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
        len = 1;
        return true;
    }
    // U+00A0 no-break space
    if (c == 0xC2 && i + 1 < s.size() &&
        static_cast<unsigned char>(s[i + 1]) == 0xA0) {
        len = 2;
        return true;
    }
    // U+2000..U+200A and U+3000
    if (c == 0xE2 && i + 2 < s.size() &&
        static_cast<unsigned char>(s[i + 1]) == 0x80) {
        unsigned char c3 = static_cast<unsigned char>(s[i + 2]);
        if (c3 >= 0x80 && c3 <= 0x8A) {
            len = 3;
            return true;
        }
    }
    if (c == 0xE3 && i + 2 < s.size() &&
        static_cast<unsigned char>(s[i + 1]) == 0x80 &&
        static_cast<unsigned char>(s[i + 2]) == 0x80) {
        len = 3;
        return true;
    }
    return false;
}

bool text_is_blank(const std::string& s) {
    std::size_t i = 0;
    while (i < s.size()) {
        std::size_t len = 0;
        if (!is_unicode_space(s, i, len)) return false;
        i += len;
    }
    return true;
}

std::size_t find_column(const std::vector<std::string>& header,
                        const std::string& name, bool required) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    if (required) throw SchemaError("missing required column: " + name);
    return static_cast<std::size_t>(-1);
}

// Largest-remainder apportionment of n items over the spec fractions.
// Floors everything, then hands remainders to the largest fractional parts
// (ties to earlier splits).
std::vector<std::size_t> apportion_largest_remainder(std::size_t n,
                                                     const SplitSpec& spec) {
    const std::size_t k = spec.fractions.size();
    std::vector<std::size_t> sizes(k);
    std::vector<std::pair<double, std::size_t>> rema(k);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < k; ++i) {
        double ideal = spec.fractions[i].second * static_cast<double>(n);
        sizes[i] = static_cast<std::size_t>(std::floor(ideal + 1e-12));
        rema[i] = {ideal - static_cast<double>(sizes[i]), i};
        assigned += sizes[i];
    }
    std::stable_sort(rema.begin(), rema.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < n; ++r, ++assigned) sizes[rema[r % k].second]++;
    return sizes;
}

void validate_spec(const SplitSpec& spec) {
    if (spec.fractions.empty()) throw ConfigError("split spec has no fractions");
    double sum = 0.0;
    for (const auto& [name, f] : spec.fractions) {
        if (f <= 0.0 || f > 1.0)
            throw ConfigError("split fraction for '" + name +
                              "' must be in (0, 1], got " + std::to_string(f));
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ConfigError("split fractions must sum to 1.0, got " +
                          std::to_string(sum));
}

}  // namespace

bool Dataset::fully_labeled() const {
    return std::all_of(tweets.begin(), tweets.end(),
                       [](const Tweet& t) { return t.label.has_value(); });
}

bool Dataset::any_labeled() const {
    return std::any_of(tweets.begin(), tweets.end(),
                       [](const Tweet& t) { return t.label.has_value(); });
}

Dataset load_dataset(const std::string& path, const ColumnSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open dataset file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty dataset file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header = split_tabs(line);

    const std::size_t col_topic = find_column(header, schema.topic_id, true);
    const std::size_t col_tweet = find_column(header, schema.tweet_id, true);
    const std::size_t col_text = find_column(header, schema.text, true);
    const std::size_t col_label = find_column(header, schema.label, false);
    const std::size_t col_origin = find_column(header, "origin", false);
    const std::size_t col_lang = find_column(header, "lang", false);
    const bool has_label = col_label != static_cast<std::size_t>(-1);

    Dataset ds;
    ds.name = path;
    std::set<std::string> seen_ids;
    std::vector<std::string> duplicates;
    std::size_t row = 1;
    std::size_t labeled_rows = 0;

    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields = split_tabs(line);
        if (fields.size() != header.size())
            throw ParseError("row " + std::to_string(row) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        Tweet t;
        t.topic_id = fields[col_topic];
        t.tweet_id = fields[col_tweet];
        t.text = fields[col_text];
        if (text_is_blank(t.text))
            throw ValidationError("row " + std::to_string(row) + ": empty tweet text");
        if (has_label && !fields[col_label].empty()) {
            const std::string& lv = fields[col_label];
            if (lv != "0" && lv != "1")
                throw ParseError("row " + std::to_string(row) +
                                 ": label must be 0 or 1, got '" + lv + "'");
            t.label = lv == "1" ? 1 : 0;
            ++labeled_rows;
        }
        if (col_origin != static_cast<std::size_t>(-1) &&
            fields[col_origin] == "augmented")
            t.origin = Origin::augmented;
        if (col_lang != static_cast<std::size_t>(-1)) t.lang = fields[col_lang];
        if (!seen_ids.insert(t.tweet_id).second) duplicates.push_back(t.tweet_id);
        ds.tweets.push_back(std::move(t));
    }

    if (!duplicates.empty()) {
        std::string msg = "duplicate tweet_id values:";
        for (const auto& id : duplicates) msg += " " + id;
        throw ValidationError(msg);
    }
    if (has_label && labeled_rows != 0 && labeled_rows != ds.tweets.size())
        throw ValidationError("partially labeled dataset: " +
                              std::to_string(labeled_rows) + " of " +
                              std::to_string(ds.tweets.size()) +
                              " rows carry a label");
    return ds;
}

void save_dataset(const Dataset& dataset, const std::string& path,
                  const ColumnSchema& schema) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write dataset file: " + path);
    const bool labeled = dataset.any_labeled();
    const bool annotated =
        std::any_of(dataset.tweets.begin(), dataset.tweets.end(), [](const Tweet& t) {
            return t.origin == Origin::augmented || !t.lang.empty();
        });
    out << schema.topic_id << '\t' << schema.tweet_id << '\t' << schema.text;
    if (labeled) out << '\t' << schema.label;
    if (annotated) out << "\torigin\tlang";
    out << '\n';
    for (const Tweet& t : dataset.tweets) {
        if (t.text.find('\t') != std::string::npos ||
            t.text.find('\n') != std::string::npos)
            throw ValidationError("tweet " + t.tweet_id +
                                  ": text contains tab or newline");
        out << t.topic_id << '\t' << t.tweet_id << '\t' << t.text;
        if (labeled) out << '\t' << (t.label ? std::to_string(*t.label) : std::string());
        if (annotated)
            out << '\t' << (t.origin == Origin::augmented ? "augmented" : "original")
                << '\t' << t.lang;
        out << '\n';
    }
}

std::vector<std::pair<std::string, Dataset>> split(const Dataset& dataset,
                                                   const SplitSpec& spec) {
    validate_spec(spec);
    if (spec.stratified && !dataset.fully_labeled())
        throw ContractError("stratified split requires a fully labeled dataset");

    const std::size_t n = dataset.tweets.size();
    const std::size_t k = spec.fractions.size();
    // assignment[i] = split index of tweet i
    std::vector<std::size_t> assignment(n, 0);

    if (!spec.stratified) {
        // round(fraction * total), last split absorbs the remainder
        std::vector<std::size_t> sizes(k, 0);
        std::size_t assigned = 0;
        for (std::size_t i = 0; i + 1 < k; ++i) {
            sizes[i] = static_cast<std::size_t>(
                std::llround(spec.fractions[i].second * static_cast<double>(n)));
            assigned += sizes[i];
        }
        if (assigned > n) throw ConfigError("split fractions over-allocate dataset");
        sizes[k - 1] = n - assigned;

        std::vector<std::size_t> order = shuffled_indices(n, spec.seed);
        std::size_t pos = 0;
        for (std::size_t s = 0; s < k; ++s)
            for (std::size_t c = 0; c < sizes[s]; ++c) assignment[order[pos++]] = s;
    } else {
        // Shuffle within each class, then largest-remainder apportionment of
        // each class across the splits. Keeps every split's positive fraction
        // within one item of the global fraction.
        for (int cls = 0; cls <= 1; ++cls) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < n; ++i)
                if (*dataset.tweets[i].label == cls) members.push_back(i);
            std::vector<std::size_t> order =
                shuffled_indices(members.size(), spec.seed ^ (0xC1A55u + cls));
            std::vector<std::size_t> sizes =
                apportion_largest_remainder(members.size(), spec);
            std::size_t pos = 0;
            for (std::size_t s = 0; s < k; ++s)
                for (std::size_t c = 0; c < sizes[s]; ++c)
                    assignment[members[order[pos++]]] = s;
        }
    }

    std::vector<std::pair<std::string, Dataset>> out;
    out.reserve(k);
    for (std::size_t s = 0; s < k; ++s) {
        Dataset d;
        d.name = spec.fractions[s].first;
        out.emplace_back(spec.fractions[s].first, std::move(d));
    }
    // Membership comes from the shuffle; within a split, input order is kept.
    for (std::size_t i = 0; i < n; ++i)
        out[assignment[i]].second.tweets.push_back(dataset.tweets[i]);
    return out;
}

ClassBalance class_balance(const Dataset& dataset) {
    if (!dataset.fully_labeled())
        throw ContractError("class_balance requires a fully labeled dataset");
    ClassBalance b;
    b.total = dataset.tweets.size();
    for (const Tweet& t : dataset.tweets)
        if (*t.label == 1) ++b.positive;
    b.positive_fraction =
        b.total == 0 ? 0.0
                     : static_cast<double>(b.positive) / static_cast<double>(b.total);
    return b;
}

std::string format_balance(const ClassBalance& balance) {
    long pct = std::lround(balance.positive_fraction * 100.0);
    return "total=" + std::to_string(balance.total) +
           " positive=" + std::to_string(balance.positive) +
           " fraction=" + format_fixed(balance.positive_fraction, 4) + " (" +
           std::to_string(pct) + "%)";
}

}  // namespace ctk
