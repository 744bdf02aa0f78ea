#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ctk {

enum class Origin { original, augmented };

struct Tweet {
    std::string topic_id;
    std::string tweet_id;
    std::string text;
    std::optional<int> label;  // 1 = check-worthy
    Origin origin = Origin::original;
    std::string lang;  // empty = dataset source language; set on pivot-language augments
};

struct Dataset {
    std::string name;
    std::vector<Tweet> tweets;

    bool fully_labeled() const;
    bool any_labeled() const;
};

struct SplitSpec {
    std::vector<std::pair<std::string, double>> fractions;
    std::uint64_t seed = 0;
    bool stratified = false;
};

struct ClassBalance {
    std::size_t total = 0;
    std::size_t positive = 0;
    double positive_fraction = 0.0;
};

// Column-name mapping for TSV ingestion. Label (and origin/lang) columns are
// optional; topic/tweet/text are required.
struct ColumnSchema {
    std::string topic_id = "topic_id";
    std::string tweet_id = "tweet_id";
    std::string text = "tweet_text";
    std::string label = "check_worthiness";
};

Dataset load_dataset(const std::string& path, const ColumnSchema& schema = {});
void save_dataset(const Dataset& dataset, const std::string& path,
                  const ColumnSchema& schema = {});

std::vector<std::pair<std::string, Dataset>> split(const Dataset& dataset,
                                                   const SplitSpec& spec);

ClassBalance class_balance(const Dataset& dataset);

// "0.3053 (31%)" rendering used by the stats command.
std::string format_balance(const ClassBalance& balance);

}  // namespace ctk
