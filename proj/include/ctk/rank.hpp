#pragma once

#include <string>
#include <utility>
#include <vector>

namespace ctk {

struct ScoredTweet {
    std::string topic_id;
    std::string tweet_id;
    double p_negative = 0.0;
    double p_positive = 0.0;
    double score = 0.0;  // p_positive - p_negative, in [-1, 1]
};

struct RankedTopic {
    std::string topic_id;
    std::vector<ScoredTweet> tweets;  // score descending, ties by tweet_id
};

struct RankedRun {
    std::string run_id;
    std::vector<RankedTopic> topics;  // first-seen input order
};

// Stable two-class softmax: (p_negative, p_positive).
std::pair<double, double> softmax2(double logit_negative, double logit_positive);

double score(double p_negative, double p_positive);

RankedRun rank_topics(const std::vector<ScoredTweet>& scored,
                      const std::string& run_id);

// Submission format: topic_id \t tweet_id \t score(6 digits) \t run_id.
void save_run(const RankedRun& run, const std::string& path);
RankedRun load_run(const std::string& path);

void save_scored(const std::vector<ScoredTweet>& scored, const std::string& path);
std::vector<ScoredTweet> load_scored(const std::string& path);

}  // namespace ctk
