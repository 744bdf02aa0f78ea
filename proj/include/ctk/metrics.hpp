#pragma once

#include <map>
#include <string>
#include <vector>

#include "ctk/rank.hpp"

namespace ctk {

// Gold relevance per topic: tweet_id -> {0,1}.
struct RelevanceJudgments {
    std::map<std::string, std::map<std::string, int>> topics;
};

inline const std::vector<std::size_t>& precision_k_grid() {
    static const std::vector<std::size_t> grid = {1, 3, 5, 10, 15, 20, 25, 30};
    return grid;
}

struct TopicMetrics {
    std::string topic_id;
    double reciprocal_rank = 0.0;
    double r_precision = 0.0;
    std::map<std::size_t, double> precision_at;  // keyed by k
    double average_precision = 0.0;
    std::size_t unjudged = 0;  // ranked ids absent from the qrels
};

struct MetricReport {
    std::vector<TopicMetrics> per_topic;
    TopicMetrics aggregate;  // arithmetic means; aggregate AP column is mAP
    std::size_t unjudged_total = 0;
};

struct MetricOptions {
    // 0 = untruncated AP; a positive value truncates the ranking first.
    std::size_t ap_cutoff = 0;
    // Normalize AP by min(R, cutoff) instead of R (cross-checking other
    // evaluators); only meaningful with a cutoff.
    bool ap_normalize_by_cutoff = false;
};

double precision_at_k(const std::vector<std::string>& ranking,
                      const std::map<std::string, int>& qrels, std::size_t k);
double average_precision(const std::vector<std::string>& ranking,
                         const std::map<std::string, int>& qrels,
                         const MetricOptions& opt = {});
double reciprocal_rank(const std::vector<std::string>& ranking,
                       const std::map<std::string, int>& qrels);
double r_precision(const std::vector<std::string>& ranking,
                   const std::map<std::string, int>& qrels);

MetricReport evaluate_run(const RankedRun& run, const RelevanceJudgments& qrels,
                          const MetricOptions& opt = {});

// Aggregate-only entry point: fold already-computed per-topic rows into the
// ALL row. evaluate_run uses it; report-format tests feed it fixtures.
MetricReport aggregate_topics(std::vector<TopicMetrics> per_topic);

RelevanceJudgments load_qrels(const std::string& path);

// Tab-separated table, one row per topic plus the ALL row, 4 fractional
// digits. Columns: topic, RR, R-P, P@1..P@30, AP.
std::string render_report(const MetricReport& report);

}  // namespace ctk
