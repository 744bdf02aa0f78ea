#include "ctk/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ctk/errors.hpp"
#include "ctk/linalg.hpp"

namespace ctk {

namespace {

int relevance_of(const std::map<std::string, int>& qrels, const std::string& id) {
    auto it = qrels.find(id);
    return it == qrels.end() ? 0 : it->second;  // unjudged counts as non-relevant
}

std::size_t total_relevant(const std::map<std::string, int>& qrels) {
    std::size_t r = 0;
    for (const auto& [id, rel] : qrels)
        if (rel) ++r;
    return r;
}

}  // namespace

double precision_at_k(const std::vector<std::string>& ranking,
                      const std::map<std::string, int>& qrels, std::size_t k) {
    if (k == 0) throw ContractError("precision_at_k requires k >= 1");
    std::size_t hits = 0;
    std::size_t upto = std::min(k, ranking.size());
    for (std::size_t i = 0; i < upto; ++i)
        if (relevance_of(qrels, ranking[i])) ++hits;
    // denominator stays k even for rankings shorter than k
    return static_cast<double>(hits) / static_cast<double>(k);
}

double average_precision(const std::vector<std::string>& ranking,
                         const std::map<std::string, int>& qrels,
                         const MetricOptions& opt) {
    std::size_t relevant_total = total_relevant(qrels);
    if (relevant_total == 0) return 0.0;
    std::size_t upto = ranking.size();
    double denom = static_cast<double>(relevant_total);
    if (opt.ap_cutoff > 0) {
        upto = std::min(upto, opt.ap_cutoff);
        if (opt.ap_normalize_by_cutoff)
            denom = static_cast<double>(std::min(relevant_total, opt.ap_cutoff));
    }
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < upto; ++i) {
        if (relevance_of(qrels, ranking[i])) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    return sum / denom;
}

double reciprocal_rank(const std::vector<std::string>& ranking,
                       const std::map<std::string, int>& qrels) {
    for (std::size_t i = 0; i < ranking.size(); ++i)
        if (relevance_of(qrels, ranking[i])) return 1.0 / static_cast<double>(i + 1);
    return 0.0;
}

double r_precision(const std::vector<std::string>& ranking,
                   const std::map<std::string, int>& qrels) {
    std::size_t r = total_relevant(qrels);
    if (r == 0) return 0.0;
    return precision_at_k(ranking, qrels, r);
}

MetricReport aggregate_topics(std::vector<TopicMetrics> per_topic) {
    MetricReport report;
    report.aggregate.topic_id = "ALL";
    for (std::size_t k : precision_k_grid()) report.aggregate.precision_at[k] = 0.0;
    for (const TopicMetrics& t : per_topic) {
        report.aggregate.reciprocal_rank += t.reciprocal_rank;
        report.aggregate.r_precision += t.r_precision;
        report.aggregate.average_precision += t.average_precision;
        for (std::size_t k : precision_k_grid())
            report.aggregate.precision_at[k] += t.precision_at.at(k);
        report.unjudged_total += t.unjudged;
    }
    if (!per_topic.empty()) {
        double n = static_cast<double>(per_topic.size());
        report.aggregate.reciprocal_rank /= n;
        report.aggregate.r_precision /= n;
        report.aggregate.average_precision /= n;
        for (std::size_t k : precision_k_grid()) report.aggregate.precision_at[k] /= n;
    }
    report.per_topic = std::move(per_topic);
    return report;
}

MetricReport evaluate_run(const RankedRun& run, const RelevanceJudgments& qrels,
                          const MetricOptions& opt) {
    std::vector<TopicMetrics> rows;
    rows.reserve(run.topics.size());
    for (const RankedTopic& topic : run.topics) {
        auto it = qrels.topics.find(topic.topic_id);
        if (it == qrels.topics.end())
            throw ValidationError("run topic absent from qrels: " + topic.topic_id);
        const auto& judgments = it->second;
        std::vector<std::string> ranking;
        ranking.reserve(topic.tweets.size());
        for (const ScoredTweet& s : topic.tweets) ranking.push_back(s.tweet_id);

        TopicMetrics m;
        m.topic_id = topic.topic_id;
        m.reciprocal_rank = reciprocal_rank(ranking, judgments);
        m.r_precision = r_precision(ranking, judgments);
        m.average_precision = average_precision(ranking, judgments, opt);
        for (std::size_t k : precision_k_grid())
            m.precision_at[k] = precision_at_k(ranking, judgments, k);
        for (const std::string& id : ranking)
            if (judgments.find(id) == judgments.end()) ++m.unjudged;
        rows.push_back(std::move(m));
    }
    return aggregate_topics(std::move(rows));
}

RelevanceJudgments load_qrels(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open qrels file: " + path);
    RelevanceJudgments qrels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string topic, tweet, rel;
        if (!std::getline(ss, topic, '\t') || !std::getline(ss, tweet, '\t') ||
            !std::getline(ss, rel, '\t'))
            throw ParseError("qrels line " + std::to_string(lineno) +
                             ": expected 3 tab-separated fields");
        if (rel != "0" && rel != "1")
            throw ParseError("qrels line " + std::to_string(lineno) +
                             ": relevance must be 0 or 1, got '" + rel + "'");
        auto& topic_map = qrels.topics[topic];
        if (!topic_map.emplace(tweet, rel == "1" ? 1 : 0).second)
            throw ValidationError("qrels line " + std::to_string(lineno) +
                                  ": duplicate judgment for " + topic + "/" + tweet);
    }
    return qrels;
}

std::string render_report(const MetricReport& report) {
    std::ostringstream out;
    out << "topic\tRR\tR-P";
    for (std::size_t k : precision_k_grid()) out << "\tP@" << k;
    out << "\tAP\n";
    auto row = [&](const TopicMetrics& m) {
        out << m.topic_id << '\t' << format_fixed(m.reciprocal_rank, 4) << '\t'
            << format_fixed(m.r_precision, 4);
        for (std::size_t k : precision_k_grid())
            out << '\t' << format_fixed(m.precision_at.at(k), 4);
        out << '\t' << format_fixed(m.average_precision, 4) << '\n';
    };
    for (const TopicMetrics& m : report.per_topic) row(m);
    row(report.aggregate);
    if (report.unjudged_total > 0)
        out << "# unjudged ranked ids (counted non-relevant): "
            << report.unjudged_total << '\n';
    return out.str();
}

}  // namespace ctk
