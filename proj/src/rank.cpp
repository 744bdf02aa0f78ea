#include "ctk/rank.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ctk/errors.hpp"
#include "ctk/linalg.hpp"

namespace ctk {

std::pair<double, double> softmax2(double logit_negative, double logit_positive) {
    double mx = std::max(logit_negative, logit_positive);
    double en = std::exp(logit_negative - mx);
    double ep = std::exp(logit_positive - mx);
    double sum = en + ep;
    return {en / sum, ep / sum};
}

double score(double p_negative, double p_positive) {
    return p_positive - p_negative;
}

RankedRun rank_topics(const std::vector<ScoredTweet>& scored,
                      const std::string& run_id) {
    std::set<std::pair<std::string, std::string>> seen;
    for (const ScoredTweet& s : scored)
        if (!seen.insert({s.topic_id, s.tweet_id}).second)
            throw ValidationError("duplicate (topic_id, tweet_id): " + s.topic_id +
                                  ", " + s.tweet_id);

    RankedRun run;
    run.run_id = run_id;
    std::map<std::string, std::size_t> topic_index;
    // Group by topic. Topic order follows the sorted (topic_id, tweet_id)
    // key space rather than input order so the run is permutation-invariant.
    std::vector<ScoredTweet> sorted = scored;
    std::sort(sorted.begin(), sorted.end(),
              [](const ScoredTweet& a, const ScoredTweet& b) {
                  if (a.topic_id != b.topic_id) return a.topic_id < b.topic_id;
                  if (a.score != b.score) return a.score > b.score;
                  return a.tweet_id < b.tweet_id;
              });
    for (ScoredTweet& s : sorted) {
        auto it = topic_index.find(s.topic_id);
        if (it == topic_index.end()) {
            topic_index.emplace(s.topic_id, run.topics.size());
            run.topics.push_back({s.topic_id, {}});
            it = topic_index.find(s.topic_id);
        }
        run.topics[it->second].tweets.push_back(std::move(s));
    }
    return run;
}

void save_run(const RankedRun& run, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write run file: " + path);
    for (const RankedTopic& topic : run.topics)
        for (const ScoredTweet& s : topic.tweets)
            out << topic.topic_id << '\t' << s.tweet_id << '\t'
                << format_fixed(s.score, 6) << '\t' << run.run_id << '\n';
}

RankedRun load_run(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open run file: " + path);
    RankedRun run;
    std::map<std::string, std::size_t> topic_index;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string topic, tweet, score_str, run_id;
        if (!std::getline(ss, topic, '\t') || !std::getline(ss, tweet, '\t') ||
            !std::getline(ss, score_str, '\t') || !std::getline(ss, run_id, '\t'))
            throw ParseError("run file line " + std::to_string(lineno) +
                             ": expected 4 tab-separated fields");
        if (run.run_id.empty()) run.run_id = run_id;
        ScoredTweet s;
        s.topic_id = topic;
        s.tweet_id = tweet;
        s.score = std::stod(score_str);
        auto it = topic_index.find(topic);
        if (it == topic_index.end()) {
            topic_index.emplace(topic, run.topics.size());
            run.topics.push_back({topic, {}});
            it = topic_index.find(topic);
        }
        run.topics[it->second].tweets.push_back(std::move(s));
    }
    return run;
}

void save_scored(const std::vector<ScoredTweet>& scored, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write scored file: " + path);
    out << "topic_id\ttweet_id\tp_negative\tp_positive\tscore\n";
    for (const ScoredTweet& s : scored)
        out << s.topic_id << '\t' << s.tweet_id << '\t'
            << format_fixed(s.p_negative, 6) << '\t' << format_fixed(s.p_positive, 6)
            << '\t' << format_fixed(s.score, 6) << '\n';
}

std::vector<ScoredTweet> load_scored(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open scored file: " + path);
    std::vector<ScoredTweet> out;
    std::string line;
    if (!std::getline(in, line)) return out;  // empty file -> empty list
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        ScoredTweet s;
        std::string pn, pp, sc;
        if (!std::getline(ss, s.topic_id, '\t') || !std::getline(ss, s.tweet_id, '\t') ||
            !std::getline(ss, pn, '\t') || !std::getline(ss, pp, '\t') ||
            !std::getline(ss, sc, '\t'))
            throw ParseError("scored file line " + std::to_string(lineno) +
                             ": expected 5 tab-separated fields");
        s.p_negative = std::stod(pn);
        s.p_positive = std::stod(pp);
        s.score = std::stod(sc);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace ctk
