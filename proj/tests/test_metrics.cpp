#include "doctest.h"

#include "ctk/errors.hpp"
#include "ctk/metrics.hpp"
#include "ctk/prng.hpp"

using namespace ctk;

namespace {

// Brute-force recounts straight from the definitions; shared with the
// acceptance suite via duplication on purpose (kept independent of the
// implementation under test).
struct Oracle {
    static std::size_t relevant_in_prefix(const std::vector<std::string>& ranking,
                                          const std::map<std::string, int>& qrels,
                                          std::size_t prefix) {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < prefix && i < ranking.size(); ++i) {
            auto it = qrels.find(ranking[i]);
            if (it != qrels.end() && it->second == 1) ++hits;
        }
        return hits;
    }
    static double p_at_k(const std::vector<std::string>& r,
                         const std::map<std::string, int>& q, std::size_t k) {
        return static_cast<double>(relevant_in_prefix(r, q, k)) /
               static_cast<double>(k);
    }
    static double ap(const std::vector<std::string>& r,
                     const std::map<std::string, int>& q) {
        std::size_t total_rel = 0;
        for (const auto& [id, rel] : q)
            if (rel == 1) ++total_rel;
        if (total_rel == 0) return 0.0;
        double sum = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            auto it = q.find(r[i]);
            if (it != q.end() && it->second == 1)
                sum += static_cast<double>(relevant_in_prefix(r, q, i + 1)) /
                       static_cast<double>(i + 1);
        }
        return sum / static_cast<double>(total_rel);
    }
    static double rr(const std::vector<std::string>& r,
                     const std::map<std::string, int>& q) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            auto it = q.find(r[i]);
            if (it != q.end() && it->second == 1)
                return 1.0 / static_cast<double>(i + 1);
        }
        return 0.0;
    }
    static double rp(const std::vector<std::string>& r,
                     const std::map<std::string, int>& q) {
        std::size_t total_rel = 0;
        for (const auto& [id, rel] : q)
            if (rel == 1) ++total_rel;
        if (total_rel == 0) return 0.0;
        return p_at_k(r, q, total_rel);
    }
};

std::vector<std::string> pattern_ranking(const std::vector<int>& pattern,
                                         std::map<std::string, int>& qrels) {
    std::vector<std::string> ranking;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        std::string id = "d" + std::to_string(i);
        ranking.push_back(id);
        qrels[id] = pattern[i];
    }
    return ranking;
}

}  // namespace

TEST_CASE("precision_at_k examples") {
    std::map<std::string, int> q;
    auto r = pattern_ranking({1, 1, 0}, q);
    CHECK(precision_at_k(r, q, 3) == doctest::Approx(2.0 / 3.0));
    CHECK(precision_at_k(r, q, 2) == doctest::Approx(1.0));
    // short-list convention: denominator stays k
    std::map<std::string, int> q2;
    auto r2 = pattern_ranking({1, 1}, q2);
    CHECK(precision_at_k(r2, q2, 5) == doctest::Approx(2.0 / 5.0));
    CHECK(precision_at_k(r2, q2, 5) == doctest::Approx(Oracle::p_at_k(r2, q2, 5)));
    CHECK_THROWS_AS(precision_at_k(r2, q2, 0), ContractError);
}

TEST_CASE("average_precision examples") {
    std::map<std::string, int> q;
    auto r = pattern_ranking({1, 0, 1, 0}, q);
    CHECK(average_precision(r, q) == doctest::Approx(0.5 * (1.0 + 2.0 / 3.0)));

    std::map<std::string, int> perfect_q;
    auto perfect = pattern_ranking({1, 1, 1, 0, 0}, perfect_q);
    CHECK(average_precision(perfect, perfect_q) == doctest::Approx(1.0));

    // relevant items exist but none retrieved
    std::map<std::string, int> q3 = {{"missing", 1}};
    std::vector<std::string> r3 = {"other"};
    CHECK(average_precision(r3, q3) == 0.0);
}

TEST_CASE("reciprocal_rank and r_precision examples") {
    std::map<std::string, int> q;
    auto r = pattern_ranking({0, 1, 0}, q);
    CHECK(reciprocal_rank(r, q) == doctest::Approx(0.5));
    std::map<std::string, int> q2;
    auto r2 = pattern_ranking({1, 0, 1, 0}, q2);
    CHECK(reciprocal_rank(r2, q2) == 1.0);
    CHECK(r_precision(r2, q2) == doctest::Approx(0.5));  // R=2, top-2 = [1,0]
    std::map<std::string, int> none;
    auto r3 = pattern_ranking({0, 0}, none);
    CHECK(reciprocal_rank(r3, none) == 0.0);
    CHECK(r_precision(r3, none) == 0.0);
}

TEST_CASE("metrics match the brute-force oracle on random instances") {
    SplitMix64 rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        std::map<std::string, int> qrels;
        std::vector<int> pattern;
        std::size_t n = 1 + rng.next_below(50);
        for (std::size_t i = 0; i < n; ++i)
            pattern.push_back(rng.next_below(2) == 1 ? 1 : 0);
        auto ranking = pattern_ranking(pattern, qrels);
        for (std::size_t k : precision_k_grid())
            CHECK(precision_at_k(ranking, qrels, k) ==
                  doctest::Approx(Oracle::p_at_k(ranking, qrels, k)).epsilon(1e-12));
        CHECK(average_precision(ranking, qrels) ==
              doctest::Approx(Oracle::ap(ranking, qrels)).epsilon(1e-12));
        CHECK(reciprocal_rank(ranking, qrels) ==
              doctest::Approx(Oracle::rr(ranking, qrels)).epsilon(1e-12));
        CHECK(r_precision(ranking, qrels) ==
              doctest::Approx(Oracle::rp(ranking, qrels)).epsilon(1e-12));
    }
}

TEST_CASE("P@k flip property and AP swap property") {
    SplitMix64 rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        std::map<std::string, int> qrels;
        std::vector<int> pattern;
        for (int i = 0; i < 20; ++i) pattern.push_back(rng.next_below(2) ? 1 : 0);
        auto ranking = pattern_ranking(pattern, qrels);

        std::size_t k = 1 + rng.next_below(20);
        std::size_t flip = rng.next_below(k);
        if (pattern[flip] == 0) {
            double before = precision_at_k(ranking, qrels, k);
            qrels["d" + std::to_string(flip)] = 1;
            double after = precision_at_k(ranking, qrels, k);
            CHECK(after - before ==
                  doctest::Approx(1.0 / static_cast<double>(k)).epsilon(1e-12));
            qrels["d" + std::to_string(flip)] = 0;
        }

        // moving a relevant item up never decreases AP
        double base_ap = average_precision(ranking, qrels);
        for (std::size_t i = 1; i < ranking.size(); ++i) {
            if (qrels[ranking[i]] == 1 && qrels[ranking[i - 1]] == 0) {
                auto swapped = ranking;
                std::swap(swapped[i], swapped[i - 1]);
                CHECK(average_precision(swapped, qrels) >= base_ap - 1e-12);
            }
        }
    }
}

TEST_CASE("evaluate_run aggregates and guards topics") {
    RelevanceJudgments qrels;
    qrels.topics["t1"] = {{"a", 1}, {"b", 0}};
    RankedRun run;
    run.run_id = "r";
    run.topics.push_back({"t1", {{"t1", "a", 0.1, 0.9, 0.8}, {"t1", "b", 0.6, 0.4, -0.2}}});
    MetricReport rep = evaluate_run(run, qrels);
    CHECK(rep.aggregate.average_precision == doctest::Approx(1.0));
    CHECK(rep.aggregate.reciprocal_rank == doctest::Approx(1.0));
    CHECK(rep.aggregate.precision_at.at(1) == doctest::Approx(1.0));
    // short ranking: P@30 uses denominator 30
    CHECK(rep.aggregate.precision_at.at(30) == doctest::Approx(1.0 / 30.0));

    RankedRun bad = run;
    bad.topics[0].topic_id = "unknown";
    CHECK_THROWS_WITH_AS(evaluate_run(bad, qrels), doctest::Contains("unknown"),
                         ValidationError);
}

TEST_CASE("unjudged ids are counted, not fatal") {
    RelevanceJudgments qrels;
    qrels.topics["t1"] = {{"a", 1}};
    RankedRun run;
    run.run_id = "r";
    run.topics.push_back({"t1", {{"t1", "a", 0.1, 0.9, 0.8}, {"t1", "zz", 0.5, 0.5, 0.0}}});
    MetricReport rep = evaluate_run(run, qrels);
    CHECK(rep.unjudged_total == 1);
}

TEST_CASE("ap cutoff flag") {
    std::map<std::string, int> q;
    auto r = pattern_ranking({0, 0, 1, 1}, q);
    MetricOptions cut;
    cut.ap_cutoff = 2;
    CHECK(average_precision(r, q, cut) == 0.0);  // both hits beyond the cutoff
    cut.ap_normalize_by_cutoff = true;
    CHECK(average_precision(r, q, cut) == 0.0);
    MetricOptions untruncated;
    CHECK(average_precision(r, q, untruncated) > 0.0);
}

TEST_CASE("report rendering uses 4 digits and the fixed column order") {
    TopicMetrics t;
    t.topic_id = "t1";
    t.reciprocal_rank = 1.0;
    t.r_precision = 0.7167;
    t.average_precision = 0.8064;
    for (std::size_t k : precision_k_grid()) t.precision_at[k] = 1.0;
    t.precision_at[20] = 0.95;
    t.precision_at[30] = 0.74;
    MetricReport rep = aggregate_topics({t});
    std::string rendered = render_report(rep);
    CHECK(rendered.find("topic\tRR\tR-P\tP@1\tP@3\tP@5\tP@10\tP@15\tP@20\tP@25\tP@30\tAP\n") !=
          std::string::npos);
    CHECK(rendered.find("ALL\t1.0000\t0.7167\t1.0000\t1.0000\t1.0000\t1.0000\t1.0000"
                        "\t0.9500\t1.0000\t0.7400\t0.8064\n") != std::string::npos);
}
