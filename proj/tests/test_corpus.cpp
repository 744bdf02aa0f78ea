#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "ctk/corpus.hpp"
#include "ctk/errors.hpp"
#include "ctk/synth.hpp"

using namespace ctk;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::string write_file(const std::string& name, const std::string& content) {
    std::string path = temp_path(name);
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("load_dataset parses a labeled TSV") {
    std::string path = write_file("ds_basic.tsv",
                                  "topic_id\ttweet_id\ttweet_text\tcheck_worthiness\n"
                                  "t1\ta\thello world\t1\n"
                                  "t1\tb\tnothing here\t0\n"
                                  "t2\tc\tbig claim\t1\n");
    Dataset ds = load_dataset(path);
    REQUIRE(ds.tweets.size() == 3);
    CHECK(ds.tweets[0].tweet_id == "a");
    CHECK(*ds.tweets[0].label == 1);
    CHECK(ds.tweets[1].text == "nothing here");
    ClassBalance b = class_balance(ds);
    CHECK(b.positive == 2);
}

TEST_CASE("load_dataset error paths") {
    SUBCASE("missing text column") {
        std::string path = write_file("ds_nocol.tsv",
                                      "topic_id\ttweet_id\tcheck_worthiness\n"
                                      "t1\ta\t1\n");
        CHECK_THROWS_AS(load_dataset(path), SchemaError);
    }
    SUBCASE("duplicate tweet_id") {
        std::string path = write_file("ds_dup.tsv",
                                      "topic_id\ttweet_id\ttweet_text\tcheck_worthiness\n"
                                      "t1\ta\tx y\t1\nt1\ta\tz w\t0\n");
        CHECK_THROWS_WITH_AS(load_dataset(path),
                             doctest::Contains("duplicate tweet_id"), ValidationError);
    }
    SUBCASE("label outside {0,1} names the row") {
        std::string path = write_file("ds_badlabel.tsv",
                                      "topic_id\ttweet_id\ttweet_text\tcheck_worthiness\n"
                                      "t1\ta\tx y\t2\n");
        CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("row 2"), ParseError);
    }
    SUBCASE("empty text rejected, including unicode whitespace") {
        std::string path = write_file("ds_empty.tsv",
                                      "topic_id\ttweet_id\ttweet_text\tcheck_worthiness\n"
                                      "t1\ta\t\xc2\xa0 \t1\n");
        CHECK_THROWS_AS(load_dataset(path), ValidationError);
    }
    SUBCASE("partially labeled dataset is a hard error") {
        std::string path = write_file("ds_partial.tsv",
                                      "topic_id\ttweet_id\ttweet_text\tcheck_worthiness\n"
                                      "t1\ta\tx y\t1\nt1\tb\tz w\t\n");
        CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("partially labeled"),
                             ValidationError);
    }
}

TEST_CASE("class_balance matches the corpus scale fixtures") {
    Dataset arabic = generate_labeled(1500, 458, 3, 9);
    ClassBalance b = class_balance(arabic);
    CHECK(b.total == 1500);
    CHECK(b.positive == 458);
    CHECK(format_balance(b) == "total=1500 positive=458 fraction=0.3053 (31%)");

    // 228 = round(0.34 * 672); verified by direct count below
    Dataset english = generate_labeled(672, 228, 3, 10);
    std::size_t counted = 0;
    for (const Tweet& t : english.tweets)
        if (*t.label == 1) ++counted;
    CHECK(counted == 228);
    ClassBalance e = class_balance(english);
    CHECK(format_balance(e) == "total=672 positive=228 fraction=0.3393 (34%)");

    Dataset none = generate_labeled(10, 0, 1, 11);
    CHECK(class_balance(none).positive_fraction == 0.0);
}

TEST_CASE("split sizes follow round-with-absorbing-remainder") {
    Dataset ds = generate_labeled(10, 4, 1, 3);
    auto splits = split(ds, {{{"train", 0.8}, {"val", 0.2}}, 7, false});
    REQUIRE(splits.size() == 2);
    CHECK(splits[0].second.tweets.size() == 8);
    CHECK(splits[1].second.tweets.size() == 2);

    Dataset big = generate_labeled(1500, 458, 3, 4);
    auto three = split(big, {{{"train", 0.7}, {"val", 0.2}, {"holdout", 0.1}}, 1, false});
    CHECK(three[0].second.tweets.size() == 1050);
    CHECK(three[1].second.tweets.size() == 300);
    CHECK(three[2].second.tweets.size() == 150);

    auto identity = split(ds, {{{"all", 1.0}}, 0, false});
    REQUIRE(identity.size() == 1);
    CHECK(identity[0].second.tweets.size() == ds.tweets.size());
    for (std::size_t i = 0; i < ds.tweets.size(); ++i)
        CHECK(identity[0].second.tweets[i].tweet_id == ds.tweets[i].tweet_id);
}

TEST_CASE("split is a deterministic partition") {
    for (std::uint64_t seed : {1ull, 7ull, 99ull}) {
        Dataset ds = generate_labeled(137, 41, 4, seed);
        SplitSpec spec{{{"a", 0.5}, {"b", 0.3}, {"c", 0.2}}, seed * 31, false};
        auto s1 = split(ds, spec);
        auto s2 = split(ds, spec);
        std::multiset<std::string> all_ids, split_ids;
        for (const Tweet& t : ds.tweets) all_ids.insert(t.tweet_id);
        for (std::size_t i = 0; i < s1.size(); ++i) {
            REQUIRE(s1[i].second.tweets.size() == s2[i].second.tweets.size());
            for (std::size_t j = 0; j < s1[i].second.tweets.size(); ++j)
                CHECK(s1[i].second.tweets[j].tweet_id ==
                      s2[i].second.tweets[j].tweet_id);
            for (const Tweet& t : s1[i].second.tweets) split_ids.insert(t.tweet_id);
        }
        CHECK(all_ids == split_ids);
    }
}

TEST_CASE("stratified split keeps per-split balance within one item") {
    for (std::uint64_t seed : {2ull, 5ull, 11ull, 23ull}) {
        Dataset ds = generate_labeled(233, 71, 5, seed);
        double global = 71.0 / 233.0;
        SplitSpec spec{{{"train", 0.7}, {"val", 0.2}, {"holdout", 0.1}}, seed, true};
        for (const auto& [name, part] : split(ds, spec)) {
            if (part.tweets.empty()) continue;
            ClassBalance b = class_balance(part);
            double deviation = std::abs(b.positive_fraction - global) *
                               static_cast<double>(b.total);
            CHECK(deviation <= 1.0 + 1e-9);
        }
    }
}

TEST_CASE("split rejects bad specs") {
    Dataset ds = generate_labeled(10, 3, 1, 1);
    CHECK_THROWS_AS(split(ds, {{{"a", 0.0}, {"b", 1.0}}, 0, false}), ConfigError);
    CHECK_THROWS_AS(split(ds, {{{"a", 0.5}, {"b", 0.4}}, 0, false}), ConfigError);
    Dataset unlabeled = ds;
    for (Tweet& t : unlabeled.tweets) t.label.reset();
    CHECK_THROWS_AS(split(unlabeled, {{{"a", 1.0}}, 0, true}), ContractError);
    CHECK_THROWS_AS(class_balance(unlabeled), ContractError);
}

TEST_CASE("load -> save -> load round trip") {
    Dataset ds = generate_labeled(50, 17, 3, 12);
    std::string path = temp_path("ds_roundtrip.tsv");
    save_dataset(ds, path);
    Dataset back = load_dataset(path);
    std::string path2 = temp_path("ds_roundtrip2.tsv");
    save_dataset(back, path2);
    Dataset again = load_dataset(path2);
    REQUIRE(again.tweets.size() == ds.tweets.size());
    for (std::size_t i = 0; i < ds.tweets.size(); ++i) {
        CHECK(again.tweets[i].topic_id == ds.tweets[i].topic_id);
        CHECK(again.tweets[i].tweet_id == ds.tweets[i].tweet_id);
        CHECK(again.tweets[i].text == ds.tweets[i].text);
        CHECK(*again.tweets[i].label == *ds.tweets[i].label);
    }
}
