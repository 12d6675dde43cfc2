#include "doctest.h"

#include <cmath>

#include "botlab/analysis.hpp"
#include "botlab/error.hpp"
#include "mwu_oracle.hpp"
#include "support.hpp"

using namespace botlab;

namespace {

TweetRecord tweet(std::string id, std::string user, std::optional<std::string> lang,
                  std::optional<std::string> declared = std::nullopt) {
  TweetRecord t;
  t.tweet_id = std::move(id);
  t.author.user_id = std::move(user);
  t.author.screen_name = "s" + t.author.user_id;
  t.author.declared_language = std::move(declared);
  t.created_at = from_civil(2021, 11, 1);
  t.author.created_at = from_civil(2020, 1, 1);
  t.text = "hi $SHIB";
  t.lang = std::move(lang);
  t.cashtags = {"SHIB"};
  return t;
}

AnalyticalSample sample_of(std::string name, std::vector<double> scores) {
  AnalyticalSample s;
  s.group_name = std::move(name);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const std::string uid = s.group_name + std::to_string(i);
    s.tweets.push_back({"t" + uid, uid, scores[i]});
    s.accounts[uid] = scores[i];
  }
  return s;
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("Mann-Whitney worked examples") {
    const std::vector<double> same{1, 2, 3};
    const TestResult tied = mann_whitney_u(same, same);
    CHECK(tied.statistic == 4.5);
    CHECK(tied.p_value == doctest::Approx(1.0));
    CHECK(tied.method == TestMethod::NormalApprox);

    const std::vector<double> lo{1, 2}, hi{3, 4};
    const TestResult r = mann_whitney_u(lo, hi);
    CHECK(r.method == TestMethod::Exact);
    CHECK(r.statistic == 0);
    CHECK(r.p_value == doctest::Approx(1.0 / 3).epsilon(1e-14));

    const std::vector<double> a{1, 2, 3, 4}, b{5, 6, 7, 8};
    CHECK(mann_whitney_u(a, b).p_value == doctest::Approx(2.0 / 70).epsilon(1e-14));
    CHECK(mann_whitney_u(b, a).statistic == 16);

    CHECK_THROWS_AS(mann_whitney_u(same, same, MwuMethod::Exact), ValidationError);
    CHECK_THROWS_AS(mann_whitney_u({}, same), ValidationError);
    const std::vector<double> c{5};
    CHECK(mann_whitney_u(c, c).p_value == 1.0);
  }

  TEST_CASE("exact p matches enumeration") {
    for (const auto& [a, b] : testing::mwu_family(10, 3, 11)) {
      const auto oracle = testing::brute_force_mwu(a, b);
      const TestResult r = mann_whitney_u(a, b, MwuMethod::Exact);
      REQUIRE(r.statistic == static_cast<double>(oracle.u));
      REQUIRE(std::abs(r.p_value - oracle.p) <= 1e-12);
    }
  }

  TEST_CASE("U of the two orderings sums to n1*n2") {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> a, b;
      for (std::uint64_t i = 0, n = 1 + rng.below(20); i < n; ++i) a.push_back(std::floor(rng.uniform(0, 10)));
      for (std::uint64_t i = 0, n = 1 + rng.below(20); i < n; ++i) b.push_back(std::floor(rng.uniform(0, 10)));
      const TestResult ab = mann_whitney_u(a, b), ba = mann_whitney_u(b, a);
      CHECK(ab.statistic + ba.statistic == doctest::Approx(static_cast<double>(a.size() * b.size())));
      CHECK(ab.p_value == doctest::Approx(ba.p_value));
    }
  }

  TEST_CASE("normal approximation tracks the exact test for balanced samples") {
    for (const auto& [a, b] : testing::mwu_family(12, 2, 21)) {
      // bounds are the largest gaps over every attainable U at these shapes
      const auto smaller = std::min(a.size(), b.size());
      if (smaller < 4) continue;
      const double exact = mann_whitney_u(a, b, MwuMethod::Exact).p_value;
      const double approx = mann_whitney_u(a, b, MwuMethod::NormalApprox).p_value;
      CHECK(std::abs(exact - approx) <= (smaller == 4 ? 0.031 : 0.018));
    }
  }

  TEST_CASE("two-proportion z") {
    const TestResult r = two_proportion_z(30, 100, 10, 100);
    CHECK(r.statistic == doctest::Approx(3.5355339).epsilon(1e-6));
    CHECK(r.p_value == doctest::Approx(4.0695e-4).epsilon(1e-3));
    const TestResult flipped = two_proportion_z(10, 100, 30, 100);
    CHECK(flipped.statistic == -r.statistic);
    CHECK(flipped.p_value == r.p_value);
    CHECK(two_proportion_z(0, 10, 0, 20).p_value == 1.0);
    CHECK(two_proportion_z(5, 10, 10, 20).statistic == 0.0);
    CHECK_THROWS_AS(two_proportion_z(11, 10, 1, 10), ValidationError);
    CHECK_THROWS_AS(two_proportion_z(0, 0, 1, 10), ValidationError);
  }

  TEST_CASE("significance stars") {
    CHECK(stars(0.0005) == "***");
    CHECK(stars(0.001) == "***");
    CHECK(stars(0.005) == "**");
    CHECK(stars(0.05) == "*");
    CHECK(stars(0.051) == "NS");
  }

  TEST_CASE("threshold sweep") {
    const std::vector<AnalyticalSample> s{sample_of("A", {0.1, 0.5, 0.7, 0.9}),
                                          sample_of("B", {0.2, 0.3, 0.6, 0.71})};
    const std::vector<double> ts{0.0, 0.5, 0.7, 1.0};
    const auto rep = threshold_sweep(s, ts);
    REQUIRE(rep.size() == 4);
    CHECK(rep[0].proportions[0].above == 4);
    CHECK(rep[1].proportions[0].above == 2);
    CHECK(rep[2].proportions[0].above == 1);
    CHECK(rep[2].proportions[1].above == 1);
    CHECK(rep[3].proportions[0].above == 0);
    for (std::size_t i = 1; i < rep.size(); ++i) {
      for (std::size_t g = 0; g < 2; ++g) {
        CHECK(rep[i].proportions[g].proportion <= rep[i - 1].proportions[g].proportion);
      }
    }
    REQUIRE(rep[1].pairwise.size() == 1);
    CHECK(rep[1].pairwise[0].group_a == "A");
    const std::vector<double> bad{1.2};
    CHECK_THROWS_AS(threshold_sweep(s, bad), ValidationError);
  }

  TEST_CASE("threshold validation") {
    const std::vector<LabeledScore> l{{0.9, Label::Bot}, {0.6, Label::Bot}, {0.55, Label::Human},
                                      {0.2, Label::Human}};
    const std::vector<double> ts{0.5, 0.7, 0.95};
    const auto m = threshold_validation(l, ts);
    CHECK(m[0].true_pos == 2);
    CHECK(m[0].false_pos == 1);
    CHECK(m[0].precision == doctest::Approx(2.0 / 3));
    CHECK(m[1].recall == 0.5);
    CHECK(m[1].accuracy == 0.75);
    CHECK(m[2].degenerate);
    CHECK(m[2].f1 == 0);
    const std::vector<LabeledScore> bots{{0.9, Label::Bot}};
    CHECK_THROWS_AS(threshold_validation(bots, ts), ValidationError);
  }

  TEST_CASE("account language") {
    std::vector<TweetRecord> t{tweet("1", "u", "en"), tweet("2", "u", "es"), tweet("3", "u", "en")};
    CHECK(account_language(t) == "en");
    t.pop_back();
    CHECK(account_language(t) == "und");
    for (auto& x : t) x.author.declared_language = "es";
    CHECK(account_language(t) == "es");
  }

  TEST_CASE("build_sample counts and filters") {
    const std::vector<TweetRecord> t{tweet("1", "a", "en"), tweet("2", "a", "en"),
                                     tweet("2", "a", "en"), tweet("3", "b", "ja"),
                                     tweet("4", "c", "en"), tweet("5", "c", "es")};
    const std::map<std::string, double> sc{{"a", 0.1}, {"b", 0.9}, {"c", 0.5}};
    const AnalyticalSample all = build_sample("SHIB", t, sc, std::nullopt);
    CHECK(all.raw_tweets == 5);
    CHECK(all.raw_accounts == 3);
    CHECK(all.tweets.size() == 5);
    const AnalyticalSample en = build_sample("SHIB", t, sc, "en");
    CHECK(en.raw_tweets == 5);
    CHECK(en.tweets.size() == 2);
    CHECK(en.accounts.size() == 1);
    CHECK(en.accounts.at("a") == 0.1);
    CHECK(unit_scores(en, AnalysisUnit::Tweet) == std::vector<double>{0.1, 0.1});
    CHECK(unit_scores(en, AnalysisUnit::Account) == std::vector<double>{0.1});
    const std::map<std::string, double> missing{{"a", 0.1}};
    CHECK_THROWS_WITH_AS(build_sample("SHIB", t, missing, std::nullopt), doctest::Contains("user_id b"),
                         ValidationError);
    const auto prof = language_profile(t);
    CHECK(prof.at("en") == doctest::Approx(1.0 / 3));
    CHECK(prof.at("und") == doctest::Approx(1.0 / 3));
    CHECK_THROWS_AS(language_profile({}), ValidationError);
  }

  TEST_CASE("summaries and histograms") {
    const std::vector<double> v{0.0, 0.25, 0.5, 1.0};
    const Summary s = summarize(v);
    CHECK(s.n == 4);
    CHECK(s.median == 0.375);
    CHECK(s.q1 == doctest::Approx(0.1875));
    CHECK(s.mean == 0.4375);
    CHECK(histogram(v, 4) == std::vector<std::int64_t>{1, 1, 1, 1});
    CHECK(histogram(v, 1) == std::vector<std::int64_t>{4});
    CHECK_THROWS_AS(histogram(v, 0), ValidationError);
  }

  TEST_CASE("case study document") {
    const std::vector<AnalyticalSample> s{sample_of("A", {0.1, 0.5, 0.7, 0.9}),
                                          sample_of("B", {0.2, 0.3, 0.6, 0.71})};
    const std::vector<double> ts{0.5, 0.7};
    const json j = case_study_json(s, ts, AnalysisUnit::Tweet, 10);
    CHECK(j["unit"] == "tweet");
    CHECK(j["groups"].size() == 2);
    CHECK(j["mann_whitney"].size() == 1);
    CHECK(j["thresholds"].size() == 2);
    CHECK(j.dump() == case_study_json(s, ts, AnalysisUnit::Tweet, 10).dump());
  }

  TEST_CASE("score series") {
    testing::TempDir dir("series");
    const auto path = dir.path / "series.jsonl";
    {
      SeriesStore store(path);
      record_probe(store, "u", from_civil(2021, 1, 1), 0.2, "esc-x");
      const auto again = record_probe(store, "u", from_civil(2021, 1, 1), 0.2, "esc-x");
      CHECK(again.points.size() == 1);
      CHECK_THROWS_AS(record_probe(store, "u", from_civil(2021, 1, 1), 0.3, "esc-x"), ValidationError);
      CHECK_THROWS_AS(record_probe(store, "u", from_civil(2020, 1, 1), 0.3, "esc-x"), ValidationError);
      CHECK_THROWS_AS(record_probe(store, "u", from_civil(2022, 1, 1), 1.3, "esc-x"), ValidationError);
      record_probe(store, "u", from_civil(2022, 1, 1), 0.4, "esc-y");
    }
    SeriesStore reloaded(path);
    const auto s = reloaded.series("u");
    REQUIRE(s.points.size() == 2);
    CHECK(s.points[1].raw_score == 0.4);
    CHECK(s.points[1].model_version == "esc-y");
    CHECK(reloaded.users() == std::vector<std::string>{"u"});
    CHECK(reloaded.series("nobody").points.empty());
  }
}
