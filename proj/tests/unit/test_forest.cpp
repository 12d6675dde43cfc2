#include "doctest.h"

#include "botlab/error.hpp"
#include "botlab/forest.hpp"
#include "botlab/rng.hpp"
#include "support.hpp"

using namespace botlab;

namespace {

// d-dimensional points; bots shifted by `gap` along every axis.
std::vector<LabeledVector> clusters(int per_class, double gap, std::uint64_t seed, std::size_t d = 4) {
  Rng rng(seed);
  std::vector<LabeledVector> out;
  for (int i = 0; i < 2 * per_class; ++i) {
    const bool bot = i % 2;
    FeatureVector x;
    x.registry_version = "toy";
    for (std::size_t k = 0; k < d; ++k) x.values.push_back(rng.normal() + (bot ? gap : 0.0));
    out.push_back({x, bot ? Label::Bot : Label::Human});
  }
  return out;
}

double brute_auc(const std::vector<double>& pos, const std::vector<double>& neg) {
  double s = 0;
  for (double p : pos) {
    for (double n : neg) s += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
  }
  return s / static_cast<double>(pos.size() * neg.size());
}

DecisionTree stump(bool bot) {
  DecisionTree t;
  t.nodes.push_back({-1, 0.0, -1, -1, bot ? 0.0 : 3.0, bot ? 3.0 : 0.0});
  return t;
}

ForestModel hand_model(std::initializer_list<bool> votes) {
  ForestModel m;
  for (bool v : votes) m.trees.push_back(stump(v));
  m.params.n_trees = static_cast<int>(m.trees.size());
  m.registry_version = "toy";
  m.n_features = 1;
  return m;
}

FeatureVector one(double v) { return {{v}, "toy"}; }

}  // namespace

TEST_SUITE("forest") {
  TEST_CASE("separable clusters reach training AUC 1") {
    const auto data = clusters(20, 10.0, 1);
    const ForestModel m = train_forest(data, {}, 3);
    std::vector<double> pos, neg;
    for (const auto& e : data) (e.y == Label::Bot ? pos : neg).push_back(score(m, e.x));
    CHECK(auc(pos, neg) == 1.0);
  }

  TEST_CASE("training is deterministic and thread-count independent") {
    const auto data = clusters(40, 1.0, 2);
    ForestParams p;
    p.n_trees = 25;
    const ForestModel a = train_forest(data, p, 11);
    const ForestModel b = train_forest(data, p, 11);
    p.n_threads = 4;
    const ForestModel c = train_forest(data, p, 11);
    CHECK(a == b);
    CHECK(a == c);
    CHECK(to_json(a).dump() == to_json(c).dump());
    const ForestModel d = train_forest(data, {}, 12);
    CHECK_FALSE(a == d);
  }

  TEST_CASE("score is the fraction of trees voting bot") {
    CHECK(score(hand_model({true, true, true}), one(0)) == 1.0);
    CHECK(score(hand_model({true, false}), one(0)) == 0.5);
    CHECK(score(hand_model({true, true, false}), one(0)) == doctest::Approx(2.0 / 3.0));
    CHECK(score(hand_model({true, true, false, true}), one(0)) >= score(hand_model({true, true, false}), one(0)));
  }

  TEST_CASE("split semantics: below threshold goes left, ties go right") {
    DecisionTree t;
    t.nodes = {{0, 0.5, 1, 2, 0, 0}, {-1, 0, -1, -1, 2, 0}, {-1, 0, -1, -1, 0, 2}};
    const std::vector<double> lo{0.49}, at{0.5}, hi{0.51};
    CHECK_FALSE(t.votes_bot(lo));
    CHECK(t.votes_bot(at));
    CHECK(t.votes_bot(hi));
    DecisionTree tie;
    tie.nodes = {{-1, 0, -1, -1, 1, 1}};
    CHECK_FALSE(tie.votes_bot(lo));
  }

  TEST_CASE("auc examples") {
    CHECK(auc(std::vector<double>{0.9, 0.8}, std::vector<double>{0.2, 0.1}) == 1.0);
    CHECK(auc(std::vector<double>{0.3, 0.3}, std::vector<double>{0.3, 0.3, 0.3}) == 0.5);
    CHECK(auc(std::vector<double>{0.9, 0.4}, std::vector<double>{0.8, 0.1}) == 0.75);
    CHECK_THROWS_AS(auc(std::vector<double>{}, std::vector<double>{0.1}), ValidationError);
  }

  TEST_CASE("auc properties against brute force") {
    Rng rng(8);
    for (int trial = 0; trial < 300; ++trial) {
      const auto np = static_cast<std::size_t>(rng.between(1, 10));
      const auto nn = static_cast<std::size_t>(rng.between(1, 10));
      std::vector<double> pos, neg;
      // coarse grid so that ties occur
      for (std::size_t i = 0; i < np; ++i) pos.push_back(static_cast<double>(rng.below(6)) / 5.0);
      for (std::size_t i = 0; i < nn; ++i) neg.push_back(static_cast<double>(rng.below(6)) / 5.0);
      CHECK(auc(pos, neg) == doctest::Approx(brute_auc(pos, neg)).epsilon(1e-15));
      std::vector<double> p2, n2;
      for (std::size_t i = 0; i < np; ++i) p2.push_back(rng.uniform());
      for (std::size_t i = 0; i < nn; ++i) n2.push_back(rng.uniform());
      CHECK(auc(p2, n2) + auc(n2, p2) == doctest::Approx(1.0).epsilon(1e-15));
    }
  }

  TEST_CASE("cross-validation") {
    SUBCASE("separable data") {
      const EvalReport r = cross_validate(clusters(25, 10.0, 4), {}, 5, 1);
      CHECK(r.n_folds == 5);
      CHECK(r.per_fold_auc.size() == 5);
      CHECK(r.auc == 1.0);
      CHECK(r.accuracy() == 1.0);
      CHECK(r.out_of_fold_scores.size() == 50);
    }
    SUBCASE("shuffled labels are near chance") {
      auto data = clusters(100, 0.0, 5);
      Rng rng(6);
      for (auto& e : data) e.y = rng.bernoulli(0.5) ? Label::Bot : Label::Human;
      ForestParams p;
      p.n_trees = 50;
      const EvalReport r = cross_validate(data, p, 5, 1);
      CHECK(r.auc > 0.4);
      CHECK(r.auc < 0.6);
    }
    SUBCASE("folds are stratified") {
      const auto data = clusters(23, 1.0, 7);
      const auto folds = stratified_folds(data, 5, 3);
      std::vector<int> bots(5, 0), humans(5, 0);
      for (std::size_t i = 0; i < data.size(); ++i) (data[i].y == Label::Bot ? bots : humans)[static_cast<std::size_t>(folds[i])]++;
      for (int f = 0; f < 5; ++f) {
        CHECK(bots[static_cast<std::size_t>(f)] >= 4);
        CHECK(humans[static_cast<std::size_t>(f)] >= 4);
      }
    }
    SUBCASE("a fold without both labels is rejected by number") {
      auto data = clusters(10, 1.0, 8);
      int bots = 0;
      for (auto& e : data) {
        if (e.y == Label::Bot && ++bots > 3) e.y = Label::Human;
      }
      CHECK_THROWS_WITH_AS(cross_validate(data, {}, 5, 1), doctest::Contains("fold"), ValidationError);
    }
  }

  TEST_CASE("training preconditions") {
    auto data = clusters(10, 1.0, 9);
    for (auto& e : data) e.y = Label::Human;
    CHECK_THROWS_AS(train_forest(data, {}, 1), ValidationError);
    data = clusters(10, 1.0, 9);
    data[3].x.registry_version = "other";
    CHECK_THROWS_AS(train_forest(data, {}, 1), VersionMismatch);
    ForestParams bad;
    bad.n_trees = 0;
    CHECK_THROWS_AS(train_forest(clusters(10, 1.0, 9), bad, 1), ValidationError);
  }

  TEST_CASE("scoring checks registry") {
    const ForestModel m = train_forest(clusters(10, 3.0, 10), {}, 1);
    FeatureVector x{{0, 0, 0, 0}, "other"};
    CHECK_THROWS_AS(score(m, x), VersionMismatch);
    x = {{0, 0}, "toy"};
    CHECK_THROWS_AS(score(m, x), VersionMismatch);
  }

  TEST_CASE("serialization round trips exactly") {
    const ForestModel m = train_forest(clusters(30, 0.7, 12), {}, 5);
    const ForestModel back = forest_from_json(json::parse(to_json(m).dump()));
    CHECK(back == m);
    json broken = to_json(m);
    broken["trees"][0][0][0] = 999;
    CHECK_THROWS_AS(forest_from_json(broken), ValidationError);
  }
}
