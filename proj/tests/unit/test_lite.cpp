#include "doctest.h"

#include "botlab/error.hpp"
#include "botlab/lite.hpp"
#include "support.hpp"

using namespace botlab;

namespace {

LabeledDataset corpus(std::string name, std::map<Archetype, std::int64_t> counts,
                      std::uint64_t seed) {
  SynthSpec s;
  s.name = std::move(name);
  s.counts = std::move(counts);
  return synthesize_corpus(s, seed);
}

SelectionOptions quick() {
  SelectionOptions o;
  o.params.n_trees = 20;
  o.cv_folds = 3;
  return o;
}

}  // namespace

TEST_SUITE("lite") {
  TEST_CASE("lite model reads only the user object") {
    std::vector<LabeledDataset> ds{testing::small_corpus()};
    ForestParams p;
    p.n_trees = 30;
    const LiteModel m = train_lite(ds, p, 3);
    CHECK(m.registry.version == lite_subset(default_registry()).version);
    CHECK(m.selected_datasets == std::vector<std::string>{"small"});
    for (const auto& r : ds[0].records) {
      AccountPayload stripped = r.payload;
      stripped.timeline.clear();
      stripped.mentions.clear();
      CHECK(score_lite(m, r.payload.user, r.payload.probe_time) ==
            score_lite(m, stripped.user, stripped.probe_time));
    }
    const auto spam = corpus("s", {{Archetype::Spammer, 20}}, 77);
    double mean = 0;
    for (const auto& r : spam.records) mean += score_lite(m, r.payload.user, r.payload.probe_time);
    CHECK(mean / 20 > 0.5);
  }

  TEST_CASE("single candidate wins by default") {
    std::vector<LabeledDataset> cands{corpus("only", {{Archetype::Human, 30}, {Archetype::Spammer, 30}}, 1)};
    const auto holdout = corpus("h", {{Archetype::Human, 20}, {Archetype::Spammer, 20}}, 2);
    const LiteModel m = select_training_sets(cands, holdout, testing::small_model(), {}, quick(), 1);
    CHECK(m.selected_datasets == std::vector<std::string>{"only"});
    REQUIRE(m.selection_report.size() == 1);
    CHECK(m.selection_report[0].eligible);
  }

  TEST_CASE("a label-inverted candidate is never selected") {
    const auto setup = testing::poison_setup();
    const LiteModel m =
        select_training_sets(setup.candidates, setup.holdout, setup.reference, {}, quick(), 42);
    REQUIRE(m.selection_report.size() == 7);
    double worst_clean = 1, best_poisoned = 0;
    for (const auto& row : m.selection_report) {
      REQUIRE(row.eligible);
      if (row.mask & 4u) best_poisoned = std::max(best_poisoned, row.metrics.holdout_auc);
      else worst_clean = std::min(worst_clean, row.metrics.holdout_auc);
    }
    CHECK(best_poisoned < worst_clean);
    for (const auto& name : m.selected_datasets) CHECK(name != "poisoned");

    SelectionOptions threaded = quick();
    threaded.n_threads = 3;
    const LiteModel again =
        select_training_sets(setup.candidates, setup.holdout, setup.reference, {}, threaded, 42);
    CHECK(selection_csv(again) == selection_csv(m));
    CHECK(again.version == m.version);

    SUBCASE("uniformly rescaled weights pick the same subset") {
      const auto base = pick_winner(m.selection_report, {});
      CHECK(pick_winner(m.selection_report, {3, 3, 3}) == base);
      CHECK(pick_winner(m.selection_report, {0.25, 0.25, 0.25}) == base);
    }
    SUBCASE("selection table and document") {
      const std::string csv = selection_csv(m);
      CHECK(csv.rfind("mask,datasets,cv_accuracy,holdout_auc,consistency,weighted,eligible\n", 0) == 0);
      CHECK(csv.find("spam;fake") != std::string::npos);
      const LiteModel back = lite_from_json(json::parse(to_json(m).dump()));
      CHECK(back.version == m.version);
      CHECK(back.forest == m.forest);
      CHECK(selection_csv(back) == csv);
      json tampered = to_json(m);
      tampered["selected_datasets"] = json::array({"poisoned"});
      CHECK_THROWS_AS(lite_from_json(tampered), VersionMismatch);
    }
  }

  TEST_CASE("tie-breaks prefer fewer datasets then names") {
    std::vector<SubsetResult> table(3);
    table[0] = {1, {"b"}, {0.9, 0.9, 0.5}, 0, true, ""};
    table[1] = {2, {"a"}, {0.9, 0.9, 0.5}, 0, true, ""};
    table[2] = {3, {"a", "b"}, {0.9, 0.9, 0.5}, 0, true, ""};
    CHECK(pick_winner(table, {}) == 1);
    table[1].eligible = false;
    CHECK(pick_winner(table, {}) == 0);
    for (auto& r : table) r.eligible = false;
    CHECK_THROWS_AS(pick_winner(table, {}), ValidationError);
  }

  TEST_CASE("selection preconditions") {
    const auto holdout = corpus("h", {{Archetype::Human, 10}, {Archetype::Spammer, 10}}, 2);
    std::vector<LabeledDataset> many;
    for (int i = 0; i < 13; ++i) many.push_back(corpus("c" + std::to_string(i), {{Archetype::Human, 2}}, i));
    CHECK_THROWS_AS(select_training_sets(many, holdout, testing::small_model(), {}, quick(), 1),
                    ValidationError);
    std::vector<LabeledDataset> overlap{holdout};
    overlap[0].name = "copy";
    CHECK_THROWS_AS(select_training_sets(overlap, holdout, testing::small_model(), {}, quick(), 1),
                    ValidationError);
    std::vector<LabeledDataset> fine{corpus("x", {{Archetype::Human, 20}, {Archetype::Spammer, 20}}, 3)};
    const auto humans_only = corpus("ho", {{Archetype::Human, 10}}, 4);
    CHECK_THROWS_AS(select_training_sets(fine, humans_only, testing::small_model(), {}, quick(), 1),
                    ValidationError);
  }

  TEST_CASE("single-label subsets are ineligible") {
    std::vector<LabeledDataset> cands{corpus("humans", {{Archetype::Human, 20}}, 1),
                                      corpus("bots", {{Archetype::Spammer, 20}}, 2)};
    const auto holdout = corpus("h", {{Archetype::Human, 10}, {Archetype::Spammer, 10}}, 3);
    const LiteModel m = select_training_sets(cands, holdout, testing::small_model(), {}, quick(), 1);
    CHECK_FALSE(m.selection_report[0].eligible);
    CHECK_FALSE(m.selection_report[1].eligible);
    CHECK(m.selection_report[2].eligible);
    CHECK(m.selected_datasets.size() == 2);
  }
}
