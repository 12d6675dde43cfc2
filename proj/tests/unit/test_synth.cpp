#include "doctest.h"

#include <fstream>

#include "botlab/error.hpp"
#include "botlab/features.hpp"
#include "botlab/forest.hpp"
#include "botlab/synth.hpp"
#include "support.hpp"

using namespace botlab;

namespace {

std::string dump_dataset(const LabeledDataset& ds) {
  std::string out;
  for (const auto& r : ds.records) {
    out += to_json(r.payload).dump() + "," + std::string(to_string(r.label)) + "\n";
  }
  return out;
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("same seed gives byte-identical corpora") {
    SynthSpec spec;
    spec.counts = {{Archetype::Human, 50}, {Archetype::Spammer, 50}};
    CHECK(dump_dataset(synthesize_corpus(spec, 42)) == dump_dataset(synthesize_corpus(spec, 42)));
    CHECK(dump_dataset(synthesize_corpus(spec, 42)) != dump_dataset(synthesize_corpus(spec, 43)));
  }

  TEST_CASE("zero counts give an empty dataset, negative counts are rejected") {
    SynthSpec spec;
    for (Archetype a : kAllArchetypes) spec.counts[a] = 0;
    const LabeledDataset ds = synthesize_corpus(spec, 1);
    CHECK(ds.records.empty());
    spec.counts[Archetype::Spammer] = -1;
    CHECK_THROWS_AS(synthesize_corpus(spec, 1), ValidationError);
  }

  TEST_CASE("every synthetic payload is valid and labeled by archetype") {
    for (const auto& r : testing::small_corpus().records) {
      CHECK_NOTHROW(validate(r.payload));
      CHECK((r.label == Label::Bot) == r.bot_class.has_value());
    }
  }

  TEST_CASE("archetypes differ where they should") {
    SynthSpec spec;
    spec.counts = {{Archetype::Human, 40}, {Archetype::Spammer, 40}, {Archetype::FakeFollower, 40}};
    const LabeledDataset ds = synthesize_corpus(spec, 3);
    const auto& reg = default_registry();
    const auto tpd = reg.index_of("tweets_per_day");
    const auto dup = reg.index_of("duplicate_text_fraction");
    const auto dp = reg.index_of("default_profile");
    std::map<std::string, std::vector<double>> by;
    double human_tpd = 0, spam_tpd = 0, human_dup = 0, spam_dup = 0, fake_tl = 0, fake_dp = 0;
    for (const auto& r : ds.records) {
      const FeatureVector v = extract_full(r.payload, reg);
      if (!r.bot_class) {
        human_tpd += v.values[tpd];
        human_dup += v.values[dup];
      } else if (*r.bot_class == BotClass::Spammer) {
        spam_tpd += v.values[tpd];
        spam_dup += v.values[dup];
      } else {
        fake_tl += static_cast<double>(r.payload.timeline.size());
        fake_dp += v.values[dp];
      }
    }
    CHECK(spam_tpd > 5 * human_tpd);
    CHECK(spam_dup > 5 * human_dup);
    CHECK(fake_tl / 40 <= 3.0);
    CHECK(fake_dp / 40 > 0.6);
  }

  TEST_CASE("100 humans + 100 spammers: held-out AUC >= 0.95") {
    SynthSpec spec;
    spec.counts = {{Archetype::Human, 100}, {Archetype::Spammer, 100}};
    spec.name = "train";
    const LabeledDataset train = synthesize_corpus(spec, 42);
    spec.name = "test";
    const LabeledDataset test = synthesize_corpus(spec, 4242);
    std::vector<LabeledVector> data;
    for (const auto& r : train.records) data.push_back({extract_full(r.payload, default_registry()), r.label});
    const ForestModel m = train_forest(data, {}, 42);
    std::vector<double> pos, neg;
    for (const auto& r : test.records) {
      (r.label == Label::Bot ? pos : neg).push_back(score(m, extract_full(r.payload, default_registry())));
    }
    CHECK(auc(pos, neg) >= 0.95);
  }

  TEST_CASE("shipped config equals the built-in parameters") {
    const SynthConfig shipped = load_synth_config(std::filesystem::path(BOTLAB_SOURCE_DIR) / "config/synth_v1.json");
    CHECK(shipped == default_synth_config());
    CHECK(synth_config_from_json(to_json(default_synth_config())) == default_synth_config());
  }

  TEST_CASE("config errors") {
    json j = to_json(default_synth_config());
    j["archetypes"]["human"].erase("p_english");
    CHECK_THROWS_WITH_AS(synth_config_from_json(j), doctest::Contains("p_english"), ValidationError);
    j = to_json(default_synth_config());
    j["archetypes"]["cyborg"] = j["archetypes"]["human"];
    CHECK_THROWS_AS(synth_config_from_json(j), ValidationError);
  }

  TEST_CASE("scaled case study keeps group structure") {
    const CaseStudySpec spec = CaseStudySpec::reference_counts().scaled(20);
    const CaseStudyFixture fx = synthesize_case_study(spec, 1, true);
    std::size_t expected = 0;
    for (const auto& g : spec.groups) expected += static_cast<std::size_t>(g.raw_tweets);
    CHECK(fx.tweets.size() == expected);
    for (const auto& p : fx.author_payloads) {
      CHECK_NOTHROW(validate(p));
      CHECK(p.timeline.size() <= 30);
    }
    CHECK(fx.tweets.front().cashtags == std::vector<std::string>{"SHIB"});
  }
}
