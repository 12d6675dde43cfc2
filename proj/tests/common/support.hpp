#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "botlab/ensemble.hpp"
#include "botlab/lite.hpp"
#include "botlab/synth.hpp"

namespace testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(BOTLAB_FIXTURE_DIR) / name;
}

inline botlab::json read_fixture(const std::string& name) {
  std::ifstream in(fixture(name));
  return botlab::json::parse(in);
}

inline botlab::AccountPayload micro_payload() {
  return botlab::payload_from_json(read_fixture("micro_payload.json"));
}

/// (label, raw score) rows of fixtures/cap_fixture.csv.
inline std::vector<botlab::LabeledScore> cap_fixture() {
  std::ifstream in(fixture("cap_fixture.csv"));
  std::vector<botlab::LabeledScore> out;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    out.push_back({std::stod(line.substr(comma + 1)), botlab::parse_label(line.substr(0, comma))});
  }
  return out;
}

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("botlab-test-" + tag + "-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

/// Four bot archetypes plus humans, shared by several suites.
inline const botlab::LabeledDataset& small_corpus() {
  static const botlab::LabeledDataset ds = [] {
    botlab::SynthSpec spec;
    spec.name = "small";
    spec.counts = {{botlab::Archetype::Human, 60},
                   {botlab::Archetype::Spammer, 20},
                   {botlab::Archetype::FakeFollower, 20},
                   {botlab::Archetype::SelfDeclared, 20},
                   {botlab::Archetype::Astroturf, 20}};
    return botlab::synthesize_corpus(spec, 5);
  }();
  return ds;
}

inline const botlab::EscModel& small_model() {
  static const botlab::EscModel model = [] {
    botlab::ForestParams p;
    p.n_trees = 30;
    std::vector<botlab::LabeledDataset> ds{small_corpus()};
    return botlab::train_esc(ds, botlab::default_registry(), p, 9);
  }();
  return model;
}

struct PoisonSetup {
  std::vector<botlab::LabeledDataset> candidates;  // spam, fake, poisoned
  botlab::LabeledDataset holdout;
  botlab::EscModel reference;
};

/// Two clean candidates and one whose labels are all inverted; the holdout and
/// the reference training set are clean mixtures of the same archetypes.
inline PoisonSetup poison_setup() {
  using botlab::Archetype;
  auto make = [](std::string name, std::map<Archetype, std::int64_t> counts, std::uint64_t seed) {
    botlab::SynthSpec s;
    s.name = std::move(name);
    s.counts = std::move(counts);
    s.gray_fraction = 0.1;
    return botlab::synthesize_corpus(s, seed);
  };
  const std::map<Archetype, std::int64_t> mixed{
      {Archetype::Human, 60}, {Archetype::Spammer, 30}, {Archetype::FakeFollower, 30}};
  PoisonSetup out;
  out.candidates.push_back(make("spam", {{Archetype::Human, 60}, {Archetype::Spammer, 60}}, 1));
  out.candidates.push_back(make("fake", {{Archetype::Human, 60}, {Archetype::FakeFollower, 60}}, 2));
  auto poisoned = make("poisoned", mixed, 3);
  for (auto& r : poisoned.records) {
    r.label = r.label == botlab::Label::Bot ? botlab::Label::Human : botlab::Label::Bot;
  }
  out.candidates.push_back(std::move(poisoned));
  out.holdout = make("holdout", mixed, 4);
  std::vector<botlab::LabeledDataset> ref{make("reference", mixed, 5)};
  out.reference = botlab::train_esc(ref, botlab::default_registry(), {}, 42);
  return out;
}

}  // namespace testing
