#include "botlab/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "botlab/error.hpp"
#include "botlab/hash.hpp"
#include "botlab/rng.hpp"

namespace botlab {
namespace {

struct ExtractedCorpus {
  std::vector<FeatureVector> humans;
  std::map<BotClass, std::vector<FeatureVector>> bots;
};

ExtractedCorpus extract_corpus(std::span<const LabeledDataset> datasets,
                               const FeatureRegistry& registry) {
  ExtractedCorpus out;
  for (const auto& ds : datasets) {
    for (const auto& r : ds.records) {
      FeatureVector v = extract_full(r.payload, registry);
      if (r.label == Label::Human) {
        out.humans.push_back(std::move(v));
      } else {
        out.bots[ds.class_of(r)].push_back(std::move(v));
      }
    }
  }
  return out;
}

std::vector<LabeledVector> one_vs_humans(const std::vector<FeatureVector>& bots,
                                         const std::vector<FeatureVector>& humans,
                                         const std::vector<std::size_t>* projection,
                                         const std::string& version) {
  std::vector<LabeledVector> data;
  data.reserve(bots.size() + humans.size());
  auto add = [&](const FeatureVector& v, Label y) {
    data.push_back({projection ? project(v, *projection, version) : v, y});
  };
  for (const auto& v : bots) add(v, Label::Bot);
  for (const auto& v : humans) add(v, Label::Human);
  return data;
}

json score_family(double overall, const std::map<BotClass, double>& subs,
                  double scale) {
  json j = {{"overall", scale * overall}};
  for (const auto& [cls, s] : subs) j[std::string(to_string(cls))] = scale * s;
  return j;
}

void read_family(const json& j, double& overall, std::map<BotClass, double>& subs) {
  overall = j.at("overall").get<double>();
  for (const auto& [key, value] : j.items()) {
    if (key == "overall") continue;
    subs[parse_bot_class(key)] = value.get<double>();
  }
}

std::size_t grid_index(const CalibrationTable& t, double s) {
  // largest i with thresholds[i] <= s
  auto it = std::upper_bound(t.thresholds.begin(), t.thresholds.end(), s);
  return static_cast<std::size_t>(it - t.thresholds.begin()) - 1;
}

}  // namespace

EscModel train_esc(std::span<const LabeledDataset> datasets,
                   const FeatureRegistry& registry, const ForestParams& params,
                   std::uint64_t seed) {
  validate_registry(registry);
  const ExtractedCorpus corpus = extract_corpus(datasets, registry);
  if (corpus.bots.empty()) throw ValidationError("no bot accounts to train on");
  if (corpus.humans.size() < 2) throw ValidationError("at least 2 human accounts required");
  for (const auto& [cls, vs] : corpus.bots) {
    if (vs.size() < kMinClassExamples) {
      throw ValidationError("bot class " + std::string(to_string(cls)) + " has only " +
                            std::to_string(vs.size()) + " examples; at least " +
                            std::to_string(kMinClassExamples) + " required");
    }
  }

  EscModel model;
  model.registry = registry;
  model.universal_registry = language_independent(registry);
  const auto projection = projection_indices(registry, model.universal_registry);
  for (BotClass cls : kAllBotClasses) {
    auto it = corpus.bots.find(cls);
    if (it == corpus.bots.end()) continue;
    const auto stream = 2 * static_cast<std::uint64_t>(cls);
    model.class_list.push_back(cls);
    model.specialized[cls] = train_forest(
        one_vs_humans(it->second, corpus.humans, nullptr, registry.version), params,
        derive_seed(seed, stream));
    model.universal_specialized[cls] = train_forest(
        one_vs_humans(it->second, corpus.humans, &projection,
                      model.universal_registry.version),
        params, derive_seed(seed, stream + 1));
  }
  model.version = content_version("esc", to_json(model).dump());
  return model;
}

ForestModel train_pooled_forest(std::span<const LabeledDataset> datasets,
                                const FeatureRegistry& registry,
                                const ForestParams& params, std::uint64_t seed) {
  const ExtractedCorpus corpus = extract_corpus(datasets, registry);
  std::vector<FeatureVector> bots;
  for (const auto& [_, vs] : corpus.bots) bots.insert(bots.end(), vs.begin(), vs.end());
  return train_forest(one_vs_humans(bots, corpus.humans, nullptr, registry.version),
                      params, seed);
}

ScoreReport score_account(const EscModel& model, const AccountPayload& payload) {
  const FeatureVector full = extract_full(payload, model.registry);
  const auto projection = projection_indices(model.registry, model.universal_registry);
  const FeatureVector universal =
      project(full, projection, model.universal_registry.version);

  ScoreReport r;
  r.user_id = payload.user.user_id;
  r.screen_name = payload.user.screen_name;
  r.probe_time = payload.probe_time;
  r.model_version = model.version;
  r.low_data = payload.timeline.empty() && payload.mentions.empty();
  for (BotClass cls : model.class_list) {
    const double e = score(model.specialized.at(cls), full);
    const double u = score(model.universal_specialized.at(cls), universal);
    r.sub_scores_english[cls] = e;
    r.sub_scores_universal[cls] = u;
    r.raw_overall = std::max(r.raw_overall, e);
    r.raw_universal = std::max(r.raw_universal, u);
  }
  r.display_overall = to_display(r.raw_overall);
  r.display_universal = to_display(r.raw_universal);
  check_invariants(r);
  return r;
}

void check_invariants(const ScoreReport& r) {
  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in_unit(r.raw_overall) || !in_unit(r.raw_universal)) {
    throw std::logic_error("raw score outside [0,1] for " + r.user_id);
  }
  if (r.display_overall != to_display(r.raw_overall) ||
      r.display_universal != to_display(r.raw_universal)) {
    throw std::logic_error("display score is not 5 x raw for " + r.user_id);
  }
  auto max_of = [&](const std::map<BotClass, double>& subs) {
    double m = 0.0;
    for (const auto& [_, s] : subs) {
      if (!in_unit(s)) throw std::logic_error("sub-score outside [0,1] for " + r.user_id);
      m = std::max(m, s);
    }
    return m;
  };
  if (max_of(r.sub_scores_english) != r.raw_overall ||
      max_of(r.sub_scores_universal) != r.raw_universal) {
    throw std::logic_error("raw score is not the max of sub-scores for " + r.user_id);
  }
  for (const auto& cap : {r.cap_english, r.cap_universal}) {
    if (cap && !in_unit(*cap)) throw std::logic_error("cap outside [0,1] for " + r.user_id);
  }
}

CalibrationTable calibrate(std::span<const LabeledScore> labeled_scores, double prior,
                           std::string model_version) {
  if (!(prior > 0.0 && prior < 1.0)) {
    throw ValidationError("prior must lie strictly between 0 and 1");
  }
  std::vector<double> bots, humans;
  for (const auto& ls : labeled_scores) {
    if (!(ls.score >= 0.0 && ls.score <= 1.0)) {
      throw ValidationError("calibration score outside [0,1]");
    }
    (ls.label == Label::Bot ? bots : humans).push_back(ls.score);
  }
  if (bots.empty() || humans.empty()) {
    throw ValidationError("calibration needs both bot and human scores");
  }
  std::sort(bots.begin(), bots.end());
  std::sort(humans.begin(), humans.end());
  auto survival = [](const std::vector<double>& sorted, double t) {
    const auto below = std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
    return static_cast<double>(sorted.size() - static_cast<std::size_t>(below)) /
           static_cast<double>(sorted.size());
  };

  CalibrationTable table;
  table.prior = prior;
  table.model_version = std::move(model_version);
  for (int i = 0; i <= kCalibrationGridSteps; ++i) {
    const double t = i / static_cast<double>(kCalibrationGridSteps);
    table.thresholds.push_back(t);
    table.bot_survival.push_back(survival(bots, t));
    table.human_survival.push_back(survival(humans, t));
  }
  check_invariants(table);
  return table;
}

CalibrationTable calibrate(const EscModel& model,
                           std::span<const LabeledScore> labeled_scores, double prior) {
  return calibrate(labeled_scores, prior, model.version);
}

void check_invariants(const CalibrationTable& t) {
  const std::size_t n = t.thresholds.size();
  if (n == 0 || t.bot_survival.size() != n || t.human_survival.size() != n) {
    throw std::logic_error("calibration table arrays are inconsistent");
  }
  if (t.thresholds.front() != 0.0) throw std::logic_error("grid must start at 0");
  for (const auto* s : {&t.bot_survival, &t.human_survival}) {
    if ((*s)[0] != 1.0) throw std::logic_error("survival at 0 must be 1");
    for (std::size_t i = 0; i < n; ++i) {
      if (!((*s)[i] >= 0.0 && (*s)[i] <= 1.0)) {
        throw std::logic_error("survival value outside [0,1]");
      }
      if (i > 0 && (*s)[i] > (*s)[i - 1]) {
        throw std::logic_error("survival function increases");
      }
      if (i > 0 && !(t.thresholds[i] > t.thresholds[i - 1])) {
        throw std::logic_error("grid must be ascending");
      }
    }
  }
  if (!(t.prior > 0.0 && t.prior < 1.0)) throw std::logic_error("prior outside (0,1)");
}

double cap_lookup(const CalibrationTable& table, double raw_score) {
  if (!(raw_score >= 0.0 && raw_score <= 1.0)) {
    throw ValidationError("raw score " + std::to_string(raw_score) + " outside [0,1]");
  }
  const double pi = table.prior;
  for (std::size_t i = grid_index(table, raw_score) + 1; i-- > 0;) {
    const double num = pi * table.bot_survival[i];
    const double den = num + (1.0 - pi) * table.human_survival[i];
    if (den > 0.0) return num / den;
  }
  return pi;  // unreachable: survival at 0 is 1
}

namespace {

std::string stamp_version(Calibration c) {
  c.version.clear();
  return content_version("cal", to_json(c).dump());
}

}  // namespace

Calibration calibrate_model(const EscModel& model,
                            std::span<const LabeledDataset> datasets, double prior) {
  std::vector<LabeledScore> english, universal;
  for (const auto& ds : datasets) {
    for (const auto& r : ds.records) {
      const ScoreReport rep = score_account(model, r.payload);
      english.push_back({rep.raw_overall, r.label});
      universal.push_back({rep.raw_universal, r.label});
    }
  }
  Calibration c;
  c.model_version = model.version;
  c.english = calibrate(model, english, prior);
  c.universal = calibrate(model, universal, prior);
  c.version = stamp_version(c);
  return c;
}

Calibration with_prior(Calibration calibration, double prior) {
  if (!(prior > 0.0 && prior < 1.0)) {
    throw ValidationError("prior must lie strictly between 0 and 1");
  }
  calibration.english.prior = prior;
  calibration.universal.prior = prior;
  calibration.version = stamp_version(calibration);
  return calibration;
}

void apply_calibration(const Calibration& calibration, ScoreReport& report) {
  if (calibration.model_version != report.model_version) {
    throw VersionMismatch("calibration " + calibration.version + " was built for model " +
                          calibration.model_version + ", not " + report.model_version);
  }
  report.cap_english = cap_lookup(calibration.english, report.raw_overall);
  report.cap_universal = cap_lookup(calibration.universal, report.raw_universal);
  report.calibration_version = calibration.version;
}

json to_json(const EscModel& model) {
  json spec = json::object(), uni = json::object(), classes = json::array();
  for (BotClass cls : model.class_list) {
    const std::string name(to_string(cls));
    classes.push_back(name);
    spec[name] = to_json(model.specialized.at(cls));
    uni[name] = to_json(model.universal_specialized.at(cls));
  }
  json j = {{"format", kEscFormat},
            {"registry_version", model.registry.version},
            {"class_list", std::move(classes)},
            {"specialized", std::move(spec)},
            {"universal_specialized", std::move(uni)}};
  if (!model.version.empty()) j["version"] = model.version;
  return j;
}

EscModel esc_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kEscFormat) {
      throw VersionMismatch("unsupported model format " + j.at("format").dump());
    }
    EscModel m;
    const std::string rv = j.at("registry_version").get<std::string>();
    if (rv != default_registry().version) {
      throw VersionMismatch("model registry " + rv + " does not match extractor registry " +
                            default_registry().version);
    }
    m.registry = default_registry();
    m.universal_registry = language_independent(m.registry);
    for (const auto& c : j.at("class_list")) {
      const BotClass cls = parse_bot_class(c.get<std::string>());
      m.class_list.push_back(cls);
      m.specialized[cls] = forest_from_json(j.at("specialized").at(c.get<std::string>()));
      m.universal_specialized[cls] =
          forest_from_json(j.at("universal_specialized").at(c.get<std::string>()));
      if (m.specialized[cls].registry_version != m.registry.version ||
          m.universal_specialized[cls].registry_version != m.universal_registry.version) {
        throw VersionMismatch("forest registry does not match model registry");
      }
    }
    json unversioned = j;
    unversioned.erase("version");
    m.version = content_version("esc", unversioned.dump());
    if (j.contains("version") && j.at("version").get<std::string>() != m.version) {
      throw VersionMismatch("model version " + j.at("version").get<std::string>() +
                            " does not match its content (" + m.version + ")");
    }
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed model document: ") + e.what());
  }
}

json to_json(const CalibrationTable& t) {
  return {{"thresholds", t.thresholds},
          {"bot_survival", t.bot_survival},
          {"human_survival", t.human_survival},
          {"prior", t.prior},
          {"model_version", t.model_version}};
}

CalibrationTable calibration_table_from_json(const json& j) {
  try {
    CalibrationTable t;
    t.thresholds = j.at("thresholds").get<std::vector<double>>();
    t.bot_survival = j.at("bot_survival").get<std::vector<double>>();
    t.human_survival = j.at("human_survival").get<std::vector<double>>();
    t.prior = j.at("prior").get<double>();
    t.model_version = j.value("model_version", std::string{});
    check_invariants(t);
    return t;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed calibration table: ") + e.what());
  } catch (const std::logic_error& e) {
    throw ValidationError(std::string("invalid calibration table: ") + e.what());
  }
}

json to_json(const Calibration& c) {
  json j = {{"format", kCalibrationFormat},
            {"model_version", c.model_version},
            {"english", to_json(c.english)},
            {"universal", to_json(c.universal)}};
  if (!c.version.empty()) j["version"] = c.version;
  return j;
}

Calibration calibration_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kCalibrationFormat) {
      throw VersionMismatch("unsupported calibration format " + j.at("format").dump());
    }
    Calibration c;
    c.model_version = j.at("model_version").get<std::string>();
    c.english = calibration_table_from_json(j.at("english"));
    c.universal = calibration_table_from_json(j.at("universal"));
    c.version = j.at("version").get<std::string>();
    if (c.version != stamp_version(c)) {
      throw VersionMismatch("calibration version " + c.version + " does not match its content");
    }
    return c;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed calibration document: ") + e.what());
  }
}

json to_json(const ScoreReport& r) {
  json cap = {{"english", r.cap_english ? json(*r.cap_english) : json(nullptr)},
              {"universal", r.cap_universal ? json(*r.cap_universal) : json(nullptr)}};
  json versions = {{"model", r.model_version}};
  if (r.calibration_version) versions["calibration"] = *r.calibration_version;
  return {{"user",
           {{"user_id", r.user_id},
            {"screen_name", r.screen_name},
            {"probe_time", format_timestamp(r.probe_time)}}},
          {"raw_scores",
           {{"english", score_family(r.raw_overall, r.sub_scores_english, 1.0)},
            {"universal", score_family(r.raw_universal, r.sub_scores_universal, 1.0)}}},
          {"display_scores",
           {{"english", score_family(r.raw_overall, r.sub_scores_english, kDisplayScale)},
            {"universal",
             score_family(r.raw_universal, r.sub_scores_universal, kDisplayScale)}}},
          {"cap", std::move(cap)},
          {"low_data", r.low_data},
          {"versions", std::move(versions)}};
}

ScoreReport score_report_from_json(const json& j) {
  try {
    ScoreReport r;
    const json& u = j.at("user");
    r.user_id = u.at("user_id").get<std::string>();
    r.screen_name = u.value("screen_name", std::string{});
    r.probe_time = parse_timestamp(u.at("probe_time").get<std::string>());
    read_family(j.at("raw_scores").at("english"), r.raw_overall, r.sub_scores_english);
    read_family(j.at("raw_scores").at("universal"), r.raw_universal,
                r.sub_scores_universal);
    r.display_overall = j.at("display_scores").at("english").at("overall").get<double>();
    r.display_universal =
        j.at("display_scores").at("universal").at("overall").get<double>();
    const json& cap = j.at("cap");
    if (!cap.at("english").is_null()) r.cap_english = cap.at("english").get<double>();
    if (!cap.at("universal").is_null()) r.cap_universal = cap.at("universal").get<double>();
    r.low_data = j.value("low_data", false);
    const json& v = j.at("versions");
    r.model_version = v.at("model").get<std::string>();
    if (v.contains("calibration")) r.calibration_version = v.at("calibration").get<std::string>();
    check_invariants(r);
    return r;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed score report: ") + e.what());
  } catch (const std::logic_error& e) {
    throw ValidationError(std::string("invalid score report: ") + e.what());
  }
}

}  // namespace botlab
