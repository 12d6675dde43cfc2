#include "botlab/lite.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <thread>

#include "botlab/error.hpp"
#include "botlab/hash.hpp"
#include "botlab/rng.hpp"
#include "botlab/stats.hpp"

namespace botlab {
namespace {

std::vector<LabeledVector> lite_vectors(std::span<const LabeledDataset> datasets) {
  const auto& reg = default_registry();
  std::vector<LabeledVector> out;
  for (const auto& ds : datasets) {
    for (const auto& r : ds.records) {
      out.push_back({extract_lite(r.payload.user, r.payload.probe_time, reg), r.label});
    }
  }
  return out;
}

bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

double weighted_sum(const SelectionMetrics& m, const SelectionWeights& w) {
  return w.cv_accuracy * m.cv_accuracy + w.holdout_auc * m.holdout_auc +
         w.consistency * m.consistency;
}

std::string stamp_version(const LiteModel& model) {
  json j = to_json(model);
  j.erase("version");
  return content_version("lite", j.dump());
}

}  // namespace

LiteModel train_lite(std::span<const LabeledDataset> datasets, const ForestParams& params,
                     std::uint64_t seed) {
  LiteModel model;
  model.registry = lite_subset(default_registry());
  model.forest = train_forest(lite_vectors(datasets), params, seed);
  for (const auto& ds : datasets) model.selected_datasets.push_back(ds.name);
  model.version = stamp_version(model);
  return model;
}

std::size_t pick_winner(std::span<const SubsetResult> table, const SelectionWeights& weights) {
  std::size_t best = table.size();
  double best_score = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& row = table[i];
    if (!row.eligible) continue;
    const double s = weighted_sum(row.metrics, weights);
    if (best == table.size()) {
      best = i, best_score = s;
      continue;
    }
    const auto& cur = table[best];
    bool better;
    if (!nearly_equal(s, best_score)) {
      better = s > best_score;
    } else if (row.datasets.size() != cur.datasets.size()) {
      better = row.datasets.size() < cur.datasets.size();
    } else {
      better = row.datasets < cur.datasets;
    }
    if (better) best = i, best_score = s;
  }
  if (best == table.size()) throw ValidationError("no candidate subset could be evaluated");
  return best;
}

LiteModel select_training_sets(std::span<const LabeledDataset> candidates,
                               const LabeledDataset& holdout, const EscModel& reference,
                               const SelectionWeights& weights,
                               const SelectionOptions& options, std::uint64_t seed) {
  if (candidates.empty()) throw ValidationError("at least one candidate dataset is required");
  if (candidates.size() > kMaxCandidates) {
    throw ValidationError("at most " + std::to_string(kMaxCandidates) +
                          " candidate datasets are supported, got " +
                          std::to_string(candidates.size()));
  }
  std::set<std::string> holdout_ids;
  for (const auto& r : holdout.records) holdout_ids.insert(r.payload.user.user_id);
  for (const auto& ds : candidates) {
    for (const auto& r : ds.records) {
      if (holdout_ids.contains(r.payload.user.user_id)) {
        throw ValidationError("candidate " + ds.name + " shares user_id " +
                              r.payload.user.user_id + " with the holdout");
      }
    }
  }
  if (holdout.bot_count() == 0 || holdout.human_count() == 0) {
    throw ValidationError("holdout must contain both labels");
  }

  const auto& reg = default_registry();
  std::vector<FeatureVector> holdout_x;
  std::vector<Label> holdout_y;
  std::vector<double> reference_scores;
  for (const auto& r : holdout.records) {
    holdout_x.push_back(extract_lite(r.payload.user, r.payload.probe_time, reg));
    holdout_y.push_back(r.label);
    reference_scores.push_back(score_account(reference, r.payload).raw_overall);
  }
  std::vector<std::vector<LabeledVector>> per_candidate;
  for (const auto& ds : candidates) per_candidate.push_back(lite_vectors({&ds, 1}));

  const std::uint32_t n_subsets = (1u << candidates.size()) - 1;
  std::vector<SubsetResult> table(n_subsets);
  auto evaluate = [&](std::uint32_t mask) {
    SubsetResult& row = table[mask - 1];
    row.mask = mask;
    std::vector<LabeledVector> data;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (!(mask & (1u << i))) continue;
      row.datasets.push_back(candidates[i].name);
      data.insert(data.end(), per_candidate[i].begin(), per_candidate[i].end());
    }
    try {
      const std::uint64_t s = derive_seed(seed, mask);
      const EvalReport cv = cross_validate(data, options.params, options.cv_folds, s);
      const ForestModel forest = train_forest(data, options.params, s);
      std::vector<double> lite_scores, pos, neg;
      for (std::size_t i = 0; i < holdout_x.size(); ++i) {
        const double v = score(forest, holdout_x[i]);
        lite_scores.push_back(v);
        (holdout_y[i] == Label::Bot ? pos : neg).push_back(v);
      }
      row.metrics.cv_accuracy = cv.accuracy();
      row.metrics.holdout_auc = auc(pos, neg);
      row.metrics.consistency = spearman(lite_scores, reference_scores);
      row.weighted = weighted_sum(row.metrics, weights);
      row.eligible = true;
    } catch (const ValidationError& e) {
      row.eligible = false;
      row.note = e.what();
    }
  };

  const auto threads = static_cast<std::uint32_t>(std::max(1, options.n_threads));
  if (threads == 1) {
    for (std::uint32_t m = 1; m <= n_subsets; ++m) evaluate(m);
  } else {
    std::vector<std::jthread> workers;
    for (std::uint32_t w = 0; w < threads; ++w) {
      workers.emplace_back([&, w] {
        for (std::uint32_t m = 1 + w; m <= n_subsets; m += threads) evaluate(m);
      });
    }
  }

  const SubsetResult& winner = table[pick_winner(table, weights)];
  std::vector<LabeledDataset> chosen;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (winner.mask & (1u << i)) chosen.push_back(candidates[i]);
  }
  LiteModel model = train_lite(chosen, options.params, derive_seed(seed, winner.mask));
  model.selection_report = std::move(table);
  model.version = stamp_version(model);
  return model;
}

double score_lite(const LiteModel& model, const UserObject& user, Timestamp probe_time) {
  return score(model.forest, extract_lite(user, probe_time, default_registry()));
}

std::string selection_csv(const LiteModel& model) {
  std::ostringstream out;
  out << "mask,datasets,cv_accuracy,holdout_auc,consistency,weighted,eligible\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  for (const auto& row : model.selection_report) {
    std::string names;
    for (const auto& n : row.datasets) names += (names.empty() ? "" : ";") + n;
    out << row.mask << ',' << names << ',' << num(row.metrics.cv_accuracy) << ','
        << num(row.metrics.holdout_auc) << ',' << num(row.metrics.consistency) << ','
        << num(row.weighted) << ',' << (row.eligible ? "true" : "false") << '\n';
  }
  return out.str();
}

json to_json(const LiteModel& model) {
  json table = json::array();
  for (const auto& row : model.selection_report) {
    table.push_back({{"mask", row.mask},
                     {"datasets", row.datasets},
                     {"cv_accuracy", row.metrics.cv_accuracy},
                     {"holdout_auc", row.metrics.holdout_auc},
                     {"consistency", row.metrics.consistency},
                     {"weighted", row.weighted},
                     {"eligible", row.eligible},
                     {"note", row.note}});
  }
  return {{"format", kLiteFormat},
          {"version", model.version},
          {"registry_version", model.registry.version},
          {"selected_datasets", model.selected_datasets},
          {"selection_report", std::move(table)},
          {"forest", to_json(model.forest)}};
}

LiteModel lite_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kLiteFormat) {
      throw VersionMismatch("not a lite model document");
    }
    LiteModel m;
    m.registry = lite_subset(default_registry());
    if (j.at("registry_version").get<std::string>() != m.registry.version) {
      throw VersionMismatch("lite model was built for registry " +
                            j.at("registry_version").get<std::string>());
    }
    m.version = j.at("version").get<std::string>();
    m.selected_datasets = j.at("selected_datasets").get<std::vector<std::string>>();
    for (const auto& row : j.at("selection_report")) {
      SubsetResult r;
      r.mask = row.at("mask").get<std::uint32_t>();
      r.datasets = row.at("datasets").get<std::vector<std::string>>();
      r.metrics = {row.at("cv_accuracy").get<double>(), row.at("holdout_auc").get<double>(),
                   row.at("consistency").get<double>()};
      r.weighted = row.at("weighted").get<double>();
      r.eligible = row.at("eligible").get<bool>();
      r.note = row.value("note", "");
      m.selection_report.push_back(std::move(r));
    }
    m.forest = forest_from_json(j.at("forest"));
    if (m.forest.registry_version != m.registry.version ||
        m.forest.n_features != m.registry.size()) {
      throw VersionMismatch("lite forest does not match the lite registry");
    }
    if (stamp_version(m) != m.version) {
      throw VersionMismatch("lite model content does not match its version " + m.version);
    }
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed lite model: ") + e.what());
  }
}

}  // namespace botlab
