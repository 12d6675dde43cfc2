#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "botlab/corpus.hpp"
#include "botlab/ensemble.hpp"
#include "botlab/forest.hpp"

namespace botlab {

struct SelectionMetrics {
  double cv_accuracy = 0.0;
  double holdout_auc = 0.0;
  /// Spearman correlation between lite scores and the reference model's
  /// raw_overall on the holdout accounts.
  double consistency = 0.0;
};

struct SelectionWeights {
  double cv_accuracy = 1.0;
  double holdout_auc = 1.0;
  double consistency = 1.0;
};

/// One row of the selection table. Bit i of mask refers to candidate i.
struct SubsetResult {
  std::uint32_t mask = 0;
  std::vector<std::string> datasets;
  SelectionMetrics metrics;
  double weighted = 0.0;
  /// False when the subset cannot be trained or cross-validated
  /// (single label, or too few examples of a label for the folds).
  bool eligible = false;
  std::string note;
};

struct LiteModel {
  std::string version;
  ForestModel forest;
  FeatureRegistry registry;  // lite_subset of the default registry
  std::vector<std::string> selected_datasets;
  std::vector<SubsetResult> selection_report;
};

struct SelectionOptions {
  ForestParams params;
  int cv_folds = 5;
  /// Concurrent subset evaluations. Results do not depend on it.
  int n_threads = 1;
};

inline constexpr std::size_t kMaxCandidates = 12;

/// Trains a lite forest on the union of `datasets`.
LiteModel train_lite(std::span<const LabeledDataset> datasets, const ForestParams& params,
                     std::uint64_t seed);

/// Exhaustive search over the non-empty subsets of `candidates`. The winner
/// maximizes the weighted metric sum; ties go to fewer datasets, then to the
/// lexicographically smaller list of names.
LiteModel select_training_sets(std::span<const LabeledDataset> candidates,
                               const LabeledDataset& holdout, const EscModel& reference,
                               const SelectionWeights& weights,
                               const SelectionOptions& options, std::uint64_t seed);

/// Index into selection_report of the winner under `weights`.
std::size_t pick_winner(std::span<const SubsetResult> table, const SelectionWeights& weights);

double score_lite(const LiteModel& model, const UserObject& user, Timestamp probe_time);

/// mask,datasets,cv_accuracy,holdout_auc,consistency,weighted,eligible
std::string selection_csv(const LiteModel& model);

inline constexpr std::string_view kLiteFormat = "botlab-lite-v1";
json to_json(const LiteModel& model);
LiteModel lite_from_json(const json& j);

}  // namespace botlab
