#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "botlab/corpus.hpp"
#include "botlab/features.hpp"

namespace botlab {

struct ForestParams {
  int n_trees = 100;
  int max_depth = 12;
  int min_leaf = 2;
  /// 0 selects ceil(sqrt(d)) at training time.
  int features_per_split = 0;
  /// Worker threads for tree construction. Results do not depend on it.
  int n_threads = 1;
};

struct LabeledVector {
  FeatureVector x;
  Label y = Label::Human;
};

/// Axis-aligned binary tree stored as a flat node array; node 0 is the root.
struct DecisionTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double human_votes = 0.0;
    double bot_votes = 0.0;

    bool operator==(const Node&) const = default;
  };

  std::vector<Node> nodes;

  /// Values < threshold descend left. A leaf votes bot on a strict majority.
  bool votes_bot(std::span<const double> x) const;
  bool operator==(const DecisionTree&) const = default;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  ForestParams params;  // features_per_split resolved
  std::string registry_version;
  std::size_t n_features = 0;
  std::uint64_t training_seed = 0;

  bool operator==(const ForestModel& o) const {
    return trees == o.trees && params.n_trees == o.params.n_trees &&
           params.max_depth == o.params.max_depth &&
           params.min_leaf == o.params.min_leaf &&
           params.features_per_split == o.params.features_per_split &&
           registry_version == o.registry_version && n_features == o.n_features &&
           training_seed == o.training_seed;
  }
};

/// Bootstrap-sampled, Gini-split random forest. Deterministic given seed;
/// tree t draws from derive_seed(seed, t) so parallel builds match serial ones.
ForestModel train_forest(std::span<const LabeledVector> data,
                         const ForestParams& params, std::uint64_t seed);

/// Fraction of trees voting bot.
double score(const ForestModel& model, const FeatureVector& x);

/// Area under the ROC curve via midranks (ties count one half).
double auc(std::span<const double> scores_pos, std::span<const double> scores_neg);

struct EvalReport {
  double auc = 0.0;
  std::vector<double> per_fold_auc;
  int n_folds = 0;
  double reference_threshold = 0.5;
  /// Confusion counts of out-of-fold scores, bot predicted when score > threshold.
  std::size_t true_pos = 0, false_pos = 0, true_neg = 0, false_neg = 0;
  std::vector<double> out_of_fold_scores;  // aligned with input data

  double accuracy() const;
};

/// Stratified k-fold cross-validation. Folds are filled round-robin after a
/// seeded shuffle within each label.
EvalReport cross_validate(std::span<const LabeledVector> data,
                          const ForestParams& params, int k, std::uint64_t seed);

/// Fold index of each example, as used by cross_validate.
std::vector<int> stratified_folds(std::span<const LabeledVector> data, int k,
                                  std::uint64_t seed);

inline constexpr std::string_view kForestFormat = "botlab-forest-v1";

json to_json(const ForestModel& model);
ForestModel forest_from_json(const json& j);

}  // namespace botlab
