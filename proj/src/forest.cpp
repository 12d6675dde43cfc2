#include "botlab/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "botlab/error.hpp"
#include "botlab/rng.hpp"
#include "botlab/stats.hpp"

namespace botlab {
namespace {

// Column-major copy of the training matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
  std::vector<std::uint8_t> labels;  // 1 = bot

  double at(std::size_t row, std::size_t col) const { return data[col * rows + row]; }
};

Matrix to_matrix(std::span<const LabeledVector> examples) {
  Matrix m;
  m.rows = examples.size();
  m.cols = examples.empty() ? 0 : examples.front().x.size();
  m.data.resize(m.rows * m.cols);
  m.labels.resize(m.rows);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      m.data[c * m.rows + r] = examples[r].x.values[c];
    }
    m.labels[r] = examples[r].y == Label::Bot ? 1 : 0;
  }
  return m;
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& m, const ForestParams& p, std::uint64_t seed)
      : m_(m), p_(p), rng_(seed) {}

  DecisionTree build() {
    std::vector<std::uint32_t> sample(m_.rows);
    for (auto& s : sample) s = static_cast<std::uint32_t>(rng_.below(m_.rows));
    feature_order_.resize(m_.cols);
    std::iota(feature_order_.begin(), feature_order_.end(), 0);
    grow(sample, 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
  };

  static double weighted_gini(double c0, double c1) {
    const double n = c0 + c1;
    return n > 0 ? n - (c0 * c0 + c1 * c1) / n : 0.0;
  }

  int grow(const std::vector<std::uint32_t>& sample, int depth) {
    double c1 = 0;
    for (auto s : sample) c1 += m_.labels[s];
    const double c0 = static_cast<double>(sample.size()) - c1;

    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back({});
    tree_.nodes[id].human_votes = c0;
    tree_.nodes[id].bot_votes = c1;

    const auto n = static_cast<std::int64_t>(sample.size());
    if (depth >= p_.max_depth || n < 2 * p_.min_leaf || c0 == 0 || c1 == 0) {
      return id;
    }
    const Split best = find_split(sample, c0, c1);
    if (best.feature < 0) return id;

    std::vector<std::uint32_t> left, right;
    for (auto s : sample) {
      (m_.at(s, static_cast<std::size_t>(best.feature)) < best.threshold ? left : right)
          .push_back(s);
    }
    tree_.nodes[id].feature = best.feature;
    tree_.nodes[id].threshold = best.threshold;
    const int l = grow(left, depth + 1);
    tree_.nodes[id].left = l;
    const int r = grow(right, depth + 1);
    tree_.nodes[id].right = r;
    return id;
  }

  Split find_split(const std::vector<std::uint32_t>& sample, double c0, double c1) {
    Split best;
    best.impurity = weighted_gini(c0, c1);
    bool found = false;
    const std::size_t d = m_.cols;
    int visited = 0;
    std::vector<std::pair<double, std::uint8_t>> column(sample.size());
    // Lazily drawn random feature order; features constant within the node
    // do not count towards features_per_split.
    for (std::size_t i = 0; i < d && visited < p_.features_per_split; ++i) {
      std::swap(feature_order_[i], feature_order_[i + rng_.below(d - i)]);
      const std::size_t f = feature_order_[i];
      for (std::size_t k = 0; k < sample.size(); ++k) {
        column[k] = {m_.at(sample[k], f), m_.labels[sample[k]]};
      }
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;
      ++visited;

      double l0 = 0, l1 = 0;
      const std::size_t n = column.size();
      const auto min_leaf = static_cast<std::size_t>(p_.min_leaf);
      for (std::size_t k = 1; k < n; ++k) {
        (column[k - 1].second ? l1 : l0) += 1;
        if (column[k - 1].first == column[k].first) continue;
        if (k < min_leaf || n - k < min_leaf) continue;
        const double imp = weighted_gini(l0, l1) + weighted_gini(c0 - l0, c1 - l1);
        if (!found || imp < best.impurity) {
          found = true;
          double mid = column[k - 1].first + (column[k].first - column[k - 1].first) / 2;
          if (!(mid > column[k - 1].first)) mid = column[k].first;
          best = {static_cast<int>(f), mid, imp};
        }
      }
    }
    if (!found) best.feature = -1;
    return best;
  }

  const Matrix& m_;
  const ForestParams& p_;
  Rng rng_;
  DecisionTree tree_;
  std::vector<std::size_t> feature_order_;
};

void check_training_data(std::span<const LabeledVector> data) {
  if (data.empty()) throw ValidationError("training data is empty");
  const auto& version = data.front().x.registry_version;
  const std::size_t d = data.front().x.size();
  std::size_t bots = 0;
  for (const auto& e : data) {
    if (e.x.registry_version != version || e.x.size() != d) {
      throw VersionMismatch("training vectors do not share one registry ('" + version +
                            "' vs '" + e.x.registry_version + "')");
    }
    bots += e.y == Label::Bot;
  }
  const std::size_t humans = data.size() - bots;
  if (bots == 0 || humans == 0) {
    throw ValidationError("training data contains a single class");
  }
  if (bots < 2 || humans < 2) {
    throw ValidationError("training data needs at least 2 examples of each label");
  }
}

}  // namespace

bool DecisionTree::votes_bot(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] < n.threshold
                                     ? n.left
                                     : n.right);
  }
  return nodes[i].bot_votes > nodes[i].human_votes;
}

ForestModel train_forest(std::span<const LabeledVector> data,
                         const ForestParams& params, std::uint64_t seed) {
  check_training_data(data);
  if (params.n_trees < 1 || params.max_depth < 0 || params.min_leaf < 1) {
    throw ValidationError("invalid forest hyperparameters");
  }
  const Matrix m = to_matrix(data);

  ForestModel model;
  model.params = params;
  if (model.params.features_per_split <= 0) {
    model.params.features_per_split =
        static_cast<int>(std::ceil(std::sqrt(static_cast<double>(m.cols))));
  }
  model.params.features_per_split =
      std::min(model.params.features_per_split, static_cast<int>(m.cols));
  model.registry_version = data.front().x.registry_version;
  model.n_features = m.cols;
  model.training_seed = seed;
  model.trees.resize(static_cast<std::size_t>(params.n_trees));

  auto build_range = [&](std::size_t begin, std::size_t step) {
    for (std::size_t t = begin; t < model.trees.size(); t += step) {
      model.trees[t] = TreeBuilder(m, model.params, derive_seed(seed, t)).build();
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, params.n_threads));
  if (threads == 1) {
    build_range(0, 1);
  } else {
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < threads; ++w) workers.emplace_back(build_range, w, threads);
  }
  return model;
}

double score(const ForestModel& model, const FeatureVector& x) {
  if (x.registry_version != model.registry_version || x.size() != model.n_features) {
    throw VersionMismatch("feature vector registry '" + x.registry_version +
                          "' does not match model registry '" +
                          model.registry_version + "'");
  }
  if (model.trees.empty()) return 0.0;
  std::size_t votes = 0;
  for (const auto& t : model.trees) votes += t.votes_bot(x.values);
  return static_cast<double>(votes) / static_cast<double>(model.trees.size());
}

double auc(std::span<const double> scores_pos, std::span<const double> scores_neg) {
  if (scores_pos.empty() || scores_neg.empty()) {
    throw ValidationError("auc needs non-empty positive and negative score lists");
  }
  std::vector<double> all(scores_pos.begin(), scores_pos.end());
  all.insert(all.end(), scores_neg.begin(), scores_neg.end());
  const std::vector<double> ranks = midranks(all);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < scores_pos.size(); ++i) rank_sum += ranks[i];
  const double np = static_cast<double>(scores_pos.size());
  const double nn = static_cast<double>(scores_neg.size());
  const double u = rank_sum - np * (np + 1) / 2;
  return u / (np * nn);
}

double EvalReport::accuracy() const {
  const double total = static_cast<double>(true_pos + false_pos + true_neg + false_neg);
  return total > 0 ? static_cast<double>(true_pos + true_neg) / total : 0.0;
}

std::vector<int> stratified_folds(std::span<const LabeledVector> data, int k,
                                  std::uint64_t seed) {
  std::vector<int> fold(data.size(), 0);
  int offset = 0;
  for (Label label : {Label::Human, Label::Bot}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data[i].y == label) idx.push_back(i);
    }
    Rng rng(derive_seed(seed, label == Label::Bot ? 1 : 0));
    rng.shuffle(idx);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      fold[idx[j]] = static_cast<int>((j + static_cast<std::size_t>(offset)) %
                                      static_cast<std::size_t>(k));
    }
    // continue the round-robin where the previous label stopped
    offset = static_cast<int>((idx.size() + static_cast<std::size_t>(offset)) %
                              static_cast<std::size_t>(k));
  }
  return fold;
}

EvalReport cross_validate(std::span<const LabeledVector> data,
                          const ForestParams& params, int k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("cross-validation needs k >= 2");
  if (data.size() < static_cast<std::size_t>(k)) {
    throw ValidationError("cross-validation needs at least k examples");
  }
  check_training_data(data);
  const std::vector<int> fold = stratified_folds(data, k, seed);

  EvalReport report;
  report.n_folds = k;
  report.out_of_fold_scores.assign(data.size(), 0.0);
  for (int f = 0; f < k; ++f) {
    std::vector<LabeledVector> train;
    std::vector<std::size_t> test;
    bool has_bot = false, has_human = false;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (fold[i] == f) {
        test.push_back(i);
        (data[i].y == Label::Bot ? has_bot : has_human) = true;
      } else {
        train.push_back(data[i]);
      }
    }
    if (!has_bot || !has_human) {
      throw ValidationError("fold " + std::to_string(f) + " does not contain both labels");
    }
    const ForestModel model =
        train_forest(train, params, derive_seed(seed, 1000 + static_cast<std::uint64_t>(f)));
    std::vector<double> pos, neg;
    for (std::size_t i : test) {
      const double s = score(model, data[i].x);
      report.out_of_fold_scores[i] = s;
      (data[i].y == Label::Bot ? pos : neg).push_back(s);
    }
    report.per_fold_auc.push_back(auc(pos, neg));
  }

  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double s = report.out_of_fold_scores[i];
    const bool bot = data[i].y == Label::Bot;
    (bot ? pos : neg).push_back(s);
    const bool predicted = s > report.reference_threshold;
    if (bot && predicted) ++report.true_pos;
    if (bot && !predicted) ++report.false_neg;
    if (!bot && predicted) ++report.false_pos;
    if (!bot && !predicted) ++report.true_neg;
  }
  report.auc = auc(pos, neg);
  return report;
}

json to_json(const ForestModel& model) {
  json trees = json::array();
  for (const auto& t : model.trees) {
    json nodes = json::array();
    for (const auto& n : t.nodes) {
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.human_votes, n.bot_votes});
    }
    trees.push_back(std::move(nodes));
  }
  return {{"format", kForestFormat},
          {"registry_version", model.registry_version},
          {"n_features", model.n_features},
          {"training_seed", model.training_seed},
          {"params",
           {{"n_trees", model.params.n_trees},
            {"max_depth", model.params.max_depth},
            {"min_leaf", model.params.min_leaf},
            {"features_per_split", model.params.features_per_split}}},
          {"trees", std::move(trees)}};
}

ForestModel forest_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kForestFormat) {
      throw VersionMismatch("unsupported forest format " + j.at("format").dump());
    }
    ForestModel m;
    m.registry_version = j.at("registry_version").get<std::string>();
    m.n_features = j.at("n_features").get<std::size_t>();
    m.training_seed = j.at("training_seed").get<std::uint64_t>();
    const json& p = j.at("params");
    m.params.n_trees = p.at("n_trees").get<int>();
    m.params.max_depth = p.at("max_depth").get<int>();
    m.params.min_leaf = p.at("min_leaf").get<int>();
    m.params.features_per_split = p.at("features_per_split").get<int>();
    for (const auto& tj : j.at("trees")) {
      DecisionTree t;
      for (const auto& nj : tj) {
        DecisionTree::Node n;
        n.feature = nj.at(0).get<int>();
        n.threshold = nj.at(1).get<double>();
        n.left = nj.at(2).get<int>();
        n.right = nj.at(3).get<int>();
        n.human_votes = nj.at(4).get<double>();
        n.bot_votes = nj.at(5).get<double>();
        if (n.feature >= static_cast<int>(m.n_features)) {
          throw ValidationError("split feature index out of range");
        }
        if (n.human_votes < 0 || n.bot_votes < 0) {
          throw ValidationError("negative leaf votes");
        }
        t.nodes.push_back(n);
      }
      const auto count = static_cast<int>(t.nodes.size());
      if (count == 0) throw ValidationError("empty tree");
      for (const auto& n : t.nodes) {
        if (n.feature >= 0 && (n.left <= 0 || n.left >= count || n.right <= 0 ||
                               n.right >= count)) {
          throw ValidationError("tree child index out of range");
        }
      }
      m.trees.push_back(std::move(t));
    }
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed forest document: ") + e.what());
  }
}

}  // namespace botlab
