#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "botlab/corpus.hpp"
#include "botlab/features.hpp"
#include "botlab/forest.hpp"

namespace botlab {

/// Ensemble of specialized classifiers: for each bot class one forest trained
/// on that class's bots against all humans, over the full registry
/// ("english") and over its language-independent projection ("universal").
struct EscModel {
  std::string version;
  FeatureRegistry registry;
  FeatureRegistry universal_registry;
  std::vector<BotClass> class_list;
  std::map<BotClass, ForestModel> specialized;
  std::map<BotClass, ForestModel> universal_specialized;
};

/// Minimum number of bot accounts required to train a class-specific forest.
inline constexpr std::size_t kMinClassExamples = 10;

EscModel train_esc(std::span<const LabeledDataset> datasets,
                   const FeatureRegistry& registry, const ForestParams& params,
                   std::uint64_t seed);

/// A single forest trained on all bots pooled against all humans; the
/// non-specialized baseline.
ForestModel train_pooled_forest(std::span<const LabeledDataset> datasets,
                                const FeatureRegistry& registry,
                                const ForestParams& params, std::uint64_t seed);

struct ScoreReport {
  std::string user_id;
  std::string screen_name;
  Timestamp probe_time;
  double raw_overall = 0.0;
  double raw_universal = 0.0;
  std::map<BotClass, double> sub_scores_english;
  std::map<BotClass, double> sub_scores_universal;
  double display_overall = 0.0;
  double display_universal = 0.0;
  std::optional<double> cap_english;
  std::optional<double> cap_universal;
  bool low_data = false;
  std::string model_version;
  std::optional<std::string> calibration_version;

  bool operator==(const ScoreReport&) const = default;
};

inline constexpr double kDisplayScale = 5.0;

inline double to_display(double raw) { return kDisplayScale * raw; }

/// Uncalibrated report: sub-scores per class, raw = max over sub-scores,
/// display = 5 * raw. Payloads with neither timeline nor mentions are scored
/// on imputed features and flagged low_data.
ScoreReport score_account(const EscModel& model, const AccountPayload& payload);

/// Throws std::logic_error when a report breaks the range/max/display rules.
void check_invariants(const ScoreReport& report);

/// Empirical survival functions of bot and human scores on a fixed grid,
/// combined with a prior bot prevalence into a posterior (CAP).
struct CalibrationTable {
  std::vector<double> thresholds;
  std::vector<double> bot_survival;    // P(score >= t | bot)
  std::vector<double> human_survival;  // P(score >= t | human)
  double prior = 0.15;
  std::string model_version;
};

inline constexpr double kDefaultPrior = 0.15;
inline constexpr int kCalibrationGridSteps = 100;

struct LabeledScore {
  double score = 0.0;
  Label label = Label::Human;
};

CalibrationTable calibrate(const EscModel& model,
                           std::span<const LabeledScore> labeled_scores, double prior);
/// Same as above without a model to stamp the table with.
CalibrationTable calibrate(std::span<const LabeledScore> labeled_scores, double prior,
                           std::string model_version = {});

/// Throws std::logic_error when survival sequences are not non-increasing,
/// do not start at 1, or leave [0, 1].
void check_invariants(const CalibrationTable& table);

/// pi*S_b(t) / (pi*S_b(t) + (1-pi)*S_h(t)) at the largest grid threshold
/// t <= raw_score. Where no account reaches t, the last defined value is used.
double cap_lookup(const CalibrationTable& table, double raw_score);

/// English and universal tables produced together against one model.
struct Calibration {
  std::string version;
  std::string model_version;
  CalibrationTable english;
  CalibrationTable universal;
};

Calibration calibrate_model(const EscModel& model,
                            std::span<const LabeledDataset> datasets, double prior);
Calibration with_prior(Calibration calibration, double prior);

/// Fills cap fields. Throws VersionMismatch when the calibration was built for
/// another model.
void apply_calibration(const Calibration& calibration, ScoreReport& report);

inline constexpr std::string_view kEscFormat = "botlab-esc-v1";
inline constexpr std::string_view kCalibrationFormat = "botlab-calibration-v1";

json to_json(const EscModel& model);
EscModel esc_from_json(const json& j);
json to_json(const CalibrationTable& table);
CalibrationTable calibration_table_from_json(const json& j);
json to_json(const Calibration& calibration);
Calibration calibration_from_json(const json& j);
json to_json(const ScoreReport& report);
ScoreReport score_report_from_json(const json& j);

}  // namespace botlab
