#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "botlab/corpus.hpp"
#include "botlab/ensemble.hpp"

namespace botlab {

struct SampleTweet {
  std::string tweet_id;
  std::string user_id;
  double score = 0.0;
};

struct AnalyticalSample {
  std::string group_name;
  std::vector<SampleTweet> tweets;
  /// Deduplicated accounts with their score.
  std::map<std::string, double> accounts;
  std::optional<std::string> language_filter;
  /// Counts before the language filter.
  std::size_t raw_tweets = 0;
  std::size_t raw_accounts = 0;
};

/// Majority tweet `lang` of one account. Ties go to the declared language if
/// it is among the tied ones, otherwise to "und".
std::string account_language(std::span<const TweetRecord> tweets_of_account);

/// Duplicate tweet_ids are dropped (first kept). With `language` set, accounts
/// whose majority language differs are removed with all their tweets.
AnalyticalSample build_sample(std::string group_name, std::span<const TweetRecord> tweets,
                              const std::map<std::string, double>& scores,
                              std::optional<std::string> language);
/// Same, reading raw_overall from full reports.
AnalyticalSample build_sample(std::string group_name, std::span<const TweetRecord> tweets,
                              const std::map<std::string, ScoreReport>& reports,
                              std::optional<std::string> language);

/// Fraction of distinct accounts per account language.
std::map<std::string, double> language_profile(std::span<const TweetRecord> tweets);

enum class TestMethod { Exact, NormalApprox };
std::string_view to_string(TestMethod m);

struct TestResult {
  std::string statistic_name;  // "U" or "z"
  double statistic = 0.0;
  double p_value = 1.0;
  TestMethod method = TestMethod::NormalApprox;
  std::int64_t n1 = 0, n2 = 0;
  std::int64_t k1 = 0, k2 = 0;  // z-test only
};

enum class MwuMethod { Auto, Exact, NormalApprox };

/// Largest n1+n2 for which Auto picks the exact distribution.
inline constexpr std::size_t kExactMwuLimit = 12;

/// Two-sided Mann-Whitney U. U is reported for `a`. Auto uses the exact null
/// distribution for tie-free samples with n1+n2 <= 12, otherwise the normal
/// approximation with tie and continuity correction.
TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                          MwuMethod method = MwuMethod::Auto);

/// Pooled-variance two-proportion z-test, two-sided.
TestResult two_proportion_z(std::int64_t k1, std::int64_t n1, std::int64_t k2, std::int64_t n2);

/// "***" for p <= 0.001, "**" <= 0.01, "*" <= 0.05, else "NS".
std::string stars(double p);

enum class AnalysisUnit { Tweet, Account };

struct GroupProportion {
  std::string group;
  std::int64_t above = 0;  // score > threshold
  std::int64_t total = 0;
  double proportion = 0.0;
};

struct PairwiseTest {
  std::string group_a;
  std::string group_b;
  TestResult test;
  std::string stars;
};

struct ThresholdReport {
  double threshold = 0.5;
  std::vector<GroupProportion> proportions;
  std::vector<PairwiseTest> pairwise;
};

inline constexpr double kDefaultThresholds[] = {0.5, 0.7};

/// Scores strictly above the threshold count as bots.
std::vector<ThresholdReport> threshold_sweep(std::span<const AnalyticalSample> samples,
                                             std::span<const double> thresholds,
                                             AnalysisUnit unit = AnalysisUnit::Tweet);

struct ThresholdMetrics {
  double threshold = 0.5;
  std::int64_t true_pos = 0, false_pos = 0, true_neg = 0, false_neg = 0;
  double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
  /// No account predicted bot: precision and f1 set to 0.
  bool degenerate = false;
};

std::vector<ThresholdMetrics> threshold_validation(std::span<const LabeledScore> labeled,
                                                   std::span<const double> thresholds);

/// Scores of a sample in the chosen unit (one per tweet or one per account).
std::vector<double> unit_scores(const AnalyticalSample& sample, AnalysisUnit unit);

struct Summary {
  std::size_t n = 0;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0;
};
/// Five-number summary (linear-interpolated quartiles) plus mean.
Summary summarize(std::span<const double> values);
/// Equal-width bins over [0, 1]; a score of 1 falls in the last bin.
std::vector<std::int64_t> histogram(std::span<const double> values, int bins);

/// Counts, distributions, pairwise MWU tests and threshold reports of a
/// case study, as a single document for external plotting.
json case_study_json(std::span<const AnalyticalSample> samples,
                     std::span<const double> thresholds, AnalysisUnit unit, int bins = 20);
json to_json(const TestResult& r);
json to_json(const ThresholdReport& r);
json to_json(const ThresholdMetrics& m);

struct ScorePoint {
  Timestamp probe_time;
  double raw_score = 0.0;
  std::string model_version;
  bool operator==(const ScorePoint&) const = default;
};

struct ScoreSeries {
  std::string user_id;
  std::vector<ScorePoint> points;
};

/// Per-account score time series persisted as JSON lines. Single writer.
class SeriesStore {
 public:
  /// Loads `path` when it exists. An empty path keeps the store in memory.
  explicit SeriesStore(std::filesystem::path path = {});

  /// Appends a point. Re-recording the last point unchanged is a no-op; any
  /// other probe_time not after the last one is rejected.
  ScoreSeries record(const std::string& user_id, Timestamp probe_time, double raw_score,
                     const std::string& model_version);
  ScoreSeries series(const std::string& user_id) const;
  std::vector<std::string> users() const;

 private:
  std::filesystem::path path_;
  std::map<std::string, std::vector<ScorePoint>> data_;
  mutable std::mutex mu_;
};

ScoreSeries record_probe(SeriesStore& store, const std::string& user_id, Timestamp probe_time,
                         double raw_score, const std::string& model_version);

}  // namespace botlab
