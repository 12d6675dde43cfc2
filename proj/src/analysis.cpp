#include "botlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "botlab/error.hpp"
#include "botlab/stats.hpp"

namespace botlab {
namespace {

// counts[m][n][u]: arrangements of m first-sample and n second-sample ranks
// giving statistic u.
std::vector<std::uint64_t> u_distribution(std::size_t n1, std::size_t n2) {
  std::vector<std::vector<std::vector<std::uint64_t>>> f(
      n1 + 1, std::vector<std::vector<std::uint64_t>>(n2 + 1));
  for (std::size_t m = 0; m <= n1; ++m) {
    for (std::size_t n = 0; n <= n2; ++n) {
      auto& cur = f[m][n];
      cur.assign(m * n + 1, 0);
      if (m == 0 || n == 0) {
        cur[0] = 1;
        continue;
      }
      // largest rank from the first sample beats all n of the second
      const auto& a = f[m - 1][n];
      for (std::size_t u = 0; u < a.size(); ++u) cur[u + n] += a[u];
      const auto& b = f[m][n - 1];
      for (std::size_t u = 0; u < b.size(); ++u) cur[u] += b[u];
    }
  }
  return f[n1][n2];
}

double clip01(double p) { return std::clamp(p, 0.0, 1.0); }


}  // namespace

std::string account_language(std::span<const TweetRecord> tweets) {
  std::map<std::string, int> counts;
  std::optional<std::string> declared;
  for (const auto& t : tweets) {
    if (t.lang && !t.lang->empty()) ++counts[*t.lang];
    if (!declared && t.author.declared_language) declared = t.author.declared_language;
  }
  int best = 0;
  std::vector<std::string> tied;
  for (const auto& [lang, c] : counts) {
    if (c > best) {
      best = c;
      tied = {lang};
    } else if (c == best) {
      tied.push_back(lang);
    }
  }
  if (tied.size() == 1) return tied.front();
  if (declared && (tied.empty() || std::find(tied.begin(), tied.end(), *declared) != tied.end())) {
    return *declared;
  }
  return "und";
}

AnalyticalSample build_sample(std::string group_name, std::span<const TweetRecord> tweets,
                              const std::map<std::string, double>& scores,
                              std::optional<std::string> language) {
  AnalyticalSample s;
  s.group_name = std::move(group_name);
  s.language_filter = language;
  std::set<std::string> seen;
  std::vector<const TweetRecord*> unique;
  std::map<std::string, std::vector<TweetRecord>> by_account;
  for (const auto& t : tweets) {
    if (!seen.insert(t.tweet_id).second) continue;
    const std::string& uid = t.author.user_id;
    if (!scores.contains(uid)) throw ValidationError("no score for user_id " + uid);
    unique.push_back(&t);
    by_account[uid].push_back(t);
  }
  s.raw_tweets = unique.size();
  s.raw_accounts = by_account.size();
  std::set<std::string> kept;
  for (const auto& [uid, ts] : by_account) {
    if (!language || account_language(ts) == *language) kept.insert(uid);
  }
  for (const TweetRecord* t : unique) {
    const std::string& uid = t->author.user_id;
    if (!kept.contains(uid)) continue;
    const double score = scores.at(uid);
    s.tweets.push_back({t->tweet_id, uid, score});
    s.accounts.emplace(uid, score);
  }
  return s;
}

AnalyticalSample build_sample(std::string group_name, std::span<const TweetRecord> tweets,
                              const std::map<std::string, ScoreReport>& reports,
                              std::optional<std::string> language) {
  std::map<std::string, double> scores;
  for (const auto& [uid, r] : reports) scores.emplace(uid, r.raw_overall);
  return build_sample(std::move(group_name), tweets, scores, std::move(language));
}

std::map<std::string, double> language_profile(std::span<const TweetRecord> tweets) {
  if (tweets.empty()) throw ValidationError("language profile of an empty tweet set");
  std::map<std::string, std::vector<TweetRecord>> by_account;
  for (const auto& t : tweets) by_account[t.author.user_id].push_back(t);
  std::map<std::string, double> out;
  for (const auto& [_, ts] : by_account) out[account_language(ts)] += 1.0;
  for (auto& [_, v] : out) v /= static_cast<double>(by_account.size());
  return out;
}

std::string_view to_string(TestMethod m) {
  return m == TestMethod::Exact ? "exact" : "normal_approx";
}

TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                          MwuMethod method) {
  if (a.empty() || b.empty()) throw ValidationError("Mann-Whitney U needs two non-empty samples");
  const std::size_t n1 = a.size(), n2 = b.size(), n = n1 + n2;
  std::vector<double> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  const std::vector<double> ranks = midranks(all);
  double r1 = 0;
  for (std::size_t i = 0; i < n1; ++i) r1 += ranks[i];
  const double u = r1 - static_cast<double>(n1 * (n1 + 1)) / 2.0;
  const auto ties = tie_group_sizes(all);
  const bool tie_free = std::all_of(ties.begin(), ties.end(), [](std::size_t t) { return t == 1; });

  TestResult r;
  r.statistic_name = "U";
  r.statistic = u;
  r.n1 = static_cast<std::int64_t>(n1);
  r.n2 = static_cast<std::int64_t>(n2);

  bool exact = method == MwuMethod::Exact;
  if (method == MwuMethod::Auto) exact = tie_free && n <= kExactMwuLimit;
  if (exact) {
    if (!tie_free) throw ValidationError("exact Mann-Whitney U requires tie-free samples");
    if (n > 60) throw ValidationError("exact Mann-Whitney U is limited to 60 observations");
    const auto dist = u_distribution(n1, n2);
    const auto ui = static_cast<std::size_t>(std::llround(u));
    double total = 0, le = 0, ge = 0;
    for (std::size_t k = 0; k < dist.size(); ++k) {
      const double c = static_cast<double>(dist[k]);
      total += c;
      if (k <= ui) le += c;
      if (k >= ui) ge += c;
    }
    r.method = TestMethod::Exact;
    r.p_value = clip01(2.0 * std::min(le, ge) / total);
    return r;
  }

  r.method = TestMethod::NormalApprox;
  const double dn = static_cast<double>(n);
  double tie_term = 0;
  for (std::size_t t : ties) {
    const double dt = static_cast<double>(t);
    tie_term += dt * dt * dt - dt;
  }
  const double prod = static_cast<double>(n1) * static_cast<double>(n2);
  const double var = prod / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
  if (!(var > 0)) {
    r.p_value = 1.0;
    return r;
  }
  const double dev = std::max(0.0, std::abs(u - prod / 2.0) - 0.5);
  r.p_value = clip01(2.0 * normal_sf(dev / std::sqrt(var)));
  return r;
}

TestResult two_proportion_z(std::int64_t k1, std::int64_t n1, std::int64_t k2, std::int64_t n2) {
  if (n1 < 1 || n2 < 1) throw ValidationError("proportion test needs n1, n2 >= 1");
  if (k1 < 0 || k2 < 0 || k1 > n1 || k2 > n2) {
    throw ValidationError("proportion test needs 0 <= k <= n");
  }
  TestResult r;
  r.statistic_name = "z";
  r.method = TestMethod::NormalApprox;
  r.n1 = n1, r.n2 = n2, r.k1 = k1, r.k2 = k2;
  const double d1 = static_cast<double>(n1), d2 = static_cast<double>(n2);
  const double pooled = static_cast<double>(k1 + k2) / (d1 + d2);
  if (pooled <= 0.0 || pooled >= 1.0) return r;
  const double se = std::sqrt(pooled * (1 - pooled) * (1 / d1 + 1 / d2));
  r.statistic = (static_cast<double>(k1) / d1 - static_cast<double>(k2) / d2) / se;
  r.p_value = clip01(2.0 * normal_sf(std::abs(r.statistic)));
  return r;
}

std::string stars(double p) {
  if (p <= 0.001) return "***";
  if (p <= 0.01) return "**";
  if (p <= 0.05) return "*";
  return "NS";
}

std::vector<double> unit_scores(const AnalyticalSample& sample, AnalysisUnit unit) {
  std::vector<double> out;
  if (unit == AnalysisUnit::Tweet) {
    for (const auto& t : sample.tweets) out.push_back(t.score);
  } else {
    for (const auto& [_, s] : sample.accounts) out.push_back(s);
  }
  return out;
}

std::vector<ThresholdReport> threshold_sweep(std::span<const AnalyticalSample> samples,
                                             std::span<const double> thresholds,
                                             AnalysisUnit unit) {
  for (double t : thresholds) {
    if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("thresholds must lie in [0, 1]");
  }
  std::vector<std::vector<double>> scores;
  for (const auto& s : samples) scores.push_back(unit_scores(s, unit));
  std::vector<ThresholdReport> out;
  for (double t : thresholds) {
    ThresholdReport rep;
    rep.threshold = t;
    for (std::size_t g = 0; g < samples.size(); ++g) {
      GroupProportion gp;
      gp.group = samples[g].group_name;
      gp.total = static_cast<std::int64_t>(scores[g].size());
      gp.above = std::count_if(scores[g].begin(), scores[g].end(), [t](double v) { return v > t; });
      gp.proportion = gp.total ? static_cast<double>(gp.above) / static_cast<double>(gp.total) : 0.0;
      rep.proportions.push_back(gp);
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
      for (std::size_t j = i + 1; j < samples.size(); ++j) {
        const auto& a = rep.proportions[i];
        const auto& b = rep.proportions[j];
        if (a.total == 0 || b.total == 0) continue;
        PairwiseTest pt{a.group, b.group, two_proportion_z(a.above, a.total, b.above, b.total), ""};
        pt.stars = stars(pt.test.p_value);
        rep.pairwise.push_back(std::move(pt));
      }
    }
    out.push_back(std::move(rep));
  }
  return out;
}

std::vector<ThresholdMetrics> threshold_validation(std::span<const LabeledScore> labeled,
                                                   std::span<const double> thresholds) {
  const bool has_bot = std::any_of(labeled.begin(), labeled.end(),
                                   [](const LabeledScore& s) { return s.label == Label::Bot; });
  const bool has_human = std::any_of(labeled.begin(), labeled.end(),
                                     [](const LabeledScore& s) { return s.label == Label::Human; });
  if (!has_bot || !has_human) throw ValidationError("threshold validation needs both labels");
  std::vector<ThresholdMetrics> out;
  for (double t : thresholds) {
    ThresholdMetrics m;
    m.threshold = t;
    for (const auto& s : labeled) {
      const bool predicted = s.score > t;
      if (s.label == Label::Bot) {
        (predicted ? m.true_pos : m.false_neg) += 1;
      } else {
        (predicted ? m.false_pos : m.true_neg) += 1;
      }
    }
    const auto total = static_cast<double>(labeled.size());
    m.accuracy = static_cast<double>(m.true_pos + m.true_neg) / total;
    m.recall = static_cast<double>(m.true_pos) / static_cast<double>(m.true_pos + m.false_neg);
    if (m.true_pos + m.false_pos == 0) {
      m.degenerate = true;
    } else {
      m.precision = static_cast<double>(m.true_pos) / static_cast<double>(m.true_pos + m.false_pos);
      if (m.precision + m.recall > 0) {
        m.f1 = 2 * m.precision * m.recall / (m.precision + m.recall);
      }
    }
    out.push_back(m);
  }
  return out;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.n = values.size();
  if (values.empty()) return s;
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  s.min = v.front();
  s.max = v.back();
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  double sum = 0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  return s;
}

std::vector<std::int64_t> histogram(std::span<const double> values, int bins) {
  if (bins < 1) throw ValidationError("histogram needs at least one bin");
  std::vector<std::int64_t> out(static_cast<std::size_t>(bins), 0);
  for (double x : values) {
    const auto b = static_cast<int>(std::floor(std::clamp(x, 0.0, 1.0) * bins));
    out[static_cast<std::size_t>(std::min(b, bins - 1))] += 1;
  }
  return out;
}

json to_json(const TestResult& r) {
  json j = {{"statistic_name", r.statistic_name},
            {"statistic", r.statistic},
            {"p_value", r.p_value},
            {"method", to_string(r.method)},
            {"n1", r.n1},
            {"n2", r.n2}};
  if (r.statistic_name == "z") {
    j["k1"] = r.k1;
    j["k2"] = r.k2;
  }
  return j;
}

json to_json(const ThresholdReport& r) {
  json props = json::array();
  for (const auto& p : r.proportions) {
    props.push_back({{"group", p.group}, {"above", p.above}, {"total", p.total},
                     {"proportion", p.proportion}});
  }
  json pairs = json::array();
  for (const auto& p : r.pairwise) {
    pairs.push_back({{"group_a", p.group_a}, {"group_b", p.group_b},
                     {"test", to_json(p.test)}, {"stars", p.stars}});
  }
  return {{"threshold", r.threshold}, {"proportions", props}, {"pairwise", pairs}};
}

json to_json(const ThresholdMetrics& m) {
  return {{"threshold", m.threshold}, {"true_pos", m.true_pos},   {"false_pos", m.false_pos},
          {"true_neg", m.true_neg},   {"false_neg", m.false_neg}, {"accuracy", m.accuracy},
          {"precision", m.precision}, {"recall", m.recall},       {"f1", m.f1},
          {"degenerate", m.degenerate}};
}

json case_study_json(std::span<const AnalyticalSample> samples,
                     std::span<const double> thresholds, AnalysisUnit unit, int bins) {
  json groups = json::array();
  for (const auto& s : samples) {
    const auto scores = unit_scores(s, unit);
    const Summary sum = summarize(scores);
    groups.push_back({{"group", s.group_name},
                      {"raw_tweets", s.raw_tweets},
                      {"raw_accounts", s.raw_accounts},
                      {"sample_tweets", s.tweets.size()},
                      {"sample_accounts", s.accounts.size()},
                      {"language_filter", s.language_filter ? json(*s.language_filter) : json()},
                      {"histogram", histogram(scores, bins)},
                      {"summary",
                       {{"n", sum.n}, {"min", sum.min}, {"q1", sum.q1}, {"median", sum.median},
                        {"q3", sum.q3}, {"max", sum.max}, {"mean", sum.mean}}}});
  }
  json mwu = json::array();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      const auto a = unit_scores(samples[i], unit);
      const auto b = unit_scores(samples[j], unit);
      if (a.empty() || b.empty()) continue;
      const TestResult r = mann_whitney_u(a, b);
      mwu.push_back({{"group_a", samples[i].group_name}, {"group_b", samples[j].group_name},
                     {"test", to_json(r)}, {"stars", stars(r.p_value)}});
    }
  }
  json sweeps = json::array();
  for (const auto& r : threshold_sweep(samples, thresholds, unit)) sweeps.push_back(to_json(r));
  return {{"unit", unit == AnalysisUnit::Tweet ? "tweet" : "account"},
          {"histogram_bins", bins},
          {"groups", groups},
          {"mann_whitney", mwu},
          {"thresholds", sweeps}};
}

SeriesStore::SeriesStore(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.empty() || !std::filesystem::exists(path_)) return;
  std::ifstream in(path_);
  if (!in) throw IoError("cannot open " + path_.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      data_[j.at("user_id").get<std::string>()].push_back(
          {parse_timestamp(j.at("probe_time").get<std::string>()),
           j.at("raw_score").get<double>(), j.at("model_version").get<std::string>()});
    } catch (const json::exception& e) {
      throw ValidationError(path_.string() + " line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(path_.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

ScoreSeries SeriesStore::record(const std::string& user_id, Timestamp probe_time,
                                double raw_score, const std::string& model_version) {
  if (user_id.empty()) throw ValidationError("user_id must not be empty");
  if (!(raw_score >= 0.0 && raw_score <= 1.0)) throw ValidationError("raw score outside [0, 1]");
  std::lock_guard lock(mu_);
  auto& points = data_[user_id];
  const ScorePoint p{probe_time, raw_score, model_version};
  if (!points.empty()) {
    if (points.back() == p) return {user_id, points};
    if (probe_time <= points.back().probe_time) {
      throw ValidationError("probe_time " + format_timestamp(probe_time) +
                            " is not after the last probe of " + user_id);
    }
  }
  if (!path_.empty()) {
    std::ofstream out(path_, std::ios::app);
    if (!out) throw IoError("cannot write " + path_.string());
    out << json{{"user_id", user_id},
                {"probe_time", format_timestamp(probe_time)},
                {"raw_score", raw_score},
                {"model_version", model_version}}
               .dump()
        << '\n';
  }
  points.push_back(p);
  return {user_id, points};
}

ScoreSeries SeriesStore::series(const std::string& user_id) const {
  std::lock_guard lock(mu_);
  auto it = data_.find(user_id);
  return {user_id, it == data_.end() ? std::vector<ScorePoint>{} : it->second};
}

std::vector<std::string> SeriesStore::users() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [uid, _] : data_) out.push_back(uid);
  return out;
}

ScoreSeries record_probe(SeriesStore& store, const std::string& user_id, Timestamp probe_time,
                         double raw_score, const std::string& model_version) {
  return store.record(user_id, probe_time, raw_score, model_version);
}

}  // namespace botlab
