#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "botlab/corpus.hpp"

namespace botlab {

enum class Archetype { Human, Spammer, FakeFollower, SelfDeclared, Astroturf };

inline constexpr Archetype kAllArchetypes[] = {
    Archetype::Human, Archetype::Spammer, Archetype::FakeFollower,
    Archetype::SelfDeclared, Archetype::Astroturf};

std::string_view to_string(Archetype a);
Archetype parse_archetype(std::string_view text);
Label label_of(Archetype a);
/// Bot class of a bot archetype; nullopt for humans.
std::optional<BotClass> bot_class_of(Archetype a);

/// Generative parameters of one archetype. Every field is a real number so
/// that "gray" accounts can interpolate between two archetypes.
struct ArchetypeParams {
  double age_days_min = 0, age_days_max = 0;
  double followers_log_mean = 0, followers_log_sd = 0;
  double friends_log_mean = 0, friends_log_sd = 0;
  double tweets_per_day_log_mean = 0, tweets_per_day_log_sd = 0;
  double favourites_per_day_log_mean = 0, favourites_per_day_log_sd = 0;
  double listed_log_mean = 0, listed_log_sd = 0;
  double p_verified = 0, p_default_profile = 0, p_default_image = 0, p_background = 0;
  double description_words_min = 0, description_words_max = 0;
  double p_empty_description = 0, p_bot_in_description = 0;
  double screen_name_length_min = 6, screen_name_length_max = 12;
  double screen_name_digits_min = 0, screen_name_digits_max = 0;
  double timeline_min = 0, timeline_max = 0;
  /// Coefficient of variation of inter-tweet gaps (0 = periodic).
  double interval_cv = 1;
  /// Probability that a tweet landing in 01:00-07:00 UTC is moved before 01:00.
  double circadian = 0;
  double p_retweet = 0, p_reply = 0, p_self_reply = 0;
  double mention_pool = 1, mentions_per_tweet = 0;
  double retweet_pool = 1;
  /// Fraction of retweets drawn from the shared campaign pool.
  double p_campaign_retweet = 0;
  double hashtags_per_tweet = 0, urls_per_tweet = 0;
  double words_min = 3, words_max = 10;
  double p_duplicate_text = 0, template_pool = 1;
  double valence_word_rate = 0, positivity = 0.5;
  double mentions_received_min = 0, mentions_received_max = 0;
  double p_english = 1;

  bool operator==(const ArchetypeParams&) const = default;
};

struct SynthConfig {
  std::string version;
  std::map<Archetype, ArchetypeParams> archetypes;

  bool operator==(const SynthConfig&) const = default;
};

/// Built-in archetype parameters; config/synth_v1.json is a dump of these.
const SynthConfig& default_synth_config();
json to_json(const SynthConfig& config);
SynthConfig synth_config_from_json(const json& j);
SynthConfig load_synth_config(const std::filesystem::path& path);

struct SynthSpec {
  std::string name = "synthetic";
  std::map<Archetype, std::int64_t> counts;
  /// Fraction of accounts whose parameters are blended towards another
  /// archetype (humans towards a bot archetype, bots towards human).
  double gray_fraction = 0.0;
  Timestamp probe_time = from_civil(2021, 11, 1);
  SynthConfig config = default_synth_config();
};

/// Pure function of (spec, seed). Account i draws from derive_seed(seed, i).
LabeledDataset synthesize_corpus(const SynthSpec& spec, std::uint64_t seed);

/// One synthetic account, exposed for tests and fixtures.
AccountPayload synthesize_account(const ArchetypeParams& params,
                                  const std::string& user_id, Timestamp probe_time,
                                  std::uint64_t seed);

/// Counts describing one cashtag group of the case study.
struct CashtagGroupSpec {
  std::string cashtag;
  std::int64_t raw_tweets = 0;
  std::int64_t raw_accounts = 0;
  std::int64_t sample_tweets = 0;    // tweets by accounts in the sample language
  std::int64_t sample_accounts = 0;  // accounts in the sample language
  /// Archetype mix of the group's authors (weights, normalized internally).
  std::map<Archetype, double> mix;
};

struct CaseStudySpec {
  std::vector<CashtagGroupSpec> groups;
  std::string sample_language = "en";
  Timestamp collected_at = from_civil(2021, 11, 10);
  /// Timeline cap for the author payloads.
  std::int64_t timeline_cap = 30;
  double gray_fraction = 0.3;
  SynthConfig config = default_synth_config();

  /// Counts matching the SHIB / FLOKI / AAPL collection.
  static CaseStudySpec reference_counts();
  /// Same structure with every count divided by `divisor` (rounded, kept consistent).
  CaseStudySpec scaled(std::int64_t divisor) const;
};

struct CaseStudyFixture {
  /// Cashtag-tagged tweets of all groups, group by group.
  std::vector<TweetRecord> tweets;
  /// One scoring payload per distinct author (empty unless requested).
  std::vector<AccountPayload> author_payloads;
};

CaseStudyFixture synthesize_case_study(const CaseStudySpec& spec, std::uint64_t seed,
                                       bool with_payloads);

}  // namespace botlab
