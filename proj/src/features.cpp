#include "botlab/features.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "botlab/error.hpp"
#include "botlab/lexicon.hpp"

namespace botlab {
namespace {

enum Feature : std::size_t {
  // user_profile
  kScreenNameLength,
  kScreenNameDigits,
  kDisplayNameLength,
  kDescriptionLength,
  kAccountAgeDays,
  kFollowersCount,
  kFriendsCount,
  kStatusesCount,
  kListedCount,
  kFavouritesCount,
  kFollowerFriendRatio,
  kTweetsPerDay,
  kFollowersPerDay,
  kFavouritesPerDay,
  kVerified,
  kDefaultProfile,
  kDefaultProfileImage,
  kProfileUseBackgroundImage,
  kProfileEnd,
  // friends
  kUniqueMentionedUsers = kProfileEnd,
  kUniqueRetweetedUsers,
  kMentionTargetEntropy,
  // network
  kRetweetFraction,
  kReplyFraction,
  kSelfReplyFraction,
  kInterlocutorDiversity,
  kMentionsReceived,
  kUniqueMentioners,
  // temporal
  kIntervalMean,
  kIntervalStd,
  kIntervalMin,
  kBurstiness,
  kHourEntropy,
  kTimelineTooShort,
  kTimelineTweetsPerDay,
  // content_language
  kWordsPerTweet,
  kCharsPerTweet,
  kHashtagsPerTweet,
  kUrlsPerTweet,
  kMentionsPerTweet,
  kDuplicateTextFraction,
  kNounsPerTweet,
  kVerbsPerTweet,
  kAdjectivesPerTweet,
  // sentiment
  kValenceMean,
  kValenceStd,
  kFeatureCount,
};

struct BaseFeature {
  Feature id;
  const char* name;
  FeatureClass cls;
  const char* definition;
};

using FC = FeatureClass;

// n = number of timeline tweets; age = (probe_time - created_at) in days.
constexpr BaseFeature kBase[] = {
    {kScreenNameLength, "screen_name_length", FC::UserProfile,
     "number of characters in screen_name"},
    {kScreenNameDigits, "screen_name_digits", FC::UserProfile,
     "number of decimal digits in screen_name"},
    {kDisplayNameLength, "display_name_length", FC::UserProfile,
     "number of characters in display_name"},
    {kDescriptionLength, "description_length", FC::UserProfile,
     "number of characters in the profile description"},
    {kAccountAgeDays, "account_age_days", FC::UserProfile,
     "(probe_time - created_at) in days, fractional"},
    {kFollowersCount, "followers_count", FC::UserProfile, "followers_count"},
    {kFriendsCount, "friends_count", FC::UserProfile, "friends_count"},
    {kStatusesCount, "statuses_count", FC::UserProfile, "statuses_count"},
    {kListedCount, "listed_count", FC::UserProfile, "listed_count"},
    {kFavouritesCount, "favourites_count", FC::UserProfile, "favourites_count"},
    {kFollowerFriendRatio, "follower_friend_ratio", FC::UserProfile,
     "followers_count / (friends_count + 1)"},
    {kTweetsPerDay, "tweets_per_day", FC::UserProfile,
     "statuses_count / (account_age_days + 1)"},
    {kFollowersPerDay, "followers_per_day", FC::UserProfile,
     "followers_count / (account_age_days + 1)"},
    {kFavouritesPerDay, "favourites_per_day", FC::UserProfile,
     "favourites_count / (account_age_days + 1)"},
    {kVerified, "verified", FC::UserProfile, "1 if verified else 0"},
    {kDefaultProfile, "default_profile", FC::UserProfile,
     "1 if the profile theme is the default else 0"},
    {kDefaultProfileImage, "default_profile_image", FC::UserProfile,
     "1 if the default profile picture is used else 0"},
    {kProfileUseBackgroundImage, "profile_use_background_image", FC::UserProfile,
     "1 if a background image is used else 0"},

    {kUniqueMentionedUsers, "unique_mentioned_users", FC::Friends,
     "distinct user ids mentioned across timeline tweets"},
    {kUniqueRetweetedUsers, "unique_retweeted_users", FC::Friends,
     "distinct retweeted_user_id values across timeline tweets"},
    {kMentionTargetEntropy, "mention_target_entropy", FC::Friends,
     "Shannon entropy (bits) of mention targets over all timeline mentions; 0 "
     "when there are none"},

    {kRetweetFraction, "retweet_fraction", FC::Network,
     "retweets / n; 0 when n = 0"},
    {kReplyFraction, "reply_fraction", FC::Network, "replies / n; 0 when n = 0"},
    {kSelfReplyFraction, "self_reply_fraction", FC::Network,
     "replies to the account itself / replies; 0 when there are no replies"},
    {kInterlocutorDiversity, "interlocutor_diversity", FC::Network,
     "distinct other accounts mentioned, retweeted or replied to / total such "
     "interactions; 0 when there are none"},
    {kMentionsReceived, "mentions_received", FC::Network,
     "number of tweets by others mentioning the account"},
    {kUniqueMentioners, "unique_mentioners", FC::Network,
     "distinct authors of tweets mentioning the account"},

    {kIntervalMean, "interval_mean_s", FC::Temporal,
     "mean seconds between consecutive timeline tweets; 0 when n < 2"},
    {kIntervalStd, "interval_std_s", FC::Temporal,
     "population standard deviation of inter-tweet seconds; 0 when n < 2"},
    {kIntervalMin, "interval_min_s", FC::Temporal,
     "smallest inter-tweet gap in seconds; 0 when n < 2"},
    {kBurstiness, "burstiness", FC::Temporal,
     "(std - mean) / (std + mean) of inter-tweet seconds; 0 when n < 2 or "
     "std + mean = 0"},
    {kHourEntropy, "hour_entropy", FC::Temporal,
     "Shannon entropy (bits) of tweet hour-of-day over 24 UTC bins; 0 when n = 0"},
    {kTimelineTooShort, "timeline_too_short", FC::Temporal,
     "1 if n < 2 (interval statistics imputed) else 0"},
    {kTimelineTweetsPerDay, "timeline_tweets_per_day", FC::Temporal,
     "n / (days between oldest and newest timeline tweet + 1); 0 when n = 0"},

    {kWordsPerTweet, "words_per_tweet", FC::ContentLanguage,
     "mean whitespace-separated tokens per tweet text; 0 when n = 0"},
    {kCharsPerTweet, "chars_per_tweet", FC::ContentLanguage,
     "mean Unicode code points per tweet text; 0 when n = 0"},
    {kHashtagsPerTweet, "hashtags_per_tweet", FC::ContentLanguage,
     "mean hashtag entities per tweet; 0 when n = 0"},
    {kUrlsPerTweet, "urls_per_tweet", FC::ContentLanguage,
     "mean url entities per tweet; 0 when n = 0"},
    {kMentionsPerTweet, "mentions_per_tweet", FC::ContentLanguage,
     "mean user-mention entities per tweet; 0 when n = 0"},
    {kDuplicateTextFraction, "duplicate_text_fraction", FC::ContentLanguage,
     "1 - distinct texts / n; 0 when n = 0"},
    {kNounsPerTweet, "nouns_per_tweet", FC::ContentLanguage,
     "mean lexicon nouns per tweet; 0 when n = 0"},
    {kVerbsPerTweet, "verbs_per_tweet", FC::ContentLanguage,
     "mean lexicon verbs per tweet; 0 when n = 0"},
    {kAdjectivesPerTweet, "adjectives_per_tweet", FC::ContentLanguage,
     "mean lexicon adjectives per tweet; 0 when n = 0"},

    {kValenceMean, "valence_mean", FC::Sentiment,
     "mean over tweets of the average lexicon valence of the tweet's words "
     "(0 for a tweet without lexicon words); 0 when n = 0"},
    {kValenceStd, "valence_std", FC::Sentiment,
     "population standard deviation of per-tweet valence; 0 when n = 0"},
};

static_assert(std::size(kBase) == kFeatureCount);

using Values = std::array<double, kFeatureCount>;

bool is_language_dependent(FeatureClass c) {
  return c == FeatureClass::ContentLanguage || c == FeatureClass::Sentiment;
}

std::size_t utf8_length(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) {
    return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  }));
}

template <typename Map>
double entropy_bits(const Map& counts, double total) {
  if (total <= 0) return 0.0;
  double h = 0.0;
  for (const auto& [_, c] : counts) {
    if (c == 0) continue;
    const double p = c / total;
    h -= p * std::log2(p);
  }
  return h;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(std::span<const double> xs) {
  if (xs.empty()) return {};
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size()))};
}

void compute_profile(const UserObject& u, Timestamp probe, Values& v) {
  const double age =
      static_cast<double>(probe.seconds - u.created_at.seconds) / kSecondsPerDay;
  v[kScreenNameLength] = static_cast<double>(utf8_length(u.screen_name));
  v[kScreenNameDigits] = static_cast<double>(std::count_if(
      u.screen_name.begin(), u.screen_name.end(),
      [](char c) { return c >= '0' && c <= '9'; }));
  v[kDisplayNameLength] = static_cast<double>(utf8_length(u.display_name));
  v[kDescriptionLength] = static_cast<double>(utf8_length(u.description));
  v[kAccountAgeDays] = age;
  v[kFollowersCount] = static_cast<double>(u.followers_count);
  v[kFriendsCount] = static_cast<double>(u.friends_count);
  v[kStatusesCount] = static_cast<double>(u.statuses_count);
  v[kListedCount] = static_cast<double>(u.listed_count);
  v[kFavouritesCount] = static_cast<double>(u.favourites_count);
  v[kFollowerFriendRatio] = static_cast<double>(u.followers_count) /
                            static_cast<double>(u.friends_count + 1);
  v[kTweetsPerDay] = static_cast<double>(u.statuses_count) / (age + 1.0);
  v[kFollowersPerDay] = static_cast<double>(u.followers_count) / (age + 1.0);
  v[kFavouritesPerDay] = static_cast<double>(u.favourites_count) / (age + 1.0);
  v[kVerified] = u.verified ? 1.0 : 0.0;
  v[kDefaultProfile] = u.default_profile ? 1.0 : 0.0;
  v[kDefaultProfileImage] = u.default_profile_image ? 1.0 : 0.0;
  v[kProfileUseBackgroundImage] = u.profile_use_background_image ? 1.0 : 0.0;
}

void compute_interactions(const AccountPayload& p, Values& v) {
  const auto& self = p.user.user_id;
  const auto& tl = p.timeline;
  const double n = static_cast<double>(tl.size());

  std::map<std::string, double> mention_counts;
  std::set<std::string> retweeted, interlocutors, mentioners;
  double mentions_total = 0, retweets = 0, replies = 0, self_replies = 0,
         interactions = 0;
  for (const auto& t : tl) {
    for (const auto& m : t.mentioned_user_ids) {
      mention_counts[m] += 1;
      mentions_total += 1;
      if (m != self) {
        interlocutors.insert(m);
        interactions += 1;
      }
    }
    if (t.is_retweet) {
      retweets += 1;
      if (t.retweeted_user_id) {
        retweeted.insert(*t.retweeted_user_id);
        if (*t.retweeted_user_id != self) {
          interlocutors.insert(*t.retweeted_user_id);
          interactions += 1;
        }
      }
    }
    if (t.is_reply) {
      replies += 1;
      if (t.replied_user_id && *t.replied_user_id == self) {
        self_replies += 1;
      } else if (t.replied_user_id) {
        interlocutors.insert(*t.replied_user_id);
        interactions += 1;
      }
    }
  }
  for (const auto& t : p.mentions) mentioners.insert(t.author.user_id);

  v[kUniqueMentionedUsers] = static_cast<double>(mention_counts.size());
  v[kUniqueRetweetedUsers] = static_cast<double>(retweeted.size());
  v[kMentionTargetEntropy] = entropy_bits(mention_counts, mentions_total);
  v[kRetweetFraction] = n > 0 ? retweets / n : 0.0;
  v[kReplyFraction] = n > 0 ? replies / n : 0.0;
  v[kSelfReplyFraction] = replies > 0 ? self_replies / replies : 0.0;
  v[kInterlocutorDiversity] =
      interactions > 0 ? static_cast<double>(interlocutors.size()) / interactions
                       : 0.0;
  v[kMentionsReceived] = static_cast<double>(p.mentions.size());
  v[kUniqueMentioners] = static_cast<double>(mentioners.size());
}

void compute_temporal(const AccountPayload& p, Values& v) {
  const auto& tl = p.timeline;
  std::vector<double> gaps;
  for (std::size_t i = 1; i < tl.size(); ++i) {
    gaps.push_back(static_cast<double>(
        std::llabs(tl[i - 1].created_at.seconds - tl[i].created_at.seconds)));
  }
  const MeanStd ms = mean_std(gaps);
  v[kIntervalMean] = ms.mean;
  v[kIntervalStd] = ms.std;
  v[kIntervalMin] = gaps.empty() ? 0.0 : *std::min_element(gaps.begin(), gaps.end());
  v[kBurstiness] = ms.std + ms.mean > 0 ? (ms.std - ms.mean) / (ms.std + ms.mean) : 0.0;
  std::array<double, 24> hours{};
  for (const auto& t : tl) hours[static_cast<std::size_t>(utc_hour(t.created_at))] += 1;
  std::map<int, double> hour_counts;
  for (int h = 0; h < 24; ++h) hour_counts[h] = hours[static_cast<std::size_t>(h)];
  v[kHourEntropy] = entropy_bits(hour_counts, static_cast<double>(tl.size()));
  v[kTimelineTooShort] = tl.size() < 2 ? 1.0 : 0.0;
  if (tl.empty()) {
    v[kTimelineTweetsPerDay] = 0.0;
  } else {
    auto [lo, hi] = std::minmax_element(
        tl.begin(), tl.end(),
        [](const TweetRecord& a, const TweetRecord& b) { return a.created_at < b.created_at; });
    const double span =
        static_cast<double>(hi->created_at.seconds - lo->created_at.seconds) / kSecondsPerDay;
    v[kTimelineTweetsPerDay] = static_cast<double>(tl.size()) / (span + 1.0);
  }
}

// Only this function reads tweet text.
void compute_content(const AccountPayload& p, Values& v) {
  const auto& tl = p.timeline;
  const double n = static_cast<double>(tl.size());
  double words = 0, chars = 0, hashtags = 0, urls = 0, mentions = 0, nouns = 0,
         verbs = 0, adjectives = 0;
  std::set<std::string_view> distinct;
  std::vector<double> valences;
  for (const auto& t : tl) {
    distinct.insert(t.text);
    chars += static_cast<double>(utf8_length(t.text));
    hashtags += static_cast<double>(t.hashtags.size());
    urls += static_cast<double>(t.urls.size());
    mentions += static_cast<double>(t.mentioned_user_ids.size());
    double val_sum = 0, val_n = 0;
    std::istringstream ss(t.text);
    std::string token;
    while (ss >> token) {
      words += 1;
      const std::string w = lexicon::normalize_token(token);
      if (w.empty()) continue;
      if (auto pos = lexicon::part_of_speech(w)) {
        switch (*pos) {
          case lexicon::PartOfSpeech::Noun: nouns += 1; break;
          case lexicon::PartOfSpeech::Verb: verbs += 1; break;
          case lexicon::PartOfSpeech::Adjective: adjectives += 1; break;
        }
      }
      if (auto val = lexicon::valence(w)) {
        val_sum += *val;
        val_n += 1;
      }
    }
    valences.push_back(val_n > 0 ? val_sum / val_n : 0.0);
  }
  auto per_tweet = [n](double total) { return n > 0 ? total / n : 0.0; };
  v[kWordsPerTweet] = per_tweet(words);
  v[kCharsPerTweet] = per_tweet(chars);
  v[kHashtagsPerTweet] = per_tweet(hashtags);
  v[kUrlsPerTweet] = per_tweet(urls);
  v[kMentionsPerTweet] = per_tweet(mentions);
  v[kDuplicateTextFraction] =
      n > 0 ? 1.0 - static_cast<double>(distinct.size()) / n : 0.0;
  v[kNounsPerTweet] = per_tweet(nouns);
  v[kVerbsPerTweet] = per_tweet(verbs);
  v[kAdjectivesPerTweet] = per_tweet(adjectives);
  const MeanStd ms = mean_std(valences);
  v[kValenceMean] = ms.mean;
  v[kValenceStd] = ms.std;
}

void check_version(const FeatureRegistry& registry) {
  const std::string_view v = registry.version;
  if (v != kRegistryVersion &&
      !(v.starts_with(kRegistryVersion) && v.size() > kRegistryVersion.size() &&
        v[kRegistryVersion.size()] == '/')) {
    throw VersionMismatch("registry version '" + registry.version +
                          "' is not supported by extractor " +
                          std::string(kRegistryVersion));
  }
}

std::vector<Feature> resolve(const FeatureRegistry& registry) {
  static const auto by_name = [] {
    std::unordered_map<std::string_view, Feature> m;
    for (const auto& b : kBase) m.emplace(b.name, b.id);
    return m;
  }();
  check_version(registry);
  std::vector<Feature> ids;
  ids.reserve(registry.size());
  for (const auto& f : registry.features) {
    auto it = by_name.find(f.name);
    if (it == by_name.end()) {
      throw VersionMismatch("feature '" + f.name + "' unknown to extractor " +
                            std::string(kRegistryVersion));
    }
    ids.push_back(it->second);
  }
  return ids;
}

FeatureVector gather(const Values& v, std::span<const Feature> ids,
                     const std::string& version) {
  FeatureVector out;
  out.registry_version = version;
  out.values.reserve(ids.size());
  for (Feature id : ids) {
    const double x = v[id];
    out.values.push_back(std::isfinite(x) ? x : 0.0);
  }
  return out;
}

FeatureRegistry subset(const FeatureRegistry& r, const std::string& suffix,
                       bool (*keep)(const FeatureSpec&)) {
  const std::string tag = "/" + suffix;
  if (r.version.ends_with(tag)) return r;
  FeatureRegistry out;
  out.version = r.version + tag;
  for (const auto& f : r.features) {
    if (keep(f)) out.features.push_back(f);
  }
  return out;
}

}  // namespace

std::string_view to_string(FeatureClass cls) {
  switch (cls) {
    case FeatureClass::UserProfile: return "user_profile";
    case FeatureClass::Friends: return "friends";
    case FeatureClass::Network: return "network";
    case FeatureClass::Temporal: return "temporal";
    case FeatureClass::ContentLanguage: return "content_language";
    case FeatureClass::Sentiment: return "sentiment";
  }
  return "user_profile";
}

std::size_t FeatureRegistry::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].name == name) return i;
  }
  return features.size();
}

const FeatureRegistry& default_registry() {
  static const FeatureRegistry registry = [] {
    FeatureRegistry r;
    r.version = std::string(kRegistryVersion);
    for (const auto& b : kBase) {
      r.features.push_back({b.name, b.cls, is_language_dependent(b.cls),
                            b.cls == FeatureClass::UserProfile, b.definition});
    }
    return r;
  }();
  return registry;
}

void validate_registry(const FeatureRegistry& registry) {
  std::set<std::string> names;
  for (const auto& f : registry.features) {
    if (!names.insert(f.name).second) {
      throw ValidationError("duplicate feature name '" + f.name + "'");
    }
    if (f.lite_eligible && f.feature_class != FeatureClass::UserProfile) {
      throw ValidationError("lite feature '" + f.name + "' is not user-profile metadata");
    }
    if (f.language_dependent != is_language_dependent(f.feature_class)) {
      throw ValidationError("feature '" + f.name + "' has an inconsistent language flag");
    }
  }
}

FeatureRegistry language_independent(const FeatureRegistry& registry) {
  return subset(registry, "universal",
                [](const FeatureSpec& f) { return !f.language_dependent; });
}

FeatureRegistry lite_subset(const FeatureRegistry& registry) {
  return subset(registry, "lite", [](const FeatureSpec& f) { return f.lite_eligible; });
}

std::vector<std::size_t> projection_indices(const FeatureRegistry& from,
                                            const FeatureRegistry& to) {
  std::vector<std::size_t> idx;
  idx.reserve(to.size());
  for (const auto& f : to.features) {
    const std::size_t i = from.index_of(f.name);
    if (i == from.size()) {
      throw VersionMismatch("feature '" + f.name + "' missing from registry " +
                            from.version);
    }
    idx.push_back(i);
  }
  return idx;
}

FeatureVector project(const FeatureVector& v, std::span<const std::size_t> indices,
                      const std::string& target_version) {
  FeatureVector out;
  out.registry_version = target_version;
  out.values.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= v.values.size()) throw VersionMismatch("projection index out of range");
    out.values.push_back(v.values[i]);
  }
  return out;
}

FeatureVector extract_full(const AccountPayload& payload,
                           const FeatureRegistry& registry) {
  const auto ids = resolve(registry);
  Values v{};
  compute_profile(payload.user, payload.probe_time, v);
  compute_interactions(payload, v);
  compute_temporal(payload, v);
  compute_content(payload, v);
  return gather(v, ids, registry.version);
}

FeatureVector extract_lite(const UserObject& user, Timestamp probe_time,
                           const FeatureRegistry& registry) {
  if (probe_time < user.created_at) {
    throw ValidationError("probe_time " + format_timestamp(probe_time) +
                          " precedes created_at of user " + user.user_id);
  }
  const FeatureRegistry lite = lite_subset(registry);
  const auto ids = resolve(lite);
  for (Feature id : ids) {
    if (id >= kProfileEnd) {
      throw ValidationError("lite registry contains non-metadata feature '" +
                            std::string(kBase[id].name) + "'");
    }
  }
  Values v{};
  compute_profile(user, probe_time, v);
  return gather(v, ids, lite.version);
}

json to_json(const FeatureRegistry& registry) {
  json features = json::array();
  for (const auto& f : registry.features) {
    features.push_back({{"name", f.name},
                        {"class", to_string(f.feature_class)},
                        {"language_dependent", f.language_dependent},
                        {"lite_eligible", f.lite_eligible},
                        {"definition", f.definition}});
  }
  return {{"version", registry.version}, {"features", std::move(features)}};
}

}  // namespace botlab
