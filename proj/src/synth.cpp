#include "botlab/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "botlab/error.hpp"
#include "botlab/lexicon.hpp"
#include "botlab/rng.hpp"

namespace botlab {
namespace {

struct ParamField {
  const char* name;
  double ArchetypeParams::*member;
};

#define BOTLAB_FIELD(f) ParamField{#f, &ArchetypeParams::f}
constexpr ParamField kParamFields[] = {
    BOTLAB_FIELD(age_days_min),
    BOTLAB_FIELD(age_days_max),
    BOTLAB_FIELD(followers_log_mean),
    BOTLAB_FIELD(followers_log_sd),
    BOTLAB_FIELD(friends_log_mean),
    BOTLAB_FIELD(friends_log_sd),
    BOTLAB_FIELD(tweets_per_day_log_mean),
    BOTLAB_FIELD(tweets_per_day_log_sd),
    BOTLAB_FIELD(favourites_per_day_log_mean),
    BOTLAB_FIELD(favourites_per_day_log_sd),
    BOTLAB_FIELD(listed_log_mean),
    BOTLAB_FIELD(listed_log_sd),
    BOTLAB_FIELD(p_verified),
    BOTLAB_FIELD(p_default_profile),
    BOTLAB_FIELD(p_default_image),
    BOTLAB_FIELD(p_background),
    BOTLAB_FIELD(description_words_min),
    BOTLAB_FIELD(description_words_max),
    BOTLAB_FIELD(p_empty_description),
    BOTLAB_FIELD(p_bot_in_description),
    BOTLAB_FIELD(screen_name_length_min),
    BOTLAB_FIELD(screen_name_length_max),
    BOTLAB_FIELD(screen_name_digits_min),
    BOTLAB_FIELD(screen_name_digits_max),
    BOTLAB_FIELD(timeline_min),
    BOTLAB_FIELD(timeline_max),
    BOTLAB_FIELD(interval_cv),
    BOTLAB_FIELD(circadian),
    BOTLAB_FIELD(p_retweet),
    BOTLAB_FIELD(p_reply),
    BOTLAB_FIELD(p_self_reply),
    BOTLAB_FIELD(mention_pool),
    BOTLAB_FIELD(mentions_per_tweet),
    BOTLAB_FIELD(retweet_pool),
    BOTLAB_FIELD(p_campaign_retweet),
    BOTLAB_FIELD(hashtags_per_tweet),
    BOTLAB_FIELD(urls_per_tweet),
    BOTLAB_FIELD(words_min),
    BOTLAB_FIELD(words_max),
    BOTLAB_FIELD(p_duplicate_text),
    BOTLAB_FIELD(template_pool),
    BOTLAB_FIELD(valence_word_rate),
    BOTLAB_FIELD(positivity),
    BOTLAB_FIELD(mentions_received_min),
    BOTLAB_FIELD(mentions_received_max),
    BOTLAB_FIELD(p_english),
};
#undef BOTLAB_FIELD

ArchetypeParams blend(const ArchetypeParams& a, const ArchetypeParams& b, double t) {
  ArchetypeParams out = a;
  for (const auto& f : kParamFields) {
    out.*f.member = (1 - t) * (a.*f.member) + t * (b.*f.member);
  }
  return out;
}

constexpr std::string_view kOtherLanguages[] = {"es", "ja", "pt", "fr", "tr"};
constexpr std::string_view kHashtags[] = {"news",  "crypto", "nft",   "music", "sports",
                                          "tech",  "deals",  "win",   "free",  "giveaway",
                                          "maga",  "vote",   "covid", "art",   "love"};

std::int64_t range_int(Rng& rng, double lo, double hi) {
  return rng.between(static_cast<std::int64_t>(std::llround(lo)),
                     static_cast<std::int64_t>(std::llround(hi)));
}

// floor(mean) plus one more with probability frac(mean)
std::int64_t count_around(Rng& rng, double mean) {
  if (mean <= 0) return 0;
  const double whole = std::floor(mean);
  return static_cast<std::int64_t>(whole) + (rng.bernoulli(mean - whole) ? 1 : 0);
}

std::string random_letters(Rng& rng, std::int64_t n) {
  static constexpr std::string_view kLetters = "abcdefghijklmnopqrstuvwxyz";
  std::string s;
  for (std::int64_t i = 0; i < n; ++i) s.push_back(kLetters[rng.below(kLetters.size())]);
  return s;
}

std::string pseudo_word(Rng& rng) {
  static constexpr std::string_view kSyllables[] = {"ka", "to", "mi", "ra", "su",
                                                    "ne", "lo", "de", "ba", "chi"};
  std::string w;
  const auto n = rng.between(1, 3);
  for (std::int64_t i = 0; i < n; ++i) w += kSyllables[rng.below(std::size(kSyllables))];
  return w;
}

template <typename Span>
std::string_view pick(Rng& rng, const Span& items) {
  return items[rng.below(std::size(items))];
}

std::string make_text(Rng& rng, const ArchetypeParams& p, bool english) {
  const auto n = range_int(rng, p.words_min, p.words_max);
  std::string text;
  for (std::int64_t i = 0; i < n; ++i) {
    if (!text.empty()) text.push_back(' ');
    if (!english) {
      text += pseudo_word(rng);
      continue;
    }
    if (rng.bernoulli(p.valence_word_rate)) {
      text += rng.bernoulli(p.positivity) ? pick(rng, lexicon::positive_words())
                                          : pick(rng, lexicon::negative_words());
      continue;
    }
    const double u = rng.uniform();
    if (u < 0.25) text += pick(rng, lexicon::nouns());
    else if (u < 0.40) text += pick(rng, lexicon::verbs());
    else if (u < 0.50) text += pick(rng, lexicon::adjectives());
    else text += pick(rng, lexicon::fillers());
  }
  return text;
}

UserObject make_user(Rng& rng, const ArchetypeParams& p, const std::string& user_id,
                     Timestamp probe_time, double& tweets_per_day, bool& english,
                     std::string& language) {
  UserObject u;
  u.user_id = user_id;
  const double age_days = rng.uniform(p.age_days_min, p.age_days_max);
  u.created_at = Timestamp{probe_time.seconds -
                           static_cast<std::int64_t>(age_days * kSecondsPerDay)};
  const auto name_len = range_int(rng, p.screen_name_length_min, p.screen_name_length_max);
  const auto digits = std::min<std::int64_t>(
      range_int(rng, p.screen_name_digits_min, p.screen_name_digits_max), name_len - 1);
  u.screen_name = random_letters(rng, name_len - digits);
  for (std::int64_t i = 0; i < digits; ++i) {
    u.screen_name.push_back(static_cast<char>('0' + rng.below(10)));
  }
  u.display_name = random_letters(rng, rng.between(3, 8));
  if (rng.bernoulli(0.5)) u.display_name += " " + random_letters(rng, rng.between(3, 9));

  tweets_per_day = rng.lognormal(p.tweets_per_day_log_mean, p.tweets_per_day_log_sd);
  u.followers_count = std::llround(rng.lognormal(p.followers_log_mean, p.followers_log_sd));
  u.friends_count = std::llround(rng.lognormal(p.friends_log_mean, p.friends_log_sd));
  u.statuses_count = std::llround(tweets_per_day * age_days);
  u.listed_count = std::llround(rng.lognormal(p.listed_log_mean, p.listed_log_sd));
  u.favourites_count = std::llround(
      rng.lognormal(p.favourites_per_day_log_mean, p.favourites_per_day_log_sd) * age_days);
  u.verified = rng.bernoulli(p.p_verified);
  u.default_profile = rng.bernoulli(p.p_default_profile);
  u.default_profile_image = rng.bernoulli(p.p_default_image);
  u.profile_use_background_image = rng.bernoulli(p.p_background);

  english = rng.bernoulli(p.p_english);
  language = english ? "en" : std::string(pick(rng, kOtherLanguages));
  u.declared_language = language;
  if (!rng.bernoulli(p.p_empty_description)) {
    const auto words = range_int(rng, p.description_words_min, p.description_words_max);
    for (std::int64_t i = 0; i < words; ++i) {
      if (!u.description.empty()) u.description.push_back(' ');
      u.description += english ? std::string(pick(rng, lexicon::nouns())) : pseudo_word(rng);
    }
    if (rng.bernoulli(p.p_bot_in_description)) u.description += " automated bot account";
  }
  return u;
}

UserObject make_external_user(const std::string& id, Timestamp probe_time) {
  UserObject u;
  u.user_id = id;
  u.screen_name = id;
  u.created_at = Timestamp{probe_time.seconds - 3000 * kSecondsPerDay};
  u.followers_count = 100;
  u.friends_count = 100;
  u.statuses_count = 1000;
  return u;
}

}  // namespace

std::string_view to_string(Archetype a) {
  switch (a) {
    case Archetype::Human: return "human";
    case Archetype::Spammer: return "spammer";
    case Archetype::FakeFollower: return "fake_follower";
    case Archetype::SelfDeclared: return "self_declared";
    case Archetype::Astroturf: return "astroturf";
  }
  return "human";
}

Archetype parse_archetype(std::string_view text) {
  for (Archetype a : kAllArchetypes) {
    if (to_string(a) == text) return a;
  }
  throw ValidationError("unknown archetype '" + std::string(text) + "'");
}

Label label_of(Archetype a) { return a == Archetype::Human ? Label::Human : Label::Bot; }

std::optional<BotClass> bot_class_of(Archetype a) {
  switch (a) {
    case Archetype::Human: return std::nullopt;
    case Archetype::Spammer: return BotClass::Spammer;
    case Archetype::FakeFollower: return BotClass::FakeFollower;
    case Archetype::SelfDeclared: return BotClass::SelfDeclared;
    case Archetype::Astroturf: return BotClass::Astroturf;
  }
  return std::nullopt;
}

const SynthConfig& default_synth_config() {
  static const SynthConfig config = [] {
    SynthConfig c;
    c.version = "synth-v1";

    ArchetypeParams human;
    human.age_days_min = 200, human.age_days_max = 4000;
    human.followers_log_mean = std::log(300.0), human.followers_log_sd = 1.2;
    human.friends_log_mean = std::log(300.0), human.friends_log_sd = 1.0;
    human.tweets_per_day_log_mean = std::log(3.0), human.tweets_per_day_log_sd = 1.0;
    human.favourites_per_day_log_mean = std::log(5.0), human.favourites_per_day_log_sd = 1.0;
    human.listed_log_mean = std::log(5.0), human.listed_log_sd = 1.2;
    human.p_verified = 0.05, human.p_default_profile = 0.15;
    human.p_default_image = 0.02, human.p_background = 0.8;
    human.description_words_min = 3, human.description_words_max = 25;
    human.p_empty_description = 0.1, human.p_bot_in_description = 0.0;
    human.screen_name_length_min = 6, human.screen_name_length_max = 14;
    human.screen_name_digits_min = 0, human.screen_name_digits_max = 2;
    human.timeline_min = 40, human.timeline_max = 200;
    human.interval_cv = 2.0, human.circadian = 0.9;
    human.p_retweet = 0.3, human.p_reply = 0.3, human.p_self_reply = 0.1;
    human.mention_pool = 60, human.mentions_per_tweet = 0.6;
    human.retweet_pool = 40, human.p_campaign_retweet = 0.0;
    human.hashtags_per_tweet = 0.3, human.urls_per_tweet = 0.15;
    human.words_min = 6, human.words_max = 25;
    human.p_duplicate_text = 0.02, human.template_pool = 3;
    human.valence_word_rate = 0.1, human.positivity = 0.6;
    human.mentions_received_min = 5, human.mentions_received_max = 60;
    human.p_english = 0.9;
    c.archetypes[Archetype::Human] = human;

    ArchetypeParams spam;
    spam.age_days_min = 20, spam.age_days_max = 900;
    spam.followers_log_mean = std::log(50.0), spam.followers_log_sd = 1.0;
    spam.friends_log_mean = std::log(1500.0), spam.friends_log_sd = 0.8;
    spam.tweets_per_day_log_mean = std::log(80.0), spam.tweets_per_day_log_sd = 0.6;
    spam.favourites_per_day_log_mean = std::log(0.5), spam.favourites_per_day_log_sd = 1.0;
    spam.listed_log_mean = std::log(1.0), spam.listed_log_sd = 1.0;
    spam.p_verified = 0.0, spam.p_default_profile = 0.6;
    spam.p_default_image = 0.3, spam.p_background = 0.3;
    spam.description_words_min = 0, spam.description_words_max = 10;
    spam.p_empty_description = 0.4, spam.p_bot_in_description = 0.0;
    spam.screen_name_length_min = 8, spam.screen_name_length_max = 15;
    spam.screen_name_digits_min = 2, spam.screen_name_digits_max = 6;
    spam.timeline_min = 150, spam.timeline_max = 200;
    spam.interval_cv = 0.3, spam.circadian = 0.0;
    spam.p_retweet = 0.05, spam.p_reply = 0.05, spam.p_self_reply = 0.0;
    spam.mention_pool = 500, spam.mentions_per_tweet = 1.2;
    spam.retweet_pool = 5, spam.p_campaign_retweet = 0.0;
    spam.hashtags_per_tweet = 2.5, spam.urls_per_tweet = 0.95;
    spam.words_min = 8, spam.words_max = 16;
    spam.p_duplicate_text = 0.7, spam.template_pool = 5;
    spam.valence_word_rate = 0.2, spam.positivity = 0.9;
    spam.mentions_received_min = 0, spam.mentions_received_max = 5;
    spam.p_english = 0.85;
    c.archetypes[Archetype::Spammer] = spam;

    ArchetypeParams fake;
    fake.age_days_min = 10, fake.age_days_max = 400;
    fake.followers_log_mean = std::log(5.0), fake.followers_log_sd = 1.0;
    fake.friends_log_mean = std::log(800.0), fake.friends_log_sd = 0.7;
    fake.tweets_per_day_log_mean = std::log(0.05), fake.tweets_per_day_log_sd = 1.0;
    fake.favourites_per_day_log_mean = std::log(0.1), fake.favourites_per_day_log_sd = 1.0;
    fake.listed_log_mean = std::log(0.2), fake.listed_log_sd = 1.0;
    fake.p_verified = 0.0, fake.p_default_profile = 0.9;
    fake.p_default_image = 0.8, fake.p_background = 0.1;
    fake.description_words_min = 0, fake.description_words_max = 3;
    fake.p_empty_description = 0.9, fake.p_bot_in_description = 0.0;
    fake.screen_name_length_min = 10, fake.screen_name_length_max = 15;
    fake.screen_name_digits_min = 3, fake.screen_name_digits_max = 8;
    fake.timeline_min = 0, fake.timeline_max = 3;
    fake.interval_cv = 1.0, fake.circadian = 0.0;
    fake.p_retweet = 0.5, fake.p_reply = 0.0, fake.p_self_reply = 0.0;
    fake.mention_pool = 5, fake.mentions_per_tweet = 0.2;
    fake.retweet_pool = 3, fake.p_campaign_retweet = 0.0;
    fake.hashtags_per_tweet = 0.1, fake.urls_per_tweet = 0.1;
    fake.words_min = 3, fake.words_max = 8;
    fake.p_duplicate_text = 0.0, fake.template_pool = 1;
    fake.valence_word_rate = 0.05, fake.positivity = 0.5;
    fake.mentions_received_min = 0, fake.mentions_received_max = 1;
    fake.p_english = 0.8;
    c.archetypes[Archetype::FakeFollower] = fake;

    ArchetypeParams declared;
    declared.age_days_min = 100, declared.age_days_max = 3000;
    declared.followers_log_mean = std::log(400.0), declared.followers_log_sd = 1.2;
    declared.friends_log_mean = std::log(20.0), declared.friends_log_sd = 1.0;
    declared.tweets_per_day_log_mean = std::log(24.0), declared.tweets_per_day_log_sd = 0.4;
    declared.favourites_per_day_log_mean = std::log(0.01);
    declared.favourites_per_day_log_sd = 1.0;
    declared.listed_log_mean = std::log(10.0), declared.listed_log_sd = 1.0;
    declared.p_verified = 0.0, declared.p_default_profile = 0.3;
    declared.p_default_image = 0.05, declared.p_background = 0.5;
    declared.description_words_min = 5, declared.description_words_max = 15;
    declared.p_empty_description = 0.0, declared.p_bot_in_description = 0.9;
    declared.screen_name_length_min = 6, declared.screen_name_length_max = 14;
    declared.screen_name_digits_min = 0, declared.screen_name_digits_max = 2;
    declared.timeline_min = 180, declared.timeline_max = 200;
    declared.interval_cv = 0.02, declared.circadian = 0.0;
    declared.p_retweet = 0.0, declared.p_reply = 0.0, declared.p_self_reply = 0.0;
    declared.mention_pool = 1, declared.mentions_per_tweet = 0.0;
    declared.retweet_pool = 1, declared.p_campaign_retweet = 0.0;
    declared.hashtags_per_tweet = 0.5, declared.urls_per_tweet = 0.5;
    declared.words_min = 5, declared.words_max = 12;
    declared.p_duplicate_text = 0.1, declared.template_pool = 10;
    declared.valence_word_rate = 0.05, declared.positivity = 0.5;
    declared.mentions_received_min = 0, declared.mentions_received_max = 10;
    declared.p_english = 0.9;
    c.archetypes[Archetype::SelfDeclared] = declared;

    ArchetypeParams astro;
    astro.age_days_min = 30, astro.age_days_max = 1500;
    astro.followers_log_mean = std::log(200.0), astro.followers_log_sd = 1.0;
    astro.friends_log_mean = std::log(400.0), astro.friends_log_sd = 0.8;
    astro.tweets_per_day_log_mean = std::log(40.0), astro.tweets_per_day_log_sd = 0.6;
    astro.favourites_per_day_log_mean = std::log(30.0), astro.favourites_per_day_log_sd = 0.8;
    astro.listed_log_mean = std::log(1.0), astro.listed_log_sd = 1.0;
    astro.p_verified = 0.0, astro.p_default_profile = 0.4;
    astro.p_default_image = 0.1, astro.p_background = 0.5;
    astro.description_words_min = 3, astro.description_words_max = 15;
    astro.p_empty_description = 0.2, astro.p_bot_in_description = 0.0;
    astro.screen_name_length_min = 8, astro.screen_name_length_max = 15;
    astro.screen_name_digits_min = 1, astro.screen_name_digits_max = 5;
    astro.timeline_min = 180, astro.timeline_max = 200;
    astro.interval_cv = 1.5, astro.circadian = 0.0;
    astro.p_retweet = 0.85, astro.p_reply = 0.05, astro.p_self_reply = 0.0;
    astro.mention_pool = 30, astro.mentions_per_tweet = 0.3;
    astro.retweet_pool = 10, astro.p_campaign_retweet = 0.9;
    astro.hashtags_per_tweet = 1.5, astro.urls_per_tweet = 0.2;
    astro.words_min = 10, astro.words_max = 20;
    astro.p_duplicate_text = 0.3, astro.template_pool = 8;
    astro.valence_word_rate = 0.15, astro.positivity = 0.3;
    astro.mentions_received_min = 0, astro.mentions_received_max = 20;
    astro.p_english = 0.9;
    c.archetypes[Archetype::Astroturf] = astro;
    return c;
  }();
  return config;
}

json to_json(const SynthConfig& config) {
  json archetypes = json::object();
  for (const auto& [a, p] : config.archetypes) {
    json params = json::object();
    for (const auto& f : kParamFields) params[f.name] = p.*f.member;
    archetypes[std::string(to_string(a))] = std::move(params);
  }
  return {{"version", config.version}, {"archetypes", std::move(archetypes)}};
}

SynthConfig synth_config_from_json(const json& j) {
  try {
    SynthConfig c;
    c.version = j.at("version").get<std::string>();
    for (const auto& [name, params] : j.at("archetypes").items()) {
      const Archetype a = parse_archetype(name);
      ArchetypeParams p;
      for (const auto& f : kParamFields) {
        if (!params.contains(f.name)) {
          throw ValidationError("archetype " + name + " is missing parameter " + f.name);
        }
        p.*f.member = params.at(f.name).get<double>();
      }
      c.archetypes[a] = p;
    }
    return c;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed synthesis config: ") + e.what());
  }
}

SynthConfig load_synth_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return synth_config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

AccountPayload synthesize_account(const ArchetypeParams& p, const std::string& user_id,
                                  Timestamp probe_time, std::uint64_t seed) {
  Rng rng(seed);
  double tweets_per_day = 0;
  bool english = true;
  std::string language;
  AccountPayload payload;
  payload.probe_time = probe_time;
  payload.user = make_user(rng, p, user_id, probe_time, tweets_per_day, english, language);
  const UserObject& user = payload.user;

  // repeated tweets reuse the whole text, entities included
  struct Template {
    std::string text;
    std::vector<std::string> hashtags, urls;
  };
  auto add_entities = [&](Template& tpl) {
    for (auto k = count_around(rng, p.hashtags_per_tweet); k > 0; --k) {
      tpl.hashtags.emplace_back(pick(rng, kHashtags));
      tpl.text += " #" + tpl.hashtags.back();
    }
    for (auto k = count_around(rng, p.urls_per_tweet); k > 0; --k) {
      tpl.urls.push_back("https://t.co/" + random_letters(rng, 8));
      tpl.text += " " + tpl.urls.back();
    }
  };
  std::vector<Template> templates;
  for (std::int64_t i = 0; i < std::max<std::int64_t>(1, std::llround(p.template_pool)); ++i) {
    Template tpl{make_text(rng, p, english), {}, {}};
    add_entities(tpl);
    templates.push_back(std::move(tpl));
  }

  std::int64_t n = std::min<std::int64_t>(range_int(rng, p.timeline_min, p.timeline_max),
                                          static_cast<std::int64_t>(kTimelineCap));
  n = std::min(n, std::max<std::int64_t>(user.statuses_count, 0));
  const double mean_gap = kSecondsPerDay / std::max(tweets_per_day, 1e-3);
  const double cv = std::max(p.interval_cv, 0.0);
  const double sigma = std::sqrt(std::log(1 + cv * cv));
  const double mu = std::log(mean_gap) - sigma * sigma / 2;
  const auto mention_pool = std::max<std::int64_t>(1, std::llround(p.mention_pool));
  const auto retweet_pool = std::max<std::int64_t>(1, std::llround(p.retweet_pool));

  std::int64_t t = probe_time.seconds - static_cast<std::int64_t>(rng.exponential(mean_gap));
  for (std::int64_t i = 0; i < n; ++i) {
    if (i > 0) {
      const double gap = cv > 0 ? std::exp(rng.normal(mu, sigma)) : mean_gap;
      t -= std::max<std::int64_t>(1, std::llround(gap));
    }
    if (rng.bernoulli(p.circadian)) {
      const Timestamp ts{t};
      const int hour = utc_hour(ts);
      if (hour >= 1 && hour < 7) {
        t = utc_day_start(ts).seconds + static_cast<std::int64_t>(rng.below(3600));
      }
    }
    if (t < user.created_at.seconds) break;

    TweetRecord tw;
    tw.tweet_id = user_id + "-t" + std::to_string(i);
    tw.author = user;
    tw.created_at = Timestamp{t};
    tw.lang = language;
    Template content;
    if (rng.bernoulli(p.p_duplicate_text)) {
      content = templates[rng.below(templates.size())];
    } else {
      content.text = make_text(rng, p, english);
      add_entities(content);
    }
    std::string body = std::move(content.text);
    tw.hashtags = std::move(content.hashtags);
    tw.urls = std::move(content.urls);
    for (auto k = count_around(rng, p.mentions_per_tweet); k > 0; --k) {
      tw.mentioned_user_ids.push_back("u" + std::to_string(rng.below(
                                                static_cast<std::uint64_t>(mention_pool))) +
                                      "-of-" + user_id);
    }
    if (rng.bernoulli(p.p_retweet)) {
      tw.is_retweet = true;
      tw.retweeted_user_id =
          rng.bernoulli(p.p_campaign_retweet)
              ? "campaign-" + std::to_string(rng.below(static_cast<std::uint64_t>(retweet_pool)))
              : "rt" + std::to_string(rng.below(static_cast<std::uint64_t>(retweet_pool))) +
                    "-of-" + user_id;
      body = "RT " + body;
    } else if (rng.bernoulli(p.p_reply)) {
      tw.is_reply = true;
      if (rng.bernoulli(p.p_self_reply)) {
        tw.replied_user_id = user_id;
      } else {
        tw.replied_user_id =
            "u" + std::to_string(rng.below(static_cast<std::uint64_t>(mention_pool))) + "-of-" +
            user_id;
        tw.mentioned_user_ids.push_back(*tw.replied_user_id);
      }
    }
    tw.text = std::move(body);
    payload.timeline.push_back(std::move(tw));
  }

  const auto received = range_int(rng, p.mentions_received_min, p.mentions_received_max);
  const auto mentioners = std::max<std::int64_t>(1, received / 2 + 1);
  std::vector<std::int64_t> times;
  for (std::int64_t i = 0; i < received; ++i) {
    const std::int64_t window = std::min<std::int64_t>(
        30 * kSecondsPerDay, probe_time.seconds - user.created_at.seconds);
    times.push_back(probe_time.seconds - rng.between(0, window));
  }
  std::sort(times.begin(), times.end(), std::greater<>());
  for (std::int64_t i = 0; i < received; ++i) {
    TweetRecord tw;
    const std::string author = "m" + std::to_string(rng.below(
                                         static_cast<std::uint64_t>(mentioners))) +
                               "-of-" + user_id;
    tw.tweet_id = user_id + "-m" + std::to_string(i);
    tw.author = make_external_user(author, probe_time);
    tw.created_at = Timestamp{times[static_cast<std::size_t>(i)]};
    tw.text = "@" + user.screen_name + " " + make_text(rng, p, true);
    tw.lang = "en";
    tw.mentioned_user_ids.push_back(user_id);
    payload.mentions.push_back(std::move(tw));
  }
  return payload;
}

LabeledDataset synthesize_corpus(const SynthSpec& spec, std::uint64_t seed) {
  LabeledDataset ds;
  ds.name = spec.name;
  std::uint64_t index = 0;
  for (Archetype a : kAllArchetypes) {
    auto it = spec.counts.find(a);
    const std::int64_t count = it == spec.counts.end() ? 0 : it->second;
    if (count < 0) {
      throw ValidationError("negative account count for archetype " +
                            std::string(to_string(a)));
    }
    if (count > 0 && !spec.config.archetypes.contains(a)) {
      throw ValidationError("config has no parameters for archetype " +
                            std::string(to_string(a)));
    }
    for (std::int64_t i = 0; i < count; ++i, ++index) {
      const std::uint64_t account_seed = derive_seed(seed, index);
      Rng mix(derive_seed(account_seed, 0x6772617900ULL));
      ArchetypeParams params = spec.config.archetypes.at(a);
      if (mix.bernoulli(spec.gray_fraction)) {
        Archetype partner = Archetype::Human;
        if (a == Archetype::Human) {
          std::vector<Archetype> bots;
          for (const auto& [b, _] : spec.config.archetypes) {
            if (b != Archetype::Human) bots.push_back(b);
          }
          if (!bots.empty()) partner = bots[mix.below(bots.size())];
        }
        if (spec.config.archetypes.contains(partner)) {
          params = blend(params, spec.config.archetypes.at(partner), mix.uniform(0.3, 0.7));
        }
      }
      const std::string uid = spec.name + "-" + std::to_string(index);
      ds.records.push_back({synthesize_account(params, uid, spec.probe_time, account_seed),
                            label_of(a), bot_class_of(a)});
    }
  }
  return ds;
}

CaseStudySpec CaseStudySpec::reference_counts() {
  CaseStudySpec s;
  s.groups = {
      {"SHIB", 2000, 1241, 1819, 1111,
       {{Archetype::Human, 0.55}, {Archetype::Spammer, 0.30}, {Archetype::Astroturf, 0.15}}},
      {"FLOKI", 2000, 937, 1893, 860,
       {{Archetype::Human, 0.55}, {Archetype::Spammer, 0.25}, {Archetype::Astroturf, 0.20}}},
      {"AAPL", 2000, 1107, 1864, 1006,
       {{Archetype::Human, 0.70}, {Archetype::SelfDeclared, 0.20}, {Archetype::Spammer, 0.10}}},
  };
  return s;
}

CaseStudySpec CaseStudySpec::scaled(std::int64_t divisor) const {
  if (divisor < 1) throw ValidationError("scale divisor must be positive");
  CaseStudySpec s = *this;
  for (auto& g : s.groups) {
    auto div = [&](std::int64_t v) { return std::max<std::int64_t>(1, v / divisor); };
    g.sample_accounts = div(g.sample_accounts);
    g.sample_tweets = std::max(div(g.sample_tweets), g.sample_accounts);
    const std::int64_t other_accounts = div(g.raw_accounts - g.sample_accounts);
    const std::int64_t other_tweets =
        std::max(div(g.raw_tweets - g.sample_tweets), other_accounts);
    g.raw_accounts = g.sample_accounts + other_accounts;
    g.raw_tweets = g.sample_tweets + other_tweets;
  }
  return s;
}

CaseStudyFixture synthesize_case_study(const CaseStudySpec& spec, std::uint64_t seed,
                                       bool with_payloads) {
  CaseStudyFixture out;
  std::uint64_t account_index = 0;
  for (std::size_t gi = 0; gi < spec.groups.size(); ++gi) {
    const auto& g = spec.groups[gi];
    const std::int64_t other_accounts = g.raw_accounts - g.sample_accounts;
    const std::int64_t other_tweets = g.raw_tweets - g.sample_tweets;
    if (g.sample_accounts < 0 || other_accounts < 0 || g.sample_tweets < g.sample_accounts ||
        other_tweets < other_accounts) {
      throw ValidationError("inconsistent counts for cashtag group " + g.cashtag);
    }
    Rng rng(derive_seed(seed, 0x4341534500ULL + gi));

    // tweets per account: one each, the remainder spread with a heavy tail
    auto allocate = [&](std::int64_t accounts, std::int64_t tweets) {
      std::vector<std::int64_t> per(static_cast<std::size_t>(accounts), 1);
      for (std::int64_t extra = tweets - accounts; extra > 0; --extra) {
        const auto k = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(accounts)));
        // square the draw to favour low indices: a few prolific accounts
        const double u = rng.uniform();
        const auto skewed = static_cast<std::size_t>(u * u * static_cast<double>(accounts));
        per[rng.bernoulli(0.5) ? k : std::min(skewed, per.size() - 1)] += 1;
      }
      return per;
    };
    const auto sample_alloc = allocate(g.sample_accounts, g.sample_tweets);
    const auto other_alloc = allocate(other_accounts, other_tweets);

    std::vector<std::pair<Archetype, double>> mix(g.mix.begin(), g.mix.end());
    double total_weight = 0;
    for (const auto& [_, w] : mix) total_weight += w;
    if (mix.empty() || total_weight <= 0) {
      throw ValidationError("cashtag group " + g.cashtag + " has no archetype mix");
    }

    std::int64_t tweet_no = 0;
    auto emit_accounts = [&](const std::vector<std::int64_t>& alloc, bool in_language) {
      for (std::int64_t tweets : alloc) {
        const std::uint64_t account_seed = derive_seed(seed, account_index);
        const std::string uid = "cs-" + std::to_string(account_index++);
        Rng arng(account_seed);
        double pick_w = arng.uniform() * total_weight;
        Archetype a = mix.back().first;
        for (const auto& [cand, w] : mix) {
          if (pick_w < w) {
            a = cand;
            break;
          }
          pick_w -= w;
        }
        ArchetypeParams params = spec.config.archetypes.at(a);
        if (arng.bernoulli(spec.gray_fraction)) {
          const Archetype partner =
              a == Archetype::Human ? Archetype::Spammer : Archetype::Human;
          params = blend(params, spec.config.archetypes.at(partner), arng.uniform(0.3, 0.7));
        }
        params.p_english = in_language ? 1.0 : 0.0;
        params.timeline_max = std::min<double>(params.timeline_max,
                                               static_cast<double>(spec.timeline_cap));
        params.timeline_min = std::min(params.timeline_min, params.timeline_max);
        const Timestamp probe{spec.collected_at.seconds + kSecondsPerDay};
        AccountPayload payload = synthesize_account(params, uid, probe, account_seed);
        std::string lang = in_language ? spec.sample_language
                                       : std::string(pick(arng, kOtherLanguages));
        if (!in_language && lang == spec.sample_language) lang = "und";
        payload.user.declared_language = lang;
        for (auto& t : payload.timeline) t.author = payload.user, t.lang = lang;

        for (std::int64_t k = 0; k < tweets; ++k) {
          TweetRecord tw;
          tw.tweet_id = g.cashtag + "-" + std::to_string(tweet_no++);
          tw.author = payload.user;
          const std::int64_t window =
              std::min<std::int64_t>(7 * kSecondsPerDay,
                                     spec.collected_at.seconds - payload.user.created_at.seconds);
          tw.created_at = Timestamp{spec.collected_at.seconds - arng.between(0, window)};
          tw.cashtags = {g.cashtag};
          tw.lang = lang;
          // one off-language tweet for prolific accounts keeps the majority intact
          if (tweets >= 3 && k == 0) tw.lang = in_language ? "es" : spec.sample_language;
          tw.text = "$" + g.cashtag + " " + make_text(arng, params, in_language);
          out.tweets.push_back(std::move(tw));
        }
        if (with_payloads) out.author_payloads.push_back(std::move(payload));
      }
    };
    emit_accounts(sample_alloc, true);
    emit_accounts(other_alloc, false);
  }
  return out;
}

}  // namespace botlab
