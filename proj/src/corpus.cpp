#include "botlab/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "botlab/error.hpp"

namespace botlab {
namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void field_error(const std::string& path, const std::string& msg) {
  throw ValidationError(path + ": " + msg);
}

const json& require(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) field_error(path, "expected object");
  auto it = j.find(key);
  if (it == j.end()) field_error(path + "." + key, "missing");
  return *it;
}

std::string get_string(const json& j, const char* key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_string()) field_error(path + "." + key, "expected string");
  return v.get<std::string>();
}

std::optional<std::string> get_opt_string(const json& j, const char* key,
                                          const std::string& path) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) field_error(path + "." + key, "expected string");
  return it->get<std::string>();
}

std::int64_t get_count(const json& j, const char* key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number_integer()) field_error(path + "." + key, "expected integer");
  const auto n = v.get<std::int64_t>();
  if (n < 0) field_error(path + "." + key, "must be non-negative");
  return n;
}

bool get_bool(const json& j, const char* key, const std::string& path,
              std::optional<bool> fallback = std::nullopt) {
  auto it = j.find(key);
  if (it == j.end()) {
    if (fallback) return *fallback;
    field_error(path + "." + key, "missing");
  }
  if (!it->is_boolean()) field_error(path + "." + key, "expected boolean");
  return it->get<bool>();
}

Timestamp get_time(const json& j, const char* key, const std::string& path) {
  const std::string s = get_string(j, key, path);
  try {
    return parse_timestamp(s);
  } catch (const ValidationError& e) {
    field_error(path + "." + key, e.what());
  }
}

std::vector<std::string> get_string_list(const json& j, const char* key,
                                         const std::string& path) {
  std::vector<std::string> out;
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return out;
  if (!it->is_array()) field_error(path + "." + key, "expected array");
  for (const auto& e : *it) {
    if (!e.is_string()) field_error(path + "." + key, "expected array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

template <typename Fn>
void for_each_jsonl(const std::filesystem::path& path, Fn&& fn) {
  auto in = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      fn(json::parse(line));
    } catch (const json::parse_error& e) {
      throw ValidationError(path.filename().string() + " line " +
                            std::to_string(lineno) + ": invalid JSON: " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(path.filename().string() + " line " +
                            std::to_string(lineno) + ": " + e.what());
    }
  }
}

}  // namespace

std::string_view to_string(Label label) {
  return label == Label::Bot ? "bot" : "human";
}

std::string_view to_string(BotClass cls) {
  switch (cls) {
    case BotClass::FakeFollower: return "fake_follower";
    case BotClass::Spammer: return "spammer";
    case BotClass::SelfDeclared: return "self_declared";
    case BotClass::Astroturf: return "astroturf";
    case BotClass::Financial: return "financial";
    case BotClass::Other: return "other";
  }
  return "other";
}

Label parse_label(std::string_view text) {
  if (text == "bot") return Label::Bot;
  if (text == "human") return Label::Human;
  throw ValidationError("unknown label '" + std::string(text) +
                        "' (expected human or bot)");
}

BotClass parse_bot_class(std::string_view text) {
  for (BotClass c : kAllBotClasses) {
    if (to_string(c) == text) return c;
  }
  throw ValidationError("unknown bot class '" + std::string(text) + "'");
}

std::size_t LabeledDataset::bot_count() const {
  return static_cast<std::size_t>(std::count_if(
      records.begin(), records.end(),
      [](const LabeledAccount& r) { return r.label == Label::Bot; }));
}

std::size_t LabeledDataset::human_count() const {
  return records.size() - bot_count();
}

BotClass LabeledDataset::class_of(const LabeledAccount& record) const {
  if (record.bot_class) return *record.bot_class;
  if (bot_class) return *bot_class;
  return BotClass::Other;
}

std::string normalize_cashtag(std::string_view tag) {
  std::string out;
  for (char c : tag) {
    if (c == '$') continue;
    out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return out;
}

void validate(const UserObject& user) {
  if (user.user_id.empty()) field_error("user.user_id", "must be non-empty");
  const std::pair<const char*, std::int64_t> counts[] = {
      {"followers_count", user.followers_count},
      {"friends_count", user.friends_count},
      {"statuses_count", user.statuses_count},
      {"listed_count", user.listed_count},
      {"favourites_count", user.favourites_count}};
  for (const auto& [name, value] : counts) {
    if (value < 0) field_error(std::string("user.") + name, "must be non-negative");
  }
}

void validate(const TweetRecord& tweet) {
  const std::string path = "tweet " + tweet.tweet_id;
  if (tweet.tweet_id.empty()) field_error("tweet.tweet_id", "must be non-empty");
  validate(tweet.author);
  if (tweet.created_at < tweet.author.created_at) {
    field_error(path + ".created_at", "precedes author.created_at");
  }
  if (tweet.is_retweet && !tweet.retweeted_user_id) {
    field_error(path + ".retweeted_user_id", "required when is_retweet");
  }
  if (tweet.is_reply && !tweet.replied_user_id) {
    field_error(path + ".replied_user_id", "required when is_reply");
  }
  for (const auto& tag : tweet.cashtags) {
    if (tag.empty() || tag != normalize_cashtag(tag)) {
      field_error(path + ".cashtags", "'" + tag + "' must be uppercase without '$'");
    }
  }
}

void validate(const AccountPayload& payload) {
  validate(payload.user);
  if (payload.timeline.size() > kTimelineCap) {
    field_error("timeline", "has " + std::to_string(payload.timeline.size()) +
                                " tweets; at most " + std::to_string(kTimelineCap) +
                                " allowed");
  }
  if (payload.probe_time < payload.user.created_at) {
    field_error("probe_time", "precedes user.created_at");
  }
  for (const auto& t : payload.timeline) {
    validate(t);
    if (t.author.user_id != payload.user.user_id) {
      field_error("timeline", "tweet " + t.tweet_id + " is not authored by " +
                                  payload.user.user_id);
    }
    if (t.created_at > payload.probe_time) {
      field_error("timeline", "tweet " + t.tweet_id + " is after probe_time");
    }
  }
  for (std::size_t i = 1; i < payload.timeline.size(); ++i) {
    if (payload.timeline[i].created_at > payload.timeline[i - 1].created_at) {
      field_error("timeline", "must be ordered newest first");
    }
  }
  for (const auto& t : payload.mentions) {
    validate(t);
    const auto& ids = t.mentioned_user_ids;
    if (std::find(ids.begin(), ids.end(), payload.user.user_id) == ids.end()) {
      field_error("mentions", "tweet " + t.tweet_id + " does not mention " +
                                  payload.user.user_id);
    }
    if (t.created_at > payload.probe_time) {
      field_error("mentions", "tweet " + t.tweet_id + " is after probe_time");
    }
  }
}

json to_json(const UserObject& u) {
  json j = {{"user_id", u.user_id},
            {"screen_name", u.screen_name},
            {"display_name", u.display_name},
            {"created_at", format_timestamp(u.created_at)},
            {"followers_count", u.followers_count},
            {"friends_count", u.friends_count},
            {"statuses_count", u.statuses_count},
            {"listed_count", u.listed_count},
            {"favourites_count", u.favourites_count},
            {"verified", u.verified},
            {"default_profile", u.default_profile},
            {"default_profile_image", u.default_profile_image},
            {"profile_use_background_image", u.profile_use_background_image},
            {"description", u.description}};
  if (u.declared_language) j["declared_language"] = *u.declared_language;
  return j;
}

UserObject user_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) field_error(path, "expected object");
  UserObject u;
  u.user_id = get_string(j, "user_id", path);
  u.screen_name = get_string(j, "screen_name", path);
  u.display_name = get_opt_string(j, "display_name", path).value_or("");
  u.created_at = get_time(j, "created_at", path);
  u.followers_count = get_count(j, "followers_count", path);
  u.friends_count = get_count(j, "friends_count", path);
  u.statuses_count = get_count(j, "statuses_count", path);
  u.listed_count = get_count(j, "listed_count", path);
  u.favourites_count = get_count(j, "favourites_count", path);
  u.verified = get_bool(j, "verified", path, false);
  u.default_profile = get_bool(j, "default_profile", path, false);
  u.default_profile_image = get_bool(j, "default_profile_image", path, false);
  u.profile_use_background_image =
      get_bool(j, "profile_use_background_image", path, true);
  u.description = get_opt_string(j, "description", path).value_or("");
  u.declared_language = get_opt_string(j, "declared_language", path);
  if (u.user_id.empty()) field_error(path + ".user_id", "must be non-empty");
  return u;
}

json to_json(const TweetRecord& t, bool include_author) {
  json j = {{"tweet_id", t.tweet_id},
            {"created_at", format_timestamp(t.created_at)},
            {"text", t.text},
            {"entities",
             {{"hashtags", t.hashtags},
              {"user_mentions", t.mentioned_user_ids},
              {"urls", t.urls},
              {"cashtags", t.cashtags}}},
            {"is_retweet", t.is_retweet},
            {"is_reply", t.is_reply}};
  if (t.lang) j["lang"] = *t.lang;
  if (t.retweeted_user_id) j["retweeted_user_id"] = *t.retweeted_user_id;
  if (t.replied_user_id) j["replied_user_id"] = *t.replied_user_id;
  if (include_author) j["user"] = to_json(t.author);
  return j;
}

TweetRecord tweet_from_json(const json& j, const std::string& path,
                            const UserObject* default_author) {
  if (!j.is_object()) field_error(path, "expected object");
  TweetRecord t;
  t.tweet_id = get_string(j, "tweet_id", path);
  const std::string tpath = path + "[" + t.tweet_id + "]";
  if (auto it = j.find("user"); it != j.end()) {
    t.author = user_from_json(*it, tpath + ".user");
  } else if (default_author) {
    t.author = *default_author;
  } else {
    field_error(tpath + ".user", "missing");
  }
  t.created_at = get_time(j, "created_at", tpath);
  t.text = get_opt_string(j, "text", tpath).value_or("");
  t.lang = get_opt_string(j, "lang", tpath);
  if (auto it = j.find("entities"); it != j.end() && !it->is_null()) {
    const std::string epath = tpath + ".entities";
    if (!it->is_object()) field_error(epath, "expected object");
    t.hashtags = get_string_list(*it, "hashtags", epath);
    t.mentioned_user_ids = get_string_list(*it, "user_mentions", epath);
    t.urls = get_string_list(*it, "urls", epath);
    for (const auto& tag : get_string_list(*it, "cashtags", epath)) {
      t.cashtags.push_back(normalize_cashtag(tag));
    }
  }
  t.is_retweet = get_bool(j, "is_retweet", tpath, false);
  t.is_reply = get_bool(j, "is_reply", tpath, false);
  t.retweeted_user_id = get_opt_string(j, "retweeted_user_id", tpath);
  t.replied_user_id = get_opt_string(j, "replied_user_id", tpath);
  return t;
}

json to_json(const AccountPayload& p) {
  json timeline = json::array();
  for (const auto& t : p.timeline) {
    // timeline authors are implied by the payload's user
    timeline.push_back(to_json(t, t.author != p.user));
  }
  json mentions = json::array();
  for (const auto& t : p.mentions) mentions.push_back(to_json(t));
  return {{"user", to_json(p.user)},
          {"probe_time", format_timestamp(p.probe_time)},
          {"timeline", std::move(timeline)},
          {"mentions", std::move(mentions)}};
}

AccountPayload payload_from_json(const json& j) {
  if (!j.is_object()) field_error("payload", "expected object");
  AccountPayload p;
  p.user = user_from_json(require(j, "user", "payload"), "user");
  p.probe_time = get_time(j, "probe_time", "payload");
  auto read_list = [&](const char* key, const UserObject* author) {
    std::vector<TweetRecord> out;
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return out;
    if (!it->is_array()) field_error(key, "expected array");
    out.reserve(it->size());
    for (const auto& e : *it) out.push_back(tweet_from_json(e, key, author));
    return out;
  };
  p.timeline = read_list("timeline", &p.user);
  p.mentions = read_list("mentions", nullptr);
  validate(p);
  return p;
}

std::vector<AccountPayload> read_payloads_jsonl(const std::filesystem::path& path) {
  std::vector<AccountPayload> out;
  for_each_jsonl(path, [&](const json& j) { out.push_back(payload_from_json(j)); });
  return out;
}

void write_payloads_jsonl(const std::filesystem::path& path,
                          std::span<const AccountPayload> payloads) {
  auto out = open_out(path);
  for (const auto& p : payloads) out << to_json(p).dump() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<TweetRecord> read_tweets_jsonl(const std::filesystem::path& path) {
  std::vector<TweetRecord> out;
  for_each_jsonl(path, [&](const json& j) {
    out.push_back(tweet_from_json(j));
    validate(out.back());
  });
  return out;
}

void write_tweets_jsonl(const std::filesystem::path& path,
                        std::span<const TweetRecord> tweets) {
  auto out = open_out(path);
  for (const auto& t : tweets) out << to_json(t).dump() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

LabeledDataset load_dataset(const std::filesystem::path& dir, std::string name) {
  struct LabelRow {
    Label label;
    std::optional<BotClass> cls;
  };
  std::unordered_map<std::string, LabelRow> labels;
  {
    auto in = open_in(dir / kLabelsFile);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string row = trim(line);
      if (row.empty()) continue;
      std::vector<std::string> cols;
      std::stringstream ss(row);
      std::string col;
      while (std::getline(ss, col, ',')) cols.push_back(trim(col));
      if (lineno == 1 && !cols.empty() && cols[0] == "user_id") continue;
      const std::string where =
          std::string(kLabelsFile) + " line " + std::to_string(lineno) + ": ";
      if (cols.size() < 2 || cols.size() > 3 || cols[0].empty()) {
        throw ValidationError(where + "expected user_id,label[,bot_class]");
      }
      try {
        LabelRow r{parse_label(cols[1]), std::nullopt};
        if (cols.size() == 3 && !cols[2].empty()) r.cls = parse_bot_class(cols[2]);
        if (!labels.emplace(cols[0], r).second) {
          throw ValidationError("duplicate label for user_id " + cols[0]);
        }
      } catch (const ValidationError& e) {
        throw ValidationError(where + e.what());
      }
    }
  }

  LabeledDataset ds;
  ds.name = std::move(name);
  std::unordered_set<std::string> seen;
  for_each_jsonl(dir / kPayloadsFile, [&](const json& j) {
    AccountPayload p = payload_from_json(j);
    const std::string& uid = p.user.user_id;
    if (!seen.insert(uid).second) {
      throw ValidationError("duplicate user_id " + uid);
    }
    auto it = labels.find(uid);
    if (it == labels.end()) throw ValidationError("no label for user_id " + uid);
    ds.records.push_back({std::move(p), it->second.label, it->second.cls});
  });
  return ds;
}

void save_dataset(const LabeledDataset& dataset, const std::filesystem::path& dir) {
  std::vector<AccountPayload> payloads;
  payloads.reserve(dataset.records.size());
  for (const auto& r : dataset.records) payloads.push_back(r.payload);
  write_payloads_jsonl(dir / kPayloadsFile, payloads);

  auto out = open_out(dir / kLabelsFile);
  out << "user_id,label,bot_class\n";
  for (const auto& r : dataset.records) {
    out << r.payload.user.user_id << ',' << to_string(r.label) << ',';
    if (r.label == Label::Bot) {
      const auto cls = r.bot_class ? r.bot_class : dataset.bot_class;
      if (cls) out << to_string(*cls);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + (dir / kLabelsFile).string());
}

std::vector<TweetRecord> group_tweets_by_query(std::span<const TweetRecord> tweets,
                                               std::string_view cashtag) {
  std::vector<TweetRecord> out;
  for (const auto& t : tweets) {
    if (std::find(t.cashtags.begin(), t.cashtags.end(), cashtag) != t.cashtags.end()) {
      out.push_back(t);
    }
  }
  return out;
}

}  // namespace botlab
