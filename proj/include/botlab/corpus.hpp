#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "botlab/timeutil.hpp"
#include "json.hpp"

namespace botlab {

using json = nlohmann::json;

inline constexpr std::size_t kTimelineCap = 200;

enum class Label { Human, Bot };

/// Bot taxonomy used to split the specialized classifiers.
enum class BotClass { FakeFollower, Spammer, SelfDeclared, Astroturf, Financial, Other };

inline constexpr BotClass kAllBotClasses[] = {
    BotClass::FakeFollower, BotClass::Spammer,   BotClass::SelfDeclared,
    BotClass::Astroturf,    BotClass::Financial, BotClass::Other};

std::string_view to_string(Label label);
std::string_view to_string(BotClass cls);
Label parse_label(std::string_view text);
BotClass parse_bot_class(std::string_view text);

struct UserObject {
  std::string user_id;
  std::string screen_name;
  std::string display_name;
  Timestamp created_at;
  std::int64_t followers_count = 0;
  std::int64_t friends_count = 0;
  std::int64_t statuses_count = 0;
  std::int64_t listed_count = 0;
  std::int64_t favourites_count = 0;
  bool verified = false;
  bool default_profile = false;
  bool default_profile_image = false;
  bool profile_use_background_image = true;
  std::string description;
  std::optional<std::string> declared_language;

  bool operator==(const UserObject&) const = default;
};

struct TweetRecord {
  std::string tweet_id;
  UserObject author;
  Timestamp created_at;
  std::string text;
  std::optional<std::string> lang;
  std::vector<std::string> hashtags;
  std::vector<std::string> mentioned_user_ids;
  std::vector<std::string> urls;
  /// Uppercase symbols without the leading '$'.
  std::vector<std::string> cashtags;
  bool is_retweet = false;
  bool is_reply = false;
  std::optional<std::string> retweeted_user_id;
  std::optional<std::string> replied_user_id;

  bool operator==(const TweetRecord&) const = default;
};

/// Everything needed to score one account: the user object, its most recent
/// tweets (newest first) and tweets by others mentioning it.
struct AccountPayload {
  UserObject user;
  std::vector<TweetRecord> timeline;
  std::vector<TweetRecord> mentions;
  Timestamp probe_time;

  bool operator==(const AccountPayload&) const = default;
};

struct LabeledAccount {
  AccountPayload payload;
  Label label = Label::Human;
  std::optional<BotClass> bot_class;

  bool operator==(const LabeledAccount&) const = default;
};

struct LabeledDataset {
  std::string name;
  std::vector<LabeledAccount> records;
  /// Default class for bot records that carry no class of their own.
  std::optional<BotClass> bot_class;

  std::size_t bot_count() const;
  std::size_t human_count() const;
  /// Effective class of a bot record: its own tag, then the dataset's, then Other.
  BotClass class_of(const LabeledAccount& record) const;
};

// Validation. Each throws ValidationError naming the offending field.
void validate(const UserObject& user);
void validate(const TweetRecord& tweet);
void validate(const AccountPayload& payload);

// JSON mapping. Parsers validate and throw ValidationError with a field path.
json to_json(const UserObject& user);
json to_json(const TweetRecord& tweet, bool include_author = true);
json to_json(const AccountPayload& payload);
UserObject user_from_json(const json& j, const std::string& path = "user");
TweetRecord tweet_from_json(const json& j, const std::string& path = "tweet",
                            const UserObject* default_author = nullptr);
AccountPayload payload_from_json(const json& j);

/// "$shib" -> "SHIB".
std::string normalize_cashtag(std::string_view tag);

std::vector<AccountPayload> read_payloads_jsonl(const std::filesystem::path& path);
void write_payloads_jsonl(const std::filesystem::path& path,
                          std::span<const AccountPayload> payloads);
std::vector<TweetRecord> read_tweets_jsonl(const std::filesystem::path& path);
void write_tweets_jsonl(const std::filesystem::path& path,
                        std::span<const TweetRecord> tweets);

inline constexpr std::string_view kPayloadsFile = "payloads.jsonl";
inline constexpr std::string_view kLabelsFile = "labels.csv";

/// Loads `<dir>/payloads.jsonl` and `<dir>/labels.csv` (`user_id,label[,bot_class]`).
/// Every payload is validated; a payload without a label is rejected.
LabeledDataset load_dataset(const std::filesystem::path& dir, std::string name);
void save_dataset(const LabeledDataset& dataset, const std::filesystem::path& dir);

/// Tweets whose cashtags contain `cashtag`, in input order.
std::vector<TweetRecord> group_tweets_by_query(std::span<const TweetRecord> tweets,
                                               std::string_view cashtag);

}  // namespace botlab
