#include "doctest.h"

#include <fstream>

#include "botlab/corpus.hpp"
#include "botlab/error.hpp"
#include "support.hpp"

using namespace botlab;
using testing::TempDir;

namespace {

UserObject plain_user(const std::string& id) {
  UserObject u;
  u.user_id = id;
  u.screen_name = id;
  u.created_at = from_civil(2019, 1, 1);
  return u;
}

AccountPayload bare_payload(const std::string& id) {
  AccountPayload p;
  p.user = plain_user(id);
  p.probe_time = from_civil(2021, 1, 1);
  return p;
}

TweetRecord tweet_by(const UserObject& u, const std::string& id, Timestamp at) {
  TweetRecord t;
  t.tweet_id = id;
  t.author = u;
  t.created_at = at;
  t.text = "hello";
  return t;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("micro fixture loads and validates") {
    const AccountPayload p = testing::micro_payload();
    CHECK(p.user.screen_name == "lark3qz");
    CHECK(p.timeline.size() == 3);
    CHECK(p.timeline[0].author == p.user);
    CHECK(p.mentions[0].author.user_id == "u_alice");
  }

  TEST_CASE("payload JSON round trip") {
    const AccountPayload p = testing::micro_payload();
    CHECK(payload_from_json(to_json(p)) == p);
  }

  TEST_CASE("type invariants are enforced") {
    AccountPayload p = bare_payload("a");
    SUBCASE("negative count") {
      p.user.followers_count = -1;
      CHECK_THROWS_AS(validate(p), ValidationError);
    }
    SUBCASE("empty id") {
      p.user.user_id = "";
      CHECK_THROWS_AS(validate(p), ValidationError);
    }
    SUBCASE("tweet older than its author") {
      p.timeline.push_back(tweet_by(p.user, "t", from_civil(2018, 1, 1)));
      CHECK_THROWS_AS(validate(p), ValidationError);
    }
    SUBCASE("retweet without target") {
      auto t = tweet_by(p.user, "t", from_civil(2020, 1, 1));
      t.is_retweet = true;
      p.timeline.push_back(t);
      CHECK_THROWS_AS(validate(p), ValidationError);
    }
    SUBCASE("timeline authored by someone else") {
      p.timeline.push_back(tweet_by(plain_user("b"), "t", from_civil(2020, 1, 1)));
      CHECK_THROWS_AS(validate(p), ValidationError);
    }
    SUBCASE("timeline not newest first") {
      p.timeline.push_back(tweet_by(p.user, "t1", from_civil(2020, 1, 1)));
      p.timeline.push_back(tweet_by(p.user, "t2", from_civil(2020, 2, 1)));
      CHECK_THROWS_AS(validate(p), ValidationError);
    }
    SUBCASE("tweet after probe time") {
      p.timeline.push_back(tweet_by(p.user, "t", from_civil(2022, 1, 1)));
      CHECK_THROWS_AS(validate(p), ValidationError);
    }
    SUBCASE("mention that does not mention the user") {
      p.mentions.push_back(tweet_by(plain_user("b"), "m", from_civil(2020, 1, 1)));
      CHECK_THROWS_AS(validate(p), ValidationError);
    }
    SUBCASE("201 timeline tweets") {
      for (int i = 0; i < 201; ++i) {
        p.timeline.push_back(tweet_by(p.user, "t" + std::to_string(i),
                                      Timestamp{from_civil(2020, 6, 1).seconds - i * 60}));
      }
      CHECK_THROWS_WITH_AS(validate(p), doctest::Contains("timeline"), ValidationError);
    }
    SUBCASE("200 timeline tweets are fine") {
      for (int i = 0; i < 200; ++i) {
        p.timeline.push_back(tweet_by(p.user, "t" + std::to_string(i),
                                      Timestamp{from_civil(2020, 6, 1).seconds - i * 60}));
      }
      CHECK_NOTHROW(validate(p));
    }
  }

  TEST_CASE("cashtags are normalized") {
    CHECK(normalize_cashtag("$shib") == "SHIB");
    CHECK(normalize_cashtag("AAPL") == "AAPL");
    json j = to_json(testing::micro_payload().timeline[0]);
    j["entities"]["cashtags"] = {"$floki"};
    const TweetRecord t = tweet_from_json(j);
    CHECK(t.cashtags == std::vector<std::string>{"FLOKI"});
  }

  TEST_CASE("schema errors name the field") {
    json j = to_json(testing::micro_payload());
    j["user"]["followers_count"] = "many";
    CHECK_THROWS_WITH_AS(payload_from_json(j), doctest::Contains("followers_count"), ValidationError);
    j = to_json(testing::micro_payload());
    j["timeline"][1]["created_at"] = "not a time";
    CHECK_THROWS_WITH_AS(payload_from_json(j), doctest::Contains("created_at"), ValidationError);
  }

  TEST_CASE("dataset round trip") {
    TempDir dir("corpus-rt");
    const LabeledDataset& ds = testing::small_corpus();
    save_dataset(ds, dir.path);
    const LabeledDataset back = load_dataset(dir.path, "small");
    REQUIRE(back.records.size() == ds.records.size());
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
      CHECK(back.records[i] == ds.records[i]);
    }
    CHECK(back.bot_count() == ds.bot_count());
    CHECK(back.human_count() == ds.human_count());
  }

  TEST_CASE("empty and singleton datasets") {
    TempDir dir("corpus-small");
    write_file(dir.path / "payloads.jsonl", "");
    write_file(dir.path / "labels.csv", "user_id,label\n");
    LabeledDataset empty = load_dataset(dir.path, "empty");
    CHECK(empty.bot_count() == 0);
    CHECK(empty.human_count() == 0);

    write_payloads_jsonl(dir.path / "payloads.jsonl", std::vector<AccountPayload>{bare_payload("b1")});
    write_file(dir.path / "labels.csv", "b1,bot,spammer\n");
    LabeledDataset one = load_dataset(dir.path, "one");
    CHECK(one.bot_count() == 1);
    CHECK(one.human_count() == 0);
    CHECK(one.class_of(one.records[0]) == BotClass::Spammer);
  }

  TEST_CASE("labeled fixture of public size reports 733 bots and 1495 humans") {
    TempDir dir("corpus-sized");
    LabeledDataset ds;
    ds.name = "varol-icwsm";
    for (int i = 0; i < 733 + 1495; ++i) {
      ds.records.push_back({bare_payload("v" + std::to_string(i)),
                            i < 733 ? Label::Bot : Label::Human,
                            i < 733 ? std::optional(BotClass::Other) : std::nullopt});
    }
    save_dataset(ds, dir.path);
    const LabeledDataset back = load_dataset(dir.path, "varol-icwsm");
    CHECK(back.bot_count() == 733);
    CHECK(back.human_count() == 1495);
  }

  TEST_CASE("load errors") {
    TempDir dir("corpus-err");
    write_payloads_jsonl(dir.path / "payloads.jsonl",
                         std::vector<AccountPayload>{bare_payload("a"), bare_payload("b")});
    write_file(dir.path / "labels.csv", "a,human\n");
    CHECK_THROWS_WITH_AS(load_dataset(dir.path, "x"), doctest::Contains("b"), ValidationError);

    write_file(dir.path / "labels.csv", "a,human\nb,robot\n");
    CHECK_THROWS_AS(load_dataset(dir.path, "x"), ValidationError);

    json bad = to_json(bare_payload("c"));
    bad["probe_time"] = "2021-99-01T00:00:00Z";
    write_file(dir.path / "payloads.jsonl", to_json(bare_payload("a")).dump() + "\n" + bad.dump() + "\n");
    write_file(dir.path / "labels.csv", "a,human\nc,bot\n");
    CHECK_THROWS_WITH_AS(load_dataset(dir.path, "x"), doctest::Contains("line 2"), ValidationError);

    CHECK_THROWS_AS(load_dataset(dir.path / "missing", "x"), IoError);
  }

  TEST_CASE("grouping by cashtag preserves order and allows multi-membership") {
    const UserObject u = plain_user("a");
    std::vector<TweetRecord> tweets;
    for (int i = 0; i < 5; ++i) {
      auto t = tweet_by(u, "t" + std::to_string(i), from_civil(2020, 1, 1));
      t.cashtags = i % 2 ? std::vector<std::string>{"SHIB"} : std::vector<std::string>{"FLOKI"};
      if (i == 4) t.cashtags = {"SHIB", "FLOKI"};
      tweets.push_back(t);
    }
    const auto shib = group_tweets_by_query(tweets, "SHIB");
    REQUIRE(shib.size() == 3);
    CHECK(shib[0].tweet_id == "t1");
    CHECK(shib[2].tweet_id == "t4");
    CHECK(group_tweets_by_query(tweets, "FLOKI").size() == 3);
    CHECK(group_tweets_by_query(tweets, "AAPL").empty());
  }
}
