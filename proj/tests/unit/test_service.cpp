#include "doctest.h"

#include <atomic>
#include <sstream>
#include <thread>

#include "botlab/error.hpp"
#include "botlab/service.hpp"
#include "support.hpp"

using namespace botlab;

namespace {

struct FakeClock {
  std::shared_ptr<std::atomic<std::int64_t>> now =
      std::make_shared<std::atomic<std::int64_t>>(from_civil(2022, 3, 1, 12).seconds);
  Clock clock() const {
    return [n = now] { return Timestamp{n->load()}; };
  }
};

const std::shared_ptr<const LoadedModels>& models() {
  static const auto m = [] {
    auto out = std::make_shared<LoadedModels>();
    out->esc = testing::small_model();
    std::vector<LabeledDataset> ds{testing::small_corpus()};
    out->calibration = calibrate_model(out->esc, ds, kDefaultPrior);
    ForestParams p;
    p.n_trees = 20;
    out->lite = train_lite(ds, p, 4);
    return std::shared_ptr<const LoadedModels>(std::move(out));
  }();
  return m;
}

std::unique_ptr<ScoringService> make_service(const FakeClock& fc,
                                             std::vector<ApiKeyRecord> keys = {{"k1"}},
                                             ServiceConfig cfg = {}) {
  auto s = std::make_unique<ScoringService>(std::move(cfg), std::move(keys), fc.clock());
  s->load(models());
  return s;
}

std::string payload_body() { return testing::read_fixture("micro_payload.json").dump(); }

Request check(const std::string& key = "k1") {
  return {"POST", "/check_account", key, payload_body()};
}

json lite_entry(const std::string& id) {
  return {{"user",
           {{"user_id", id},
            {"screen_name", "n" + id},
            {"created_at", "2020-01-01T00:00:00Z"},
            {"followers_count", 10},
            {"friends_count", 2000},
            {"statuses_count", 5},
            {"listed_count", 0},
            {"favourites_count", 0}}},
          {"probe_time", "2021-01-01T00:00:00Z"}};
}

}  // namespace

TEST_SUITE("service") {
  TEST_CASE("status codes in check order") {
    FakeClock fc;
    ScoringService cold({}, {{"k1"}}, fc.clock());
    CHECK(cold.handle({"GET", "/health", "", ""}).status == 503);
    CHECK(cold.handle({"GET", "/nope", "", ""}).status == 404);

    auto s = make_service(fc);
    const Response h = s->handle({"GET", "/health", "", ""});
    CHECK(h.status == 200);
    const json hj = json::parse(h.body);
    CHECK(hj["model_version"] == models()->esc.version);
    CHECK(hj["lite_version"] == models()->lite->version);
    CHECK(s->handle({"GET", "/check_account", "k1", payload_body()}).status == 405);
    CHECK(s->handle({"POST", "/check_account", "nobody", payload_body()}).status == 401);
    CHECK(s->handle({"POST", "/check_account", "", payload_body()}).status == 401);
    CHECK(s->handle({"POST", "/check_account", "k1", "{not json"}).status == 400);
    CHECK(s->handle({"POST", "/check_account", "k1", "{}"}).status == 400);
    CHECK(s->ledger().used("k1", QuotaKind::CheckAccount) == 0);

    const Response ok = s->handle(check());
    REQUIRE(ok.status == 200);
    const ScoreReport r = score_report_from_json(json::parse(ok.body));
    CHECK(r.user_id == "u1");
    CHECK(r.cap_english.has_value());
    CHECK(r.display_overall == 5 * r.raw_overall);
    CHECK(s->ledger().used("k1", QuotaKind::CheckAccount) == 1);
  }

  TEST_CASE("oversized timelines are rejected before quota") {
    FakeClock fc;
    auto s = make_service(fc);
    json body = testing::read_fixture("micro_payload.json");
    json tweet = body["timeline"][0];
    body["timeline"] = json::array();
    for (int i = 0; i < 201; ++i) {
      tweet["tweet_id"] = "x" + std::to_string(i);
      body["timeline"].push_back(tweet);
    }
    const Response r = s->handle({"POST", "/check_account", "k1", body.dump()});
    CHECK(r.status == 400);
    CHECK(json::parse(r.body)["error"].get<std::string>().find("timeline") != std::string::npos);
    CHECK(s->ledger().used("k1", QuotaKind::CheckAccount) == 0);
  }

  TEST_CASE("quota exhaustion and reset at UTC midnight") {
    FakeClock fc;
    auto s = make_service(fc, {{"k1", 3, 10}});
    for (int i = 0; i < 3; ++i) CHECK(s->handle(check()).status == 200);
    const Response over = s->handle(check());
    CHECK(over.status == 429);
    const json j = json::parse(over.body);
    CHECK(j["quota"] == 3);
    CHECK(j["reset_at"] == "2022-03-02T00:00:00Z");
    CHECK(over.headers.at("X-Quota-Reset") == "2022-03-02T00:00:00Z");
    fc.now->store(from_civil(2022, 3, 1, 23, 59, 59).seconds);
    CHECK(s->handle(check()).status == 429);
    fc.now->store(from_civil(2022, 3, 2).seconds);
    CHECK(s->handle(check()).status == 200);
  }

  TEST_CASE("bulk keeps order and reports per-entry errors") {
    FakeClock fc;
    auto s = make_service(fc, {{"k1", 10, 5}});
    json body = json::array({lite_entry("a"), lite_entry("b"), lite_entry("c")});
    body[1]["user"].erase("created_at");
    const Response r = s->handle({"POST", "/check_accounts_in_bulk", "k1", body.dump()});
    REQUIRE(r.status == 200);
    const json out = json::parse(r.body);
    REQUIRE(out.size() == 3);
    CHECK(out[0]["user_id"] == "a");
    CHECK(out[1]["user_id"] == "b");
    CHECK(out[1].contains("error"));
    CHECK_FALSE(out[1].contains("botscore"));
    CHECK(out[2]["user_id"] == "c");
    const double sc = out[0]["botscore"].get<double>();
    CHECK(sc == score_lite(*models()->lite, user_from_json(lite_entry("a")["user"]),
                           parse_timestamp("2021-01-01T00:00:00Z")));
    CHECK(s->ledger().used("k1", QuotaKind::LiteUsers) == 3);

    SUBCASE("a page that does not fit is refused whole") {
      const Response big = s->handle({"POST", "/check_accounts_in_bulk", "k1", body.dump()});
      CHECK(big.status == 429);
      CHECK(s->ledger().used("k1", QuotaKind::LiteUsers) == 3);
      json two = json::array({lite_entry("d"), lite_entry("e")});
      CHECK(s->handle({"POST", "/check_accounts_in_bulk", "k1", two.dump()}).status == 200);
      CHECK(s->ledger().used("k1", QuotaKind::LiteUsers) == 5);
    }
    SUBCASE("page size and shape") {
      ServiceConfig cfg;
      cfg.bulk_page_size = 2;
      auto small = make_service(fc, {{"k1"}}, cfg);
      CHECK(small->handle({"POST", "/check_accounts_in_bulk", "k1", body.dump()}).status == 400);
      CHECK(small->handle({"POST", "/check_accounts_in_bulk", "k1", "{}"}).status == 400);
    }
  }

  TEST_CASE("bulk needs a lite model") {
    FakeClock fc;
    ScoringService s({}, {{"k1"}}, fc.clock());
    auto m = std::make_shared<LoadedModels>(*models());
    m->lite.reset();
    s.load(m);
    CHECK(s.handle({"POST", "/check_accounts_in_bulk", "k1", "[]"}).status == 503);
    CHECK(s.handle(check()).status == 200);
  }

  TEST_CASE("concurrent admissions never exceed the quota") {
    FakeClock fc;
    QuotaLedger ledger({ApiKeyRecord{"k", 1000, 10}}, fc.clock());
    std::atomic<int> granted{0};
    {
      std::vector<std::jthread> clients;
      for (int t = 0; t < 32; ++t) {
        clients.emplace_back([&] {
          for (int i = 0; i < 50; ++i) {
            if (ledger.admit("k", QuotaKind::CheckAccount, 1).granted) ++granted;
          }
        });
      }
    }
    CHECK(granted == 1000);
    CHECK(ledger.used("k", QuotaKind::CheckAccount) == 1000);
  }

  TEST_CASE("default quotas") {
    CHECK(static_cast<double>(kDefaultLiteQuota) / kDefaultCheckQuota >= 199);
    FakeClock fc;
    QuotaLedger ledger({ApiKeyRecord{"k"}}, fc.clock());
    for (int i = 0; i < kDefaultCheckQuota; ++i) {
      REQUIRE(ledger.admit("k", QuotaKind::CheckAccount, 1).granted);
    }
    CHECK_FALSE(ledger.admit("k", QuotaKind::CheckAccount, 1).granted);
    CHECK(ledger.admit("k", QuotaKind::LiteUsers, 100).granted);
    CHECK_FALSE(ledger.admit("nobody", QuotaKind::LiteUsers, 1).known_key);
  }

  TEST_CASE("key file parsing") {
    testing::TempDir dir("keys");
    const auto path = dir.path / "keys.txt";
    std::ofstream(path) << "# comment\n\nalpha\nbeta, 5\ngamma,6,7\n";
    const auto keys = load_api_keys(path);
    REQUIRE(keys.size() == 3);
    CHECK(keys[0].quota_check_account == kDefaultCheckQuota);
    CHECK(keys[1].quota_check_account == 5);
    CHECK(keys[1].quota_lite_users == kDefaultLiteQuota);
    CHECK(keys[2].quota_lite_users == 7);
    std::ofstream(path) << "delta,-1\n";
    CHECK_THROWS_AS(load_api_keys(path), ValidationError);
    CHECK_THROWS_AS(load_api_keys(dir.path / "missing.txt"), IoError);
    CHECK(load_api_keys(testing::fixture("keys.txt")).size() >= 1);
  }

  TEST_CASE("configuration layering") {
    ServiceConfig c = service_config_from_json({{"port", 9000}, {"model", "m.json"}});
    CHECK(c.port == 9000);
    CHECK(c.model_path == "m.json");
    CHECK(c.host == "127.0.0.1");
    std::map<std::string, std::string> env{{"BOTLAB_PORT", "9100"},
                                           {"BOTLAB_PRIOR", "0.3"},
                                           {"BOTLAB_CORS", "1"}};
    auto getenv = [&](const char* k) -> const char* {
      auto it = env.find(k);
      return it == env.end() ? nullptr : it->second.c_str();
    };
    apply_env_overrides(c, getenv);
    CHECK(c.port == 9100);
    CHECK(c.prior == 0.3);
    CHECK(c.cors);
    CHECK(c.model_path == "m.json");
    env["BOTLAB_PORT"] = "eighty";
    CHECK_THROWS_AS(apply_env_overrides(c, getenv), ValidationError);
    env["BOTLAB_PORT"] = "80";
    env["BOTLAB_PRIOR"] = "1.5";
    CHECK_THROWS_AS(apply_env_overrides(c, getenv), ValidationError);
    CHECK_THROWS_AS(service_config_from_json({{"prior", 0}}), ValidationError);
    CHECK(service_config_from_json(to_json(c)).port == c.port);
  }

  TEST_CASE("replaying a request log gives identical bytes") {
    auto run = [] {
      FakeClock fc;
      auto s = make_service(fc, {{"k1", 2, 4}});
      std::ostringstream log;
      s->set_log(&log);
      std::string out;
      const std::vector<Request> reqs{
          check(), {"GET", "/health", "", ""}, check("zz"), check(), check(),
          {"POST", "/check_accounts_in_bulk", "k1", json::array({lite_entry("a")}).dump()}};
      for (const auto& r : reqs) {
        const Response resp = s->handle(r);
        out += std::to_string(resp.status) + " " + resp.body + "\n";
      }
      return std::pair{out, log.str()};
    };
    const auto a = run();
    const auto b = run();
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
    CHECK(a.second.find("k1") == std::string::npos);
  }
}
