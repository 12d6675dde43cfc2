#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "botlab/ensemble.hpp"
#include "botlab/lite.hpp"

namespace botlab {

inline constexpr std::int64_t kDefaultCheckQuota = 43'200;
inline constexpr std::int64_t kDefaultLiteQuota = 8'600'000;

struct ApiKeyRecord {
  std::string key;
  std::int64_t quota_check_account = kDefaultCheckQuota;
  std::int64_t quota_lite_users = kDefaultLiteQuota;
};

/// Flat key file: one `key[,quota_check_account[,quota_lite_users]]` per
/// line; blank lines and lines starting with '#' are skipped.
std::vector<ApiKeyRecord> load_api_keys(const std::filesystem::path& path,
                                        std::int64_t default_check = kDefaultCheckQuota,
                                        std::int64_t default_lite = kDefaultLiteQuota);

using Clock = std::function<Timestamp()>;
Timestamp system_now();

enum class QuotaKind { CheckAccount, LiteUsers };

struct Admission {
  bool known_key = false;
  bool granted = false;
  std::int64_t used = 0;   // after this admission
  std::int64_t quota = 0;
  Timestamp reset_at;      // next UTC midnight
};

/// Per-key daily counters. Windows are UTC calendar days; admission is an
/// atomic all-or-nothing check-and-increment.
class QuotaLedger {
 public:
  QuotaLedger(std::vector<ApiKeyRecord> keys, Clock clock);

  bool known(const std::string& key) const;
  Admission admit(const std::string& key, QuotaKind kind, std::int64_t units);
  std::int64_t used(const std::string& key, QuotaKind kind) const;

 private:
  struct Counter {
    ApiKeyRecord record;
    Timestamp window_start;
    std::int64_t used_check = 0;
    std::int64_t used_lite = 0;
  };
  void roll(Counter& c, Timestamp now) const;

  std::map<std::string, Counter> counters_;
  Clock clock_;
  mutable std::mutex mu_;
};

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string model_path;
  std::string calibration_path;
  std::string lite_path;
  std::string keys_path;
  double prior = kDefaultPrior;
  std::int64_t quota_check_account = kDefaultCheckQuota;
  std::int64_t quota_lite_users = kDefaultLiteQuota;
  std::size_t bulk_page_size = 100;
  std::string request_log;
  std::string static_dir;
  bool cors = false;
  int threads = 8;
};

ServiceConfig service_config_from_json(const json& j);
ServiceConfig load_service_config(const std::filesystem::path& path);
/// Applies BOTLAB_HOST, BOTLAB_PORT, BOTLAB_MODEL, BOTLAB_CALIBRATION,
/// BOTLAB_LITE, BOTLAB_KEYS, BOTLAB_PRIOR, BOTLAB_QUOTA_CHECK,
/// BOTLAB_QUOTA_LITE, BOTLAB_BULK_PAGE_SIZE, BOTLAB_REQUEST_LOG,
/// BOTLAB_STATIC_DIR and BOTLAB_CORS. `getenv` is injectable for tests. On
/// error the config is left unchanged.
void apply_env_overrides(ServiceConfig& config,
                         const std::function<const char*(const char*)>& getenv);
json to_json(const ServiceConfig& config);

struct LoadedModels {
  EscModel esc;
  std::optional<Calibration> calibration;
  std::optional<LiteModel> lite;
};

/// Reads the artifacts named in the config and rescales the calibration to
/// the configured prior.
std::shared_ptr<const LoadedModels> load_models(const ServiceConfig& config);

struct Request {
  std::string method;
  std::string path;
  std::string api_key;  // X-Api-Key header
  std::string body;
};

struct Response {
  int status = 200;
  std::string body;
  std::map<std::string, std::string> headers;
};

inline constexpr std::string_view kApiKeyHeader = "X-Api-Key";

/// Transport-independent request handling. Checks run in the order
/// readiness (503), route (404/405), key (401), schema (400), quota (429).
class ScoringService {
 public:
  ScoringService(ServiceConfig config, std::vector<ApiKeyRecord> keys, Clock clock = system_now);

  void load(std::shared_ptr<const LoadedModels> models);
  bool ready() const;
  Response handle(const Request& request);

  /// JSON-lines request log; null disables logging.
  void set_log(std::ostream* log);
  QuotaLedger& ledger() { return ledger_; }
  const ServiceConfig& config() const { return config_; }

 private:
  Response health() const;
  Response check_account(const Request& request, const LoadedModels& models);
  Response check_bulk(const Request& request, const LoadedModels& models);
  void log(const Request& request, const Response& response);

  ServiceConfig config_;
  QuotaLedger ledger_;
  Clock clock_;
  std::shared_ptr<const LoadedModels> models_;
  mutable std::mutex models_mu_;
  std::ostream* log_ = nullptr;
  std::mutex log_mu_;
};

/// Serves `service` over HTTP until the process is stopped.
void run_http_server(ScoringService& service);

}  // namespace botlab
