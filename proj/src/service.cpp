#include "botlab/service.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "botlab/error.hpp"
#include "botlab/hash.hpp"
#include "httplib.h"

namespace botlab {
namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::int64_t parse_count(const std::string& text, const std::string& where) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(text, &pos);
    if (pos != text.size() || v < 0) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(where + ": expected a non-negative integer, got '" + text + "'");
  }
}

Response json_response(int status, const json& body) { return {status, body.dump(), {}}; }

Response error_response(int status, const std::string& message) {
  return json_response(status, {{"error", message}});
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

}  // namespace

std::vector<ApiKeyRecord> load_api_keys(const std::filesystem::path& path,
                                        std::int64_t default_check, std::int64_t default_lite) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open key file " + path.string());
  std::vector<ApiKeyRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> parts;
    std::stringstream ss(line);
    for (std::string part; std::getline(ss, part, ',');) parts.push_back(trim(part));
    const std::string where = path.string() + " line " + std::to_string(line_no);
    if (parts.empty() || parts[0].empty() || parts.size() > 3) {
      throw ValidationError(where + ": expected key[,quota_check[,quota_lite]]");
    }
    ApiKeyRecord r{parts[0], default_check, default_lite};
    if (parts.size() > 1 && !parts[1].empty()) r.quota_check_account = parse_count(parts[1], where);
    if (parts.size() > 2 && !parts[2].empty()) r.quota_lite_users = parse_count(parts[2], where);
    out.push_back(std::move(r));
  }
  return out;
}

Timestamp system_now() {
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  return Timestamp{std::chrono::duration_cast<std::chrono::seconds>(now).count()};
}

QuotaLedger::QuotaLedger(std::vector<ApiKeyRecord> keys, Clock clock) : clock_(std::move(clock)) {
  const Timestamp start = utc_day_start(clock_());
  for (auto& k : keys) {
    if (counters_.contains(k.key)) throw ValidationError("duplicate API key in key file");
    std::string name = k.key;
    counters_.emplace(std::move(name), Counter{std::move(k), start, 0, 0});
  }
}

bool QuotaLedger::known(const std::string& key) const {
  std::lock_guard lock(mu_);
  return counters_.contains(key);
}

void QuotaLedger::roll(Counter& c, Timestamp now) const {
  const Timestamp day = utc_day_start(now);
  if (day != c.window_start) {
    c.window_start = day;
    c.used_check = 0;
    c.used_lite = 0;
  }
}

Admission QuotaLedger::admit(const std::string& key, QuotaKind kind, std::int64_t units) {
  const Timestamp now = clock_();
  std::lock_guard lock(mu_);
  Admission a;
  auto it = counters_.find(key);
  if (it == counters_.end()) return a;
  Counter& c = it->second;
  roll(c, now);
  a.known_key = true;
  a.reset_at = Timestamp{c.window_start.seconds + kSecondsPerDay};
  std::int64_t& used = kind == QuotaKind::CheckAccount ? c.used_check : c.used_lite;
  a.quota = kind == QuotaKind::CheckAccount ? c.record.quota_check_account
                                            : c.record.quota_lite_users;
  if (units >= 0 && used + units <= a.quota) {
    used += units;
    a.granted = true;
  }
  a.used = used;
  return a;
}

std::int64_t QuotaLedger::used(const std::string& key, QuotaKind kind) const {
  std::lock_guard lock(mu_);
  auto it = counters_.find(key);
  if (it == counters_.end()) return 0;
  Counter c = it->second;
  roll(c, clock_());
  return kind == QuotaKind::CheckAccount ? c.used_check : c.used_lite;
}

ServiceConfig service_config_from_json(const json& j) {
  try {
    ServiceConfig c;
    c.host = j.value("host", c.host);
    c.port = j.value("port", c.port);
    c.model_path = j.value("model", c.model_path);
    c.calibration_path = j.value("calibration", c.calibration_path);
    c.lite_path = j.value("lite", c.lite_path);
    c.keys_path = j.value("keys", c.keys_path);
    c.prior = j.value("prior", c.prior);
    c.quota_check_account = j.value("quota_check_account", c.quota_check_account);
    c.quota_lite_users = j.value("quota_lite_users", c.quota_lite_users);
    c.bulk_page_size = j.value("bulk_page_size", c.bulk_page_size);
    c.request_log = j.value("request_log", c.request_log);
    c.static_dir = j.value("static_dir", c.static_dir);
    c.cors = j.value("cors", c.cors);
    c.threads = j.value("threads", c.threads);
    if (!(c.prior > 0 && c.prior < 1)) throw ValidationError("prior must lie in (0, 1)");
    if (c.port < 0 || c.port > 65535) throw ValidationError("port out of range");
    return c;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed service config: ") + e.what());
  }
}

ServiceConfig load_service_config(const std::filesystem::path& path) {
  return service_config_from_json(read_json_file(path.string()));
}

void apply_env_overrides(ServiceConfig& config,
                         const std::function<const char*(const char*)>& getenv) {
  ServiceConfig c = config;
  auto str = [&](const char* name, std::string& field) {
    if (const char* v = getenv(name)) field = v;
  };
  auto num = [&](const char* name, auto& field) {
    const char* v = getenv(name);
    if (!v) return;
    try {
      using T = std::decay_t<decltype(field)>;
      if constexpr (std::is_floating_point_v<T>) {
        field = std::stod(v);
      } else {
        field = static_cast<T>(parse_count(v, name));
      }
    } catch (const std::invalid_argument&) {
      throw ValidationError(std::string(name) + ": not a number");
    }
  };
  str("BOTLAB_HOST", c.host);
  num("BOTLAB_PORT", c.port);
  str("BOTLAB_MODEL", c.model_path);
  str("BOTLAB_CALIBRATION", c.calibration_path);
  str("BOTLAB_LITE", c.lite_path);
  str("BOTLAB_KEYS", c.keys_path);
  num("BOTLAB_PRIOR", c.prior);
  num("BOTLAB_QUOTA_CHECK", c.quota_check_account);
  num("BOTLAB_QUOTA_LITE", c.quota_lite_users);
  num("BOTLAB_BULK_PAGE_SIZE", c.bulk_page_size);
  str("BOTLAB_REQUEST_LOG", c.request_log);
  str("BOTLAB_STATIC_DIR", c.static_dir);
  if (const char* v = getenv("BOTLAB_CORS")) c.cors = std::string(v) == "1" || std::string(v) == "true";
  if (!(c.prior > 0 && c.prior < 1)) throw ValidationError("prior must lie in (0, 1)");
  config = std::move(c);
}

json to_json(const ServiceConfig& c) {
  return {{"host", c.host},
          {"port", c.port},
          {"model", c.model_path},
          {"calibration", c.calibration_path},
          {"lite", c.lite_path},
          {"keys", c.keys_path},
          {"prior", c.prior},
          {"quota_check_account", c.quota_check_account},
          {"quota_lite_users", c.quota_lite_users},
          {"bulk_page_size", c.bulk_page_size},
          {"request_log", c.request_log},
          {"static_dir", c.static_dir},
          {"cors", c.cors},
          {"threads", c.threads}};
}

std::shared_ptr<const LoadedModels> load_models(const ServiceConfig& config) {
  if (config.model_path.empty()) throw ValidationError("no model path configured");
  auto m = std::make_shared<LoadedModels>();
  m->esc = esc_from_json(read_json_file(config.model_path));
  if (!config.calibration_path.empty()) {
    Calibration cal = calibration_from_json(read_json_file(config.calibration_path));
    if (cal.model_version != m->esc.version) {
      throw VersionMismatch("calibration " + cal.version + " belongs to model " +
                            cal.model_version + ", loaded model is " + m->esc.version);
    }
    m->calibration = with_prior(std::move(cal), config.prior);
  }
  if (!config.lite_path.empty()) m->lite = lite_from_json(read_json_file(config.lite_path));
  return m;
}

ScoringService::ScoringService(ServiceConfig config, std::vector<ApiKeyRecord> keys, Clock clock)
    : config_(std::move(config)), ledger_(std::move(keys), clock), clock_(std::move(clock)) {}

void ScoringService::load(std::shared_ptr<const LoadedModels> models) {
  std::lock_guard lock(models_mu_);
  models_ = std::move(models);
}

bool ScoringService::ready() const {
  std::lock_guard lock(models_mu_);
  return models_ != nullptr;
}

void ScoringService::set_log(std::ostream* log) {
  std::lock_guard lock(log_mu_);
  log_ = log;
}

void ScoringService::log(const Request& request, const Response& response) {
  std::lock_guard lock(log_mu_);
  if (!log_) return;
  const json line = {{"time", format_timestamp(clock_())},
                     {"method", request.method},
                     {"path", request.path},
                     {"key", request.api_key.empty()
                                 ? std::string()
                                 : content_version("key", request.api_key)},
                     {"status", response.status},
                     {"bytes", response.body.size()}};
  *log_ << line.dump() << '\n';
  log_->flush();
}

Response ScoringService::handle(const Request& request) {
  std::shared_ptr<const LoadedModels> models;
  {
    std::lock_guard lock(models_mu_);
    models = models_;
  }
  Response r;
  const bool known_route = request.path == "/health" || request.path == "/check_account" ||
                           request.path == "/check_accounts_in_bulk";
  if (!known_route) {
    r = error_response(404, "unknown route " + request.path);
  } else if (!models) {
    r = error_response(503, "models not loaded");
  } else if (request.path == "/health") {
    r = request.method == "GET" ? health() : error_response(405, "use GET");
  } else if (request.method != "POST") {
    r = error_response(405, "use POST");
  } else if (!ledger_.known(request.api_key)) {
    r = error_response(401, "unknown API key");
  } else if (request.path == "/check_account") {
    r = check_account(request, *models);
  } else {
    r = check_bulk(request, *models);
  }
  log(request, r);
  return r;
}

Response ScoringService::health() const {
  std::lock_guard lock(models_mu_);
  const auto& m = *models_;
  return json_response(
      200, {{"status", "ok"},
            {"model_version", m.esc.version},
            {"registry_version", m.esc.registry.version},
            {"calibration_version", m.calibration ? json(m.calibration->version) : json()},
            {"lite_version", m.lite ? json(m.lite->version) : json()}});
}

namespace {

Response quota_response(const Admission& a) {
  Response r = json_response(429, {{"error", "daily quota exhausted"},
                                   {"quota", a.quota},
                                   {"used", a.used},
                                   {"reset_at", format_timestamp(a.reset_at)}});
  r.headers["X-Quota-Reset"] = format_timestamp(a.reset_at);
  return r;
}

}  // namespace

Response ScoringService::check_account(const Request& request, const LoadedModels& models) {
  AccountPayload payload;
  try {
    payload = payload_from_json(json::parse(request.body));
  } catch (const json::parse_error& e) {
    return error_response(400, std::string("body is not JSON: ") + e.what());
  } catch (const ValidationError& e) {
    return error_response(400, e.what());
  }
  const Admission a = ledger_.admit(request.api_key, QuotaKind::CheckAccount, 1);
  if (!a.known_key) return error_response(401, "unknown API key");
  if (!a.granted) return quota_response(a);
  ScoreReport report = score_account(models.esc, payload);
  if (models.calibration) apply_calibration(*models.calibration, report);
  return json_response(200, to_json(report));
}

Response ScoringService::check_bulk(const Request& request, const LoadedModels& models) {
  if (!models.lite) return error_response(503, "lite model not loaded");
  json body;
  try {
    body = json::parse(request.body);
  } catch (const json::parse_error& e) {
    return error_response(400, std::string("body is not JSON: ") + e.what());
  }
  if (!body.is_array()) return error_response(400, "body: expected an array of {user, probe_time}");
  if (body.size() > config_.bulk_page_size) {
    return error_response(400, "body: " + std::to_string(body.size()) +
                                   " entries exceed the page size of " +
                                   std::to_string(config_.bulk_page_size));
  }
  const Admission a = ledger_.admit(request.api_key, QuotaKind::LiteUsers,
                                    static_cast<std::int64_t>(body.size()));
  if (!a.known_key) return error_response(401, "unknown API key");
  if (!a.granted) return quota_response(a);
  json out = json::array();
  for (std::size_t i = 0; i < body.size(); ++i) {
    const json& entry = body[i];
    const std::string where = "body[" + std::to_string(i) + "]";
    json row = json::object();
    try {
      if (!entry.is_object()) throw ValidationError(where + ": expected object");
      if (entry.contains("user") && entry["user"].is_object() && entry["user"].contains("user_id") &&
          entry["user"]["user_id"].is_string()) {
        row["user_id"] = entry["user"]["user_id"];
      }
      if (!entry.contains("user")) throw ValidationError(where + ".user: missing");
      if (!entry.contains("probe_time") || !entry["probe_time"].is_string()) {
        throw ValidationError(where + ".probe_time: missing or not a string");
      }
      const UserObject user = user_from_json(entry["user"], where + ".user");
      validate(user);
      const Timestamp probe = parse_timestamp(entry["probe_time"].get<std::string>());
      if (probe < user.created_at) {
        throw ValidationError(where + ".probe_time: before the account was created");
      }
      row["user_id"] = user.user_id;
      row["botscore"] = score_lite(*models.lite, user, probe);
    } catch (const ValidationError& e) {
      row["error"] = e.what();
    }
    out.push_back(std::move(row));
  }
  return json_response(200, out);
}

void run_http_server(ScoringService& service) {
  const ServiceConfig& config = service.config();
  httplib::Server server;
  server.new_task_queue = [n = config.threads] {
    return new httplib::ThreadPool(static_cast<std::size_t>(std::max(1, n)));
  };
  if (!config.static_dir.empty() && !server.set_mount_point("/ui", config.static_dir)) {
    throw IoError("cannot mount static directory " + config.static_dir);
  }
  auto forward = [&service, cors = config.cors](const httplib::Request& req,
                                                httplib::Response& res) {
    Request r{req.method, req.path, req.get_header_value(std::string(kApiKeyHeader)), req.body};
    const Response out = service.handle(r);
    res.status = out.status;
    for (const auto& [k, v] : out.headers) res.set_header(k, v);
    if (cors) {
      res.set_header("Access-Control-Allow-Origin", "*");
      res.set_header("Access-Control-Allow-Headers", "Content-Type, X-Api-Key");
    }
    res.set_content(out.body, "application/json");
  };
  for (const char* path : {"/health", "/check_account", "/check_accounts_in_bulk"}) {
    server.Get(path, forward);
    server.Post(path, forward);
  }
  if (config.cors) {
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", "*");
      res.set_header("Access-Control-Allow-Headers", "Content-Type, X-Api-Key");
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.status = 204;
    });
  }
  std::cerr << "listening on " << config.host << ':' << config.port << std::endl;
  if (!server.listen(config.host, config.port)) {
    throw IoError("cannot listen on " + config.host + ":" + std::to_string(config.port));
  }
}

}  // namespace botlab
