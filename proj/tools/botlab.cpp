// botlab command-line entry point.
#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "botlab/analysis.hpp"
#include "botlab/ensemble.hpp"
#include "botlab/error.hpp"
#include "botlab/features.hpp"
#include "botlab/lite.hpp"
#include "botlab/service.hpp"
#include "botlab/synth.hpp"

namespace fs = std::filesystem;
using namespace botlab;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitVersion = 4;

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::vector<LabeledDataset> load_datasets(const std::vector<std::string>& dirs) {
  std::vector<LabeledDataset> out;
  for (const auto& d : dirs) out.push_back(load_dataset(d, fs::path(d).filename().string()));
  return out;
}

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::map<std::string, ScoreReport> read_reports(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::map<std::string, ScoreReport> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      ScoreReport r = score_report_from_json(json::parse(line));
      out[r.user_id] = std::move(r);
    } catch (const json::exception& e) {
      throw ValidationError(path + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

EscModel load_esc(const std::string& path) { return esc_from_json(read_json(path)); }

struct ForestFlags {
  int trees = 100;
  int depth = 12;
  int min_leaf = 2;
  int features = 0;
  int threads = 1;

  void add(CLI::App* app) {
    app->add_option("--trees", trees, "Trees per forest")->capture_default_str();
    app->add_option("--max-depth", depth, "Maximum tree depth")->capture_default_str();
    app->add_option("--min-leaf", min_leaf, "Minimum examples per leaf")->capture_default_str();
    app->add_option("--features-per-split", features, "0 = ceil(sqrt(d))")->capture_default_str();
    app->add_option("--threads", threads, "Tree-building threads")->capture_default_str();
  }
  ForestParams params() const { return {trees, depth, min_leaf, features, threads}; }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"botlab: bot scoring, calibration and case-study analysis"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML/INI file with option values");
  std::uint64_t seed = 42;
  app.add_option("--seed", seed, "Master seed for all randomness")->capture_default_str();

  std::function<void()> action;

  // datasets
  auto* datasets = app.add_subcommand("datasets", "Create, inspect and export corpora");
  datasets->require_subcommand(1);

  auto* synth = datasets->add_subcommand("synth", "Generate a labeled synthetic corpus");
  std::string synth_out, synth_name = "synthetic", synth_config;
  std::map<std::string, std::int64_t> counts{{"human", 0}, {"spammer", 0}, {"fake_follower", 0},
                                             {"self_declared", 0}, {"astroturf", 0}};
  double gray = 0.0;
  synth->add_option("--out", synth_out, "Output dataset directory")->required();
  synth->add_option("--name", synth_name, "Dataset name (prefix of user ids)")->capture_default_str();
  synth->add_option("--humans", counts["human"])->capture_default_str();
  synth->add_option("--spammers", counts["spammer"])->capture_default_str();
  synth->add_option("--fake-followers", counts["fake_follower"])->capture_default_str();
  synth->add_option("--self-declared", counts["self_declared"])->capture_default_str();
  synth->add_option("--astroturf", counts["astroturf"])->capture_default_str();
  synth->add_option("--gray", gray, "Fraction of blended accounts")->check(CLI::Range(0.0, 1.0));
  synth->add_option("--synth-config", synth_config, "Archetype parameter file");
  synth->callback([&] {
    action = [&] {
      SynthSpec spec;
      spec.name = synth_name;
      spec.gray_fraction = gray;
      if (!synth_config.empty()) spec.config = load_synth_config(synth_config);
      for (const auto& [k, v] : counts) spec.counts[parse_archetype(k)] = v;
      const LabeledDataset ds = synthesize_corpus(spec, seed);
      save_dataset(ds, synth_out);
      std::cout << json{{"name", ds.name}, {"bots", ds.bot_count()}, {"humans", ds.human_count()}}.dump()
                << "\n";
    };
  });

  auto* dload = datasets->add_subcommand("load", "Validate a dataset directory and report counts");
  std::string load_dir, load_name;
  dload->add_option("--dir", load_dir)->required()->check(CLI::ExistingDirectory);
  dload->add_option("--name", load_name);
  dload->callback([&] {
    action = [&] {
      const auto ds = load_dataset(load_dir, load_name.empty() ? fs::path(load_dir).filename().string() : load_name);
      std::cout << json{{"name", ds.name}, {"bots", ds.bot_count()}, {"humans", ds.human_count()}}.dump()
                << "\n";
    };
  });

  auto* dcase = datasets->add_subcommand("casestudy", "Generate the cashtag case-study fixture");
  std::string case_out;
  std::int64_t case_scale = 1;
  dcase->add_option("--out", case_out)->required();
  dcase->add_option("--scale", case_scale, "Divide every count by this factor")->capture_default_str();
  dcase->callback([&] {
    action = [&] {
      CaseStudySpec spec = CaseStudySpec::reference_counts();
      if (case_scale != 1) spec = spec.scaled(case_scale);
      const CaseStudyFixture fx = synthesize_case_study(spec, seed, true);
      fs::create_directories(case_out);
      for (const auto& g : spec.groups) {
        write_tweets_jsonl(fs::path(case_out) / (lower(g.cashtag) + ".jsonl"),
                           group_tweets_by_query(fx.tweets, g.cashtag));
      }
      write_payloads_jsonl(fs::path(case_out) / "authors.jsonl", fx.author_payloads);
    };
  });

  auto* dreg = datasets->add_subcommand("registry", "Export the feature registry");
  std::string reg_out;
  dreg->add_option("--out", reg_out)->required();
  dreg->callback([&] { action = [&] { write_json(reg_out, to_json(default_registry())); }; });

  auto* dcfg = datasets->add_subcommand("synth-config", "Export the built-in archetype parameters");
  std::string cfg_out;
  dcfg->add_option("--out", cfg_out)->required();
  dcfg->callback([&] { action = [&] { write_json(cfg_out, to_json(default_synth_config())); }; });

  // train
  auto* train = app.add_subcommand("train", "Train the specialized-classifier ensemble");
  std::vector<std::string> train_data;
  std::string train_out, train_eval;
  int train_folds = 5;
  ForestFlags train_flags;
  train->add_option("--data", train_data, "Dataset directories")->required()->check(CLI::ExistingDirectory);
  train->add_option("--out", train_out, "Model file")->required();
  train->add_option("--eval-out", train_eval, "Write pooled cross-validation report here");
  train->add_option("--folds", train_folds)->capture_default_str();
  train_flags.add(train);
  train->callback([&] {
    action = [&] {
      const auto ds = load_datasets(train_data);
      const EscModel model = train_esc(ds, default_registry(), train_flags.params(), seed);
      write_json(train_out, to_json(model));
      if (!train_eval.empty()) {
        std::vector<LabeledVector> data;
        for (const auto& d : ds) {
          for (const auto& r : d.records) data.push_back({extract_full(r.payload, default_registry()), r.label});
        }
        const EvalReport ev = cross_validate(data, train_flags.params(), train_folds, seed);
        write_json(train_eval, {{"auc", ev.auc},
                                {"per_fold_auc", ev.per_fold_auc},
                                {"n_folds", ev.n_folds},
                                {"reference_threshold", ev.reference_threshold},
                                {"accuracy", ev.accuracy()},
                                {"confusion",
                                 {{"true_pos", ev.true_pos},
                                  {"false_pos", ev.false_pos},
                                  {"true_neg", ev.true_neg},
                                  {"false_neg", ev.false_neg}}}});
      }
      std::cout << model.version << "\n";
    };
  });

  // calibrate
  auto* calib = app.add_subcommand("calibrate", "Build CAP tables for a model");
  std::string cal_model, cal_out;
  std::vector<std::string> cal_data;
  double cal_prior = kDefaultPrior;
  calib->add_option("--model", cal_model)->required()->check(CLI::ExistingFile);
  calib->add_option("--data", cal_data, "Labeled dataset directories")->required()->check(CLI::ExistingDirectory);
  calib->add_option("--prior", cal_prior, "Bot prevalence")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  calib->add_option("--out", cal_out)->required();
  calib->callback([&] {
    action = [&] {
      const EscModel model = load_esc(cal_model);
      const Calibration cal = calibrate_model(model, load_datasets(cal_data), cal_prior);
      write_json(cal_out, to_json(cal));
      std::cout << cal.version << "\n";
    };
  });

  // select-lite
  auto* sel = app.add_subcommand("select-lite", "Pick training sets for the metadata-only model");
  std::vector<std::string> sel_candidates;
  std::string sel_holdout, sel_model, sel_out, sel_report;
  std::vector<double> sel_weights{1.0, 1.0, 1.0};
  int sel_jobs = 1;
  ForestFlags sel_flags;
  sel->add_option("--candidates", sel_candidates)->required()->delimiter(',')->check(CLI::ExistingDirectory);
  sel->add_option("--holdout", sel_holdout)->required()->check(CLI::ExistingDirectory);
  sel->add_option("--model", sel_model, "Reference ensemble")->required()->check(CLI::ExistingFile);
  sel->add_option("--weights", sel_weights, "cv_accuracy,holdout_auc,consistency")
      ->delimiter(',')->expected(3);
  sel->add_option("--jobs", sel_jobs, "Concurrent subset evaluations")->capture_default_str();
  sel->add_option("--out", sel_out)->required();
  sel->add_option("--report", sel_report, "Selection table CSV");
  sel_flags.add(sel);
  sel->callback([&] {
    action = [&] {
      const auto cands = load_datasets(sel_candidates);
      const auto holdout = load_dataset(sel_holdout, fs::path(sel_holdout).filename().string());
      SelectionOptions opt;
      opt.params = sel_flags.params();
      opt.n_threads = sel_jobs;
      const LiteModel m = select_training_sets(
          cands, holdout, load_esc(sel_model),
          {sel_weights.at(0), sel_weights.at(1), sel_weights.at(2)}, opt, seed);
      write_json(sel_out, to_json(m));
      if (!sel_report.empty()) write_text(sel_report, selection_csv(m));
      std::cout << m.version << "\n";
    };
  });

  // score
  auto* sc = app.add_subcommand("score", "Score account payloads");
  std::string sc_model, sc_cal, sc_input, sc_out;
  sc->add_option("--model", sc_model)->required()->check(CLI::ExistingFile);
  sc->add_option("--calibration", sc_cal)->check(CLI::ExistingFile);
  sc->add_option("--input", sc_input, "Payloads (JSON lines)")->required()->check(CLI::ExistingFile);
  sc->add_option("--out", sc_out, "Score reports (JSON lines)")->required();
  sc->callback([&] {
    action = [&] {
      const EscModel model = load_esc(sc_model);
      std::optional<Calibration> cal;
      if (!sc_cal.empty()) cal = calibration_from_json(read_json(sc_cal));
      std::string out;
      for (const auto& p : read_payloads_jsonl(sc_input)) {
        ScoreReport r = score_account(model, p);
        if (cal) apply_calibration(*cal, r);
        out += to_json(r).dump() + "\n";
      }
      write_text(sc_out, out);
    };
  });

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP scoring service");
  std::string serve_config;
  ServiceConfig service_flags;
  serve->add_option("--service-config", serve_config, "Service JSON config")->check(CLI::ExistingFile);
  serve->add_option("--port", service_flags.port);
  serve->add_option("--model", service_flags.model_path);
  serve->add_option("--calibration", service_flags.calibration_path);
  serve->add_option("--lite", service_flags.lite_path);
  serve->add_option("--keys", service_flags.keys_path);
  serve->callback([&] {
    action = [&] {
      ServiceConfig cfg = serve_config.empty() ? ServiceConfig{} : load_service_config(serve_config);
      apply_env_overrides(cfg, [](const char* n) { return std::getenv(n); });
      if (serve->count("--port")) cfg.port = service_flags.port;
      if (serve->count("--model")) cfg.model_path = service_flags.model_path;
      if (serve->count("--calibration")) cfg.calibration_path = service_flags.calibration_path;
      if (serve->count("--lite")) cfg.lite_path = service_flags.lite_path;
      if (serve->count("--keys")) cfg.keys_path = service_flags.keys_path;
      std::cerr << "service config: " << to_json(cfg).dump() << std::endl;
      if (cfg.keys_path.empty()) throw ValidationError("no key file configured");
      ScoringService svc(cfg, load_api_keys(cfg.keys_path, cfg.quota_check_account, cfg.quota_lite_users));
      std::ofstream log;
      if (!cfg.request_log.empty()) {
        log.open(cfg.request_log, std::ios::app);
        if (!log) throw IoError("cannot open request log " + cfg.request_log);
        svc.set_log(&log);
      }
      svc.load(load_models(cfg));
      run_http_server(svc);
    };
  });

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Case-study statistics and threshold checks");
  analyze->require_subcommand(1);
  auto* acase = analyze->add_subcommand("casestudy", "Compare score distributions across groups");
  std::vector<std::string> groups;
  std::string ac_scores, ac_model, ac_payloads, ac_out, ac_language = "en", ac_unit = "tweet";
  std::vector<double> thresholds{0.5, 0.7};
  int ac_bins = 20;
  acase->add_option("--groups", groups, "Tweet files, one per group")->required()->delimiter(',')->check(CLI::ExistingFile);
  acase->add_option("--scores", ac_scores, "Score reports (JSON lines)")->check(CLI::ExistingFile);
  acase->add_option("--model", ac_model, "Score authors with this model instead")->check(CLI::ExistingFile);
  acase->add_option("--payloads", ac_payloads, "Author payloads for --model")->check(CLI::ExistingFile);
  acase->add_option("--thresholds", thresholds)->delimiter(',')->capture_default_str();
  acase->add_option("--language", ac_language, "Account language filter ('' for none)")->capture_default_str();
  acase->add_option("--unit", ac_unit)->check(CLI::IsMember({"tweet", "account"}))->capture_default_str();
  acase->add_option("--bins", ac_bins)->capture_default_str();
  acase->add_option("--out", ac_out)->required();
  acase->callback([&] {
    action = [&] {
      std::map<std::string, ScoreReport> reports;
      if (!ac_scores.empty()) {
        reports = read_reports(ac_scores);
      } else if (!ac_model.empty() && !ac_payloads.empty()) {
        const EscModel model = load_esc(ac_model);
        for (const auto& p : read_payloads_jsonl(ac_payloads)) reports[p.user.user_id] = score_account(model, p);
      } else {
        throw ValidationError("either --scores or both --model and --payloads are required");
      }
      std::vector<AnalyticalSample> samples;
      std::optional<std::string> lang;
      if (!ac_language.empty()) lang = ac_language;
      for (const auto& g : groups) {
        const auto tweets = read_tweets_jsonl(g);
        samples.push_back(build_sample(upper(fs::path(g).stem().string()), tweets, reports, lang));
      }
      write_json(ac_out, case_study_json(samples, thresholds,
                                         ac_unit == "tweet" ? AnalysisUnit::Tweet : AnalysisUnit::Account,
                                         ac_bins));
    };
  });

  auto* aval = analyze->add_subcommand("validate", "Accuracy/precision/recall/F1 per threshold");
  std::string av_scores, av_data, av_out;
  std::vector<double> av_thresholds{0.5, 0.7};
  std::string av_field = "overall";
  aval->add_option("--scores", av_scores)->required()->check(CLI::ExistingFile);
  aval->add_option("--data", av_data, "Labeled dataset directory")->required()->check(CLI::ExistingDirectory);
  aval->add_option("--thresholds", av_thresholds)->delimiter(',')->capture_default_str();
  aval->add_option("--field", av_field)->check(CLI::IsMember({"overall", "universal"}))->capture_default_str();
  aval->add_option("--out", av_out)->required();
  aval->callback([&] {
    action = [&] {
      const auto reports = read_reports(av_scores);
      const auto ds = load_dataset(av_data, fs::path(av_data).filename().string());
      std::vector<LabeledScore> labeled;
      for (const auto& r : ds.records) {
        auto it = reports.find(r.payload.user.user_id);
        if (it == reports.end()) throw ValidationError("no score for user_id " + r.payload.user.user_id);
        labeled.push_back({av_field == "overall" ? it->second.raw_overall : it->second.raw_universal, r.label});
      }
      json rows = json::array();
      for (const auto& m : threshold_validation(labeled, av_thresholds)) rows.push_back(to_json(m));
      write_json(av_out, rows);
    };
  });

  // probe
  auto* probe = app.add_subcommand("probe", "Append scores to per-account time series");
  std::string pr_model, pr_input, pr_store;
  probe->add_option("--model", pr_model)->required()->check(CLI::ExistingFile);
  probe->add_option("--input", pr_input, "Payloads (JSON lines)")->required()->check(CLI::ExistingFile);
  probe->add_option("--store", pr_store, "Series store (JSON lines)")->required();
  probe->callback([&] {
    action = [&] {
      const EscModel model = load_esc(pr_model);
      SeriesStore store(pr_store);
      for (const auto& p : read_payloads_jsonl(pr_input)) {
        const ScoreReport r = score_account(model, p);
        const ScoreSeries s = record_probe(store, p.user.user_id, p.probe_time, r.raw_overall, model.version);
        std::cout << p.user.user_id << " " << s.points.size() << "\n";
      }
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  std::cerr << "# resolved configuration\n" << app.config_to_str(true, false) << std::flush;
  try {
    if (action) action();
    return 0;
  } catch (const VersionMismatch& e) {
    std::cerr << "version mismatch: " << e.what() << "\n";
    return kExitVersion;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}
