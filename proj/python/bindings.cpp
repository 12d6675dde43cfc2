// Python bindings. Structured values cross the boundary as JSON text and are
// decoded by the pure-Python wrapper in botlab/__init__.py.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "botlab/analysis.hpp"
#include "botlab/ensemble.hpp"
#include "botlab/error.hpp"
#include "botlab/features.hpp"
#include "botlab/lite.hpp"
#include "botlab/synth.hpp"

namespace py = pybind11;
using namespace botlab;

namespace {

LabeledDataset synth(const std::map<std::string, std::int64_t>& counts, std::uint64_t seed,
                     double gray, const std::string& name) {
  SynthSpec spec;
  spec.name = name;
  spec.gray_fraction = gray;
  for (const auto& [k, v] : counts) spec.counts[parse_archetype(k)] = v;
  return synthesize_corpus(spec, seed);
}

ForestParams forest_params(int n_trees, int max_depth, int min_leaf, int n_threads) {
  ForestParams p;
  p.n_trees = n_trees;
  p.max_depth = max_depth;
  p.min_leaf = min_leaf;
  p.n_threads = n_threads;
  return p;
}

std::string payload_json(const LabeledDataset& ds, std::size_t i) {
  return to_json(ds.records.at(i).payload).dump();
}

}  // namespace

PYBIND11_MODULE(_botlab, m) {
  m.doc() = "botlab native core";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<VersionMismatch>(m, "VersionMismatch", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<LabeledDataset>(m, "Dataset")
      .def_readonly("name", &LabeledDataset::name)
      .def_property_readonly("bot_count", &LabeledDataset::bot_count)
      .def_property_readonly("human_count", &LabeledDataset::human_count)
      .def("__len__", [](const LabeledDataset& d) { return d.records.size(); })
      .def("payload_json", &payload_json, py::arg("index"))
      .def("label", [](const LabeledDataset& d, std::size_t i) {
        return std::string(to_string(d.records.at(i).label));
      })
      .def("save", [](const LabeledDataset& d, const std::string& dir) { save_dataset(d, dir); });

  m.def("synthesize", &synth, py::arg("counts"), py::arg("seed") = 42, py::arg("gray") = 0.0,
        py::arg("name") = "synthetic");
  m.def("load_dataset", [](const std::string& dir, const std::string& name) {
    return load_dataset(dir, name);
  }, py::arg("dir"), py::arg("name"));
  m.def("registry_json", [] { return to_json(default_registry()).dump(); });

  py::class_<EscModel>(m, "EscModel")
      .def_readonly("version", &EscModel::version)
      .def_property_readonly("classes", [](const EscModel& e) {
        std::vector<std::string> out;
        for (auto c : e.class_list) out.emplace_back(to_string(c));
        return out;
      })
      .def("to_json", [](const EscModel& e) { return to_json(e).dump(); })
      .def_static("from_json", [](const std::string& s) { return esc_from_json(json::parse(s)); })
      .def("score_json", [](const EscModel& e, const std::string& payload) {
        return to_json(score_account(e, payload_from_json(json::parse(payload)))).dump();
      }, py::arg("payload_json"), py::call_guard<py::gil_scoped_release>());

  m.def("train_esc", [](const std::vector<LabeledDataset>& datasets, std::uint64_t seed,
                        int n_trees, int max_depth, int min_leaf, int n_threads) {
    return train_esc(datasets, default_registry(), forest_params(n_trees, max_depth, min_leaf, n_threads), seed);
  }, py::arg("datasets"), py::arg("seed") = 42, py::arg("n_trees") = 100, py::arg("max_depth") = 12,
     py::arg("min_leaf") = 2, py::arg("n_threads") = 1, py::call_guard<py::gil_scoped_release>());

  m.def("cross_validate", [](const std::vector<LabeledDataset>& datasets, int k, std::uint64_t seed,
                             int n_trees) {
    std::vector<LabeledVector> data;
    for (const auto& d : datasets) {
      for (const auto& r : d.records) data.push_back({extract_full(r.payload, default_registry()), r.label});
    }
    ForestParams p;
    p.n_trees = n_trees;
    const EvalReport ev = cross_validate(data, p, k, seed);
    return py::make_tuple(ev.auc, ev.per_fold_auc);
  }, py::arg("datasets"), py::arg("k") = 5, py::arg("seed") = 42, py::arg("n_trees") = 100);

  py::class_<Calibration>(m, "Calibration")
      .def_readonly("version", &Calibration::version)
      .def_readonly("model_version", &Calibration::model_version)
      .def("to_json", [](const Calibration& c) { return to_json(c).dump(); })
      .def("cap", [](const Calibration& c, double raw, bool universal) {
        return cap_lookup(universal ? c.universal : c.english, raw);
      }, py::arg("raw"), py::arg("universal") = false);

  m.def("calibrate", [](const EscModel& model, const std::vector<LabeledDataset>& datasets, double prior) {
    return calibrate_model(model, datasets, prior);
  }, py::arg("model"), py::arg("datasets"), py::arg("prior") = kDefaultPrior);

  m.def("cap_from_scores", [](const std::vector<std::pair<double, bool>>& scores, double prior, double raw) {
    std::vector<LabeledScore> ls;
    for (const auto& [s, bot] : scores) ls.push_back({s, bot ? Label::Bot : Label::Human});
    return cap_lookup(calibrate(ls, prior), raw);
  }, py::arg("scores"), py::arg("prior"), py::arg("raw"));

  m.def("to_display", &to_display, py::arg("raw"));
  m.def("auc", [](const std::vector<double>& pos, const std::vector<double>& neg) { return auc(pos, neg); },
        py::arg("pos"), py::arg("neg"));

  m.def("mann_whitney_u_json", [](const std::vector<double>& a, const std::vector<double>& b) {
    return to_json(mann_whitney_u(a, b)).dump();
  }, py::arg("a"), py::arg("b"));
  m.def("two_proportion_z_json", [](std::int64_t k1, std::int64_t n1, std::int64_t k2, std::int64_t n2) {
    return to_json(two_proportion_z(k1, n1, k2, n2)).dump();
  }, py::arg("k1"), py::arg("n1"), py::arg("k2"), py::arg("n2"));
  m.def("stars", &stars, py::arg("p"));

  py::class_<LiteModel>(m, "LiteModel")
      .def_readonly("version", &LiteModel::version)
      .def_readonly("selected_datasets", &LiteModel::selected_datasets)
      .def("selection_csv", [](const LiteModel& l) { return selection_csv(l); })
      .def("score_user_json", [](const LiteModel& l, const std::string& user, const std::string& probe) {
        return score_lite(l, user_from_json(json::parse(user)), parse_timestamp(probe));
      }, py::arg("user_json"), py::arg("probe_time"));

  m.def("train_lite", [](const std::vector<LabeledDataset>& datasets, std::uint64_t seed, int n_trees) {
    ForestParams p;
    p.n_trees = n_trees;
    return train_lite(datasets, p, seed);
  }, py::arg("datasets"), py::arg("seed") = 42, py::arg("n_trees") = 100);

  m.def("select_training_sets", [](const std::vector<LabeledDataset>& candidates, const LabeledDataset& holdout,
                                   const EscModel& reference, std::vector<double> weights, std::uint64_t seed,
                                   int n_trees) {
    if (weights.size() != 3) throw ValidationError("weights must have three entries");
    SelectionOptions opt;
    opt.params.n_trees = n_trees;
    return select_training_sets(candidates, holdout, reference, {weights[0], weights[1], weights[2]}, opt, seed);
  }, py::arg("candidates"), py::arg("holdout"), py::arg("reference"),
     py::arg("weights") = std::vector<double>{1, 1, 1}, py::arg("seed") = 42, py::arg("n_trees") = 100,
     py::call_guard<py::gil_scoped_release>());
}
