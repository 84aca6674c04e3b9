#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cgx/errors.hpp"
#include "cgx/experiment.hpp"

namespace py = pybind11;
using namespace cgx;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IntArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const DoubleArray& a) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-d array");
  Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), m.values().begin());
  return m;
}

Labels to_labels(const IntArray& a) {
  if (a.ndim() != 1) throw ShapeError("expected a 1-d label array");
  return Labels(a.data(), a.data() + a.size());
}

DoubleArray from_matrix(const Matrix& m) {
  DoubleArray out({m.rows(), m.cols()});
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

IntArray from_labels(const Labels& y) {
  IntArray out(static_cast<py::ssize_t>(y.size()));
  std::copy(y.begin(), y.end(), out.mutable_data());
  return out;
}

ExtractionConfig extraction_config(const std::string& config_json) {
  if (config_json.empty()) return default_experiment_config().extraction;
  return config_from_json(config_json).extraction;
}

}  // namespace

PYBIND11_MODULE(_cgx, m) {
  m.doc() = "Rule-set surrogates for neural networks via column generation";

  // Translators run newest first, so the base class goes first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);

  m.def(
      "generate_xor",
      [](std::size_t n, std::size_t dims, std::uint64_t seed, double label_noise, bool third) {
        const Dataset ds = generate_xor(n, dims, seed, {label_noise, third});
        return py::make_tuple(from_matrix(ds.features), from_labels(ds.labels));
      },
      py::arg("n_samples") = 1000, py::arg("dims") = 10, py::arg("seed") = 42,
      py::arg("label_noise") = 0.0, py::arg("third_feature") = false);

  py::class_<MlpModel>(m, "Model")
      .def_property_readonly("input_dim", &MlpModel::input_dim)
      .def_property_readonly("hidden_layers", &MlpModel::hidden_layer_count)
      .def("predict", [](const MlpModel& model, const DoubleArray& X) {
        return from_labels(predict_labels(model, to_matrix(X)));
      })
      .def("predict_proba", [](const MlpModel& model, const DoubleArray& X) {
        return from_matrix(predict_proba(model, to_matrix(X)));
      })
      .def("to_json", &model_to_json)
      .def_static("from_json", &model_from_json);

  m.def(
      "train_mlp",
      [](const DoubleArray& X, const IntArray& y, std::vector<std::size_t> topology,
         std::size_t epochs, double lr, std::uint64_t seed) {
        TrainOptions opts;
        opts.topology = std::move(topology);
        opts.epochs = epochs;
        opts.learning_rate = lr;
        opts.seed = seed;
        return train(to_matrix(X), to_labels(y), opts).model;
      },
      py::arg("X"), py::arg("y"), py::arg("topology") = std::vector<std::size_t>{64, 32},
      py::arg("epochs") = 200, py::arg("lr") = 0.01, py::arg("seed") = 0);

  py::class_<RuleSet>(m, "RuleSet")
      .def_property_readonly("positive_class", &RuleSet::positive_class)
      .def_property_readonly("n_rules", [](const RuleSet& rs) { return rs.complexity().n_rules; })
      .def_property_readonly("n_terms", [](const RuleSet& rs) { return rs.complexity().n_terms; })
      .def("predict",
           [](const RuleSet& rs, const DoubleArray& X) { return from_labels(rs.predict(to_matrix(X))); })
      .def("to_text", [](const RuleSet& rs) { return to_text(rs); })
      .def("to_json", [](const RuleSet& rs) { return to_json(rs); })
      .def_static("from_json", [](const std::string& text) { return from_json(text); })
      .def("__eq__", [](const RuleSet& a, const RuleSet& b) { return rulesets_equal(a, b); })
      .def("__str__", [](const RuleSet& rs) { return to_text(rs); });

  m.def(
      "extract",
      [](const MlpModel& model, const DoubleArray& X, const std::string& mode,
         const std::string& config_json) {
        const Matrix features = to_matrix(X);
        const ExtractionConfig cfg = extraction_config(config_json);
        const ExtractionResult r = parse_mode(mode) == Mode::kPed ? cgx_ped(model, features, cfg)
                                                                  : cgx_dec(model, features, cfg);
        py::dict out;
        out["ruleset"] = r.ruleset;
        out["ped_fidelity"] = r.ped_fidelity;
        out["final_fidelity"] = r.final_fidelity;
        out["admissions"] = r.admissions.size();
        return out;
      },
      py::arg("model"), py::arg("X"), py::arg("mode") = "ped", py::arg("config_json") = "");

  m.def("fidelity", [](const IntArray& a, const IntArray& b) {
    return fidelity(to_labels(a), to_labels(b));
  });
  m.def(
      "rbo",
      [](const std::vector<std::size_t>& s, const std::vector<std::size_t>& t, double p) {
        return rbo(s, t, p);
      },
      py::arg("s"), py::arg("t"), py::arg("p") = kDefaultRboP);

  m.def("default_config", []() { return config_to_json(default_experiment_config()); });
  m.def(
      "run_experiment",
      [](const std::string& config_json, bool write_files) {
        const ExperimentConfig cfg = config_from_json(config_json);
        ExperimentOutcome outcome;
        {
          py::gil_scoped_release release;
          outcome = run_experiment(cfg, write_files);
        }
        py::dict out;
        out["summary_csv"] = outcome.summary_csv;
        out["folds_csv"] = outcome.folds_csv;
        out["decomposition_csv"] = outcome.decomposition_csv;
        out["failed"] = outcome.failed;
        return out;
      },
      py::arg("config_json"), py::arg("write_files") = false);
}
