// Python bindings: classifiers, statistics, ingestion and the benchmark runner.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "plknn/benchmark.hpp"

namespace py = pybind11;
using namespace plknn;

namespace {

Dataset make_dataset(const std::vector<FeatureVector>& x, const std::vector<Label>& y) {
  Dataset d;
  d.samples = x;
  d.labels = y;
  d.class_count = y.empty() ? 0 : *std::max_element(y.begin(), y.end()) + 1;
  d.validate();
  return d;
}

py::dict prediction_dict(const Prediction& p) {
  py::dict out;
  out["label"] = p.label;
  out["scores"] = p.scores;
  out["fallback"] = p.fallback_used;
  return out;
}

}  // namespace

PYBIND11_MODULE(_plknn, m) {
  m.doc() = "Parameterless k-NN and baselines";

  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<FitError>(m, "FitError", PyExc_RuntimeError);
  py::register_exception<IngestError>(m, "IngestError", PyExc_RuntimeError);
  py::register_exception<SplitError>(m, "SplitError", PyExc_RuntimeError);
  py::register_exception<ModelFormatError>(m, "ModelFormatError", PyExc_RuntimeError);

  m.def("euclidean_distance", [](const FeatureVector& a, const FeatureVector& b) {
    return euclidean_distance(a, b);
  });
  m.def("manhattan_distance", [](const FeatureVector& a, const FeatureVector& b) {
    return manhattan_distance(a, b);
  });

  py::class_<StoredModel>(m, "Model")
      .def_property_readonly("method", [](const StoredModel& s) { return std::string(method_id(s.method())); })
      .def_property_readonly("n_features", [](const StoredModel& s) { return s.train().feature_dim(); })
      .def_property_readonly("n_classes", [](const StoredModel& s) { return s.train().class_count; })
      .def_property_readonly("centroids",
                             [](const StoredModel& s) -> std::optional<std::vector<FeatureVector>> {
                               return std::visit(
                                   [](const auto& model) -> std::optional<std::vector<FeatureVector>> {
                                     if constexpr (requires { model.centroids(); }) return model.centroids();
                                     return std::nullopt;
                                   },
                                   s.model);
                             })
      .def("predict_one",
           [](const StoredModel& s, const FeatureVector& x) { return prediction_dict(s.predict(x)); },
           py::arg("x"))
      .def("predict",
           [](const StoredModel& s, const std::vector<FeatureVector>& xs) {
             std::vector<Label> out;
             out.reserve(xs.size());
             for (const auto& x : xs) out.push_back(s.predict(x).label);
             return out;
           },
           py::arg("X"))
      .def("dumps",
           [](const StoredModel& s) {
             std::ostringstream out;
             save_model(out, s);
             return out.str();
           })
      .def_static(
          "loads",
          [](const std::string& text) {
            std::istringstream in(text);
            return load_model(in);
          },
          py::arg("text"));

  m.def(
      "fit",
      [](const std::string& method, const std::vector<FeatureVector>& x, const std::vector<Label>& y,
         std::size_t k) { return StoredModel{fit_model(parse_method(method), make_dataset(x, y), k), std::nullopt}; },
      py::arg("method"), py::arg("X"), py::arg("y"), py::arg("k") = 1,
      "Fit 'plknn', 'smknn', 'lmknn' or 'knn' on rows X with labels 0..n-1.");

  m.def(
      "tune_k",
      [](const std::vector<FeatureVector>& xt, const std::vector<Label>& yt,
         const std::vector<FeatureVector>& xv, const std::vector<Label>& yv, std::size_t k_max) {
        auto train = make_dataset(xt, yt);
        auto validation = make_dataset(xv, yv);
        validation.class_count = train.class_count;
        return tune_k(train, validation, k_max);
      },
      py::arg("X_train"), py::arg("y_train"), py::arg("X_val"), py::arg("y_val"), py::arg("k_max") = 50);

  m.def(
      "wilcoxon",
      [](const std::vector<double>& x, const std::vector<double>& y, double alpha, const std::string& method) {
        WilcoxonMethod wm = WilcoxonMethod::automatic;
        if (method == "exact") {
          wm = WilcoxonMethod::exact;
        } else if (method == "normal") {
          wm = WilcoxonMethod::normal;
        } else if (method != "auto") {
          throw ConfigError("method must be 'auto', 'exact' or 'normal'");
        }
        const auto r = wilcoxon_signed_rank(x, y, alpha, wm);
        py::dict out;
        out["statistic"] = r.statistic;
        out["p_value"] = r.p_value;
        out["reject"] = r.reject_at_alpha;
        out["n_effective"] = r.n_effective;
        return out;
      },
      py::arg("x"), py::arg("y"), py::arg("alpha") = 0.05, py::arg("method") = "auto");

  m.def(
      "friedman_ranks",
      [](const std::vector<std::vector<double>>& values, bool higher_is_better) {
        ScoreMatrix s;
        s.values = values;
        for (std::size_t i = 0; i < values.size(); ++i) s.row_names.push_back(std::to_string(i));
        if (!values.empty()) {
          for (std::size_t j = 0; j < values.front().size(); ++j) s.column_names.push_back(std::to_string(j));
        }
        return friedman_average_ranks(s, higher_is_better);
      },
      py::arg("values"), py::arg("higher_is_better") = true);

  m.def("nemenyi_cd", &nemenyi_critical_difference, py::arg("k_methods"), py::arg("n_datasets"),
        py::arg("alpha") = 0.05);

  m.def(
      "load_dataset",
      [](const std::string& path, const std::string& label, const std::vector<std::string>& drop,
         const std::string& impute) {
        DatasetSpec spec;
        spec.path = path;
        spec.label_column = label;
        spec.drop_columns = drop;
        if (impute == "drop") {
          spec.impute = ImputePolicy::drop_rows;
        } else if (impute != "median") {
          throw ConfigError("impute must be 'median' or 'drop'");
        }
        const auto loaded = load_dataset(spec);
        py::dict out;
        out["X"] = loaded.data.samples;
        out["y"] = loaded.data.labels;
        out["classes"] = loaded.data.class_names;
        out["features"] = loaded.data.feature_names;
        out["cells_imputed"] = loaded.cells_imputed;
        out["rows_dropped"] = loaded.rows_dropped;
        return out;
      },
      py::arg("path"), py::arg("label") = "last", py::arg("drop") = std::vector<std::string>{},
      py::arg("impute") = "median");

  m.def(
      "stratified_splits",
      [](const std::vector<Label>& y, std::size_t folds, std::uint64_t seed) {
        Dataset d;
        d.labels = y;
        d.samples.assign(y.size(), FeatureVector{0.0});
        d.class_count = y.empty() ? 0 : *std::max_element(y.begin(), y.end()) + 1;
        SplitPlan plan;
        plan.n_folds = folds;
        plan.seed = seed;
        std::vector<std::tuple<std::vector<std::size_t>, std::vector<std::size_t>, std::vector<std::size_t>>> out;
        for (const auto& f : stratified_splits(d, plan)) out.emplace_back(f.train, f.validation, f.test);
        return out;
      },
      py::arg("y"), py::arg("folds") = 20, py::arg("seed") = 2022);

  m.def(
      "run_benchmark",
      [](const std::filesystem::path& config, std::optional<std::filesystem::path> out_dir) {
        auto cfg = load_config(config);
        if (out_dir) cfg.out_dir = *out_dir;
        BenchmarkResult result;
        {
          py::gil_scoped_release release;
          result = run_benchmark(cfg);
          write_outputs(result, cfg.out_dir);
        }
        py::dict failures;
        for (const auto& d : result.datasets) {
          if (d.failed()) failures[py::str(d.name)] = d.error;
        }
        py::dict out;
        out["summary"] = render_report(result, ReportFormat::text);
        out["out_dir"] = cfg.out_dir;
        out["failures"] = failures;
        out["mean_ranks"] = result.mean_ranks;
        out["critical_difference"] = result.critical_difference;
        return out;
      },
      py::arg("config"), py::arg("out_dir") = std::nullopt,
      "Run a JSON-described experiment, write its five output files and return a summary.");

  m.attr("__version__") = std::string(kArtifactVersion);
}
