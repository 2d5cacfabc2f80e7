// plknn: fit, predict, benchmark and report from the command line.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "plknn/benchmark.hpp"
#include "plknn/model_io.hpp"

using namespace plknn;

namespace {

const std::map<std::string, Scaling> kScalings{{"none", Scaling::none},
                                               {"minmax", Scaling::min_max}};
const std::map<std::string, ImputePolicy> kImputes{{"median", ImputePolicy::median},
                                                   {"drop", ImputePolicy::drop_rows}};
const std::map<std::string, ReportFormat> kFormats{{"text", ReportFormat::text},
                                                   {"csv", ReportFormat::csv}};

std::string fixed(double v, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

/// Writes to `path`, or stdout when the path is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

struct FitOptions {
  std::string data;
  std::string label = "last";
  std::vector<std::string> drop;
  std::string method;
  std::string out;
  std::optional<std::size_t> k;
  std::size_t k_max = 50;
  std::uint64_t seed = 2022;
  Scaling scaling = Scaling::none;
  ImputePolicy impute = ImputePolicy::median;
};

int run_fit(const FitOptions& o) {
  DatasetSpec spec;
  spec.path = o.data;
  spec.label_column = o.label;
  spec.drop_columns = o.drop;
  spec.impute = o.impute;
  spec.scaling = o.scaling;
  const LoadedDataset loaded = load_dataset(spec);
  Dataset data = loaded.data;
  const Method method = parse_method(o.method);

  std::optional<MinMaxScaler> scaler;
  if (o.scaling == Scaling::min_max) {
    scaler = MinMaxScaler::fit(data);
    scaler->transform_in_place(data);
  }

  std::size_t k = 1;
  if (method == Method::knn) {
    if (o.k) {
      k = *o.k;
    } else {
      // No k given: tune it on the first fold's train/validation pair.
      SplitPlan plan;
      plan.seed = o.seed;
      const FoldSplit split = stratified_split(data, plan, 0);
      k = tune_k(data.subset(split.train), data.subset(split.validation), o.k_max);
      std::cout << "tuned k = " << k << " (validation fold 0, seed " << o.seed << ")\n";
    }
  }

  const StoredModel stored{fit_model(method, data, k), scaler};
  std::ofstream out(o.out, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + o.out + "'");
  save_model(out, stored);

  std::cout << method_label(method) << " fitted on " << data.size() << " samples, "
            << data.feature_dim() << " features, " << data.class_count << " classes";
  if (loaded.rows_dropped) std::cout << " (" << loaded.rows_dropped << " rows dropped)";
  if (loaded.cells_imputed) std::cout << " (" << loaded.cells_imputed << " cells imputed)";
  std::cout << '\n';
  std::visit(
      [&](const auto& m) {
        if constexpr (requires { m.centroids(); }) {
          const auto counts = data.class_counts();
          for (Label c = 0; c < m.centroids().size(); ++c) {
            const auto& v = m.centroids()[c];
            std::cout << "  centroid " << data.class_name(c) << " (n=" << counts[c] << "): [";
            for (std::size_t f = 0; f < v.size() && f < 6; ++f) {
              std::cout << (f ? ", " : "") << fixed(v[f]);
            }
            std::cout << (v.size() > 6 ? ", ...]" : "]") << '\n';
          }
        } else {
          std::cout << "  k = " << m.k() << '\n';
        }
      },
      stored.model);
  std::cout << "model written to " << o.out << '\n';
  return 0;
}

struct PredictOptions {
  std::string model;
  std::string queries;
  std::vector<std::string> ignore;
  bool no_header = false;
  std::string out;
  ReportFormat format = ReportFormat::csv;
};

int run_predict(const PredictOptions& o) {
  std::ifstream model_in(o.model);
  if (!model_in) throw std::runtime_error("cannot open model '" + o.model + "'");
  const StoredModel stored = load_model(model_in);
  const Dataset& train = stored.train();
  const std::size_t d = train.feature_dim();

  const Table table = read_delimited(o.queries, ',', !o.no_header);
  std::vector<bool> skip(table.header.size(), false);
  for (const auto& name : o.ignore) {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) throw IngestError("column '" + name + "' not in query file");
    skip[static_cast<std::size_t>(it - table.header.begin())] = true;
  }
  const std::size_t used = static_cast<std::size_t>(std::count(skip.begin(), skip.end(), false));
  if (used != d) {
    throw ContractError("query file has " + std::to_string(used) +
                        " feature columns; the model expects d = " + std::to_string(d));
  }

  std::ostringstream out;
  const bool csv = o.format == ReportFormat::csv;
  out << (csv ? "row,label" : "row\tlabel");
  for (Label c = 0; c < train.class_count; ++c) out << (csv ? "," : "\t") << "p_" << train.class_name(c);
  out << (csv ? ",fallback\n" : "\tfallback\n");
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    FeatureVector x;
    for (std::size_t c = 0; c < table.rows[r].size(); ++c) {
      if (skip[c]) continue;
      const auto v = parse_number(table.rows[r][c]);
      if (!v) {
        throw IngestError("query row " + std::to_string(r + 1) + ", column " + std::to_string(c) +
                          ": '" + table.rows[r][c] + "' is not a number");
      }
      x.push_back(*v);
    }
    const Prediction p = stored.predict(x);
    out << r << (csv ? "," : "\t") << train.class_name(p.label);
    for (const double s : p.scores) out << (csv ? "," : "\t") << fixed(s, csv ? 12 : 4);
    out << (csv ? "," : "\t") << (p.fallback_used ? 1 : 0) << '\n';
  }
  emit(o.out, out.str());
  return 0;
}

struct BenchmarkOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> folds;
  std::optional<std::size_t> k_max;
  std::optional<double> alpha;
  std::optional<std::string> scaling;
  std::optional<std::string> impute;
  std::optional<std::string> out;
  ReportFormat format = ReportFormat::text;
};

int run_benchmark_cmd(const BenchmarkOptions& o) {
  ExperimentConfig cfg = load_config(o.config);
  if (o.seed) cfg.split.seed = *o.seed;
  if (o.folds) cfg.split.n_folds = *o.folds;
  if (o.k_max) cfg.k_max = *o.k_max;
  if (o.alpha) cfg.alpha = *o.alpha;
  if (o.out) cfg.out_dir = *o.out;
  for (auto& d : cfg.datasets) {
    if (o.scaling) d.scaling = kScalings.at(*o.scaling);
    if (o.impute) d.impute = kImputes.at(*o.impute);
  }
  cfg.validate();

  const BenchmarkResult result = run_benchmark(cfg);
  write_outputs(result, cfg.out_dir);
  std::cout << render_report(result, o.format);
  std::cerr << "results written to " << cfg.out_dir.string() << '\n';
  if (result.any_failed()) {
    for (const auto& d : result.datasets) {
      if (d.failed()) std::cerr << "plknn: dataset " << d.name << " failed: " << d.error << '\n';
    }
    return 2;
  }
  return 0;
}

struct ReportOptions {
  std::string results;
  std::optional<double> alpha;
  ReportFormat format = ReportFormat::text;
  std::string out;
};

int run_report(const ReportOptions& o) {
  if (o.alpha && !(*o.alpha > 0.0 && *o.alpha <= 1.0)) {
    throw ConfigError("alpha must lie in (0, 1]");
  }
  const BenchmarkResult result = read_results(o.results, o.alpha);
  emit(o.out, render_report(result, o.format));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parameterless k-NN: fit, predict, benchmark and report"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kArtifactVersion));

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit one method on a whole dataset and save the model");
  fit_cmd->add_option("--data", fit.data, "Delimited dataset file")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--label", fit.label, "Label column: name, index or 'last'")->capture_default_str();
  fit_cmd->add_option("--drop", fit.drop, "Columns to ignore (repeatable)");
  fit_cmd->add_option("--method", fit.method, "plknn, smknn, lmknn or knn")
      ->required()
      ->check(CLI::IsMember({"plknn", "smknn", "lmknn", "knn"}));
  fit_cmd->add_option("--out", fit.out, "Model file to write")->required();
  fit_cmd->add_option("--k", fit.k, "Neighbours for knn (tuned on a validation split if omitted)")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--kmax", fit.k_max, "Upper bound when tuning k")->capture_default_str();
  fit_cmd->add_option("--seed", fit.seed, "Seed of the tuning split")->capture_default_str();
  fit_cmd->add_option("--scaling", fit.scaling, "none or minmax")
      ->transform(CLI::CheckedTransformer(kScalings, CLI::ignore_case));
  fit_cmd->add_option("--impute", fit.impute, "median or drop")
      ->transform(CLI::CheckedTransformer(kImputes, CLI::ignore_case));

  PredictOptions pred;
  auto* pred_cmd = app.add_subcommand("predict", "Predict every row of a query file");
  pred_cmd->add_option("--model", pred.model, "Model file from 'fit'")->required()->check(CLI::ExistingFile);
  pred_cmd->add_option("--queries", pred.queries, "Delimited file of feature rows")
      ->required()
      ->check(CLI::ExistingFile);
  pred_cmd->add_option("--ignore", pred.ignore, "Query columns to skip, e.g. a label (repeatable)");
  pred_cmd->add_flag("--no-header", pred.no_header, "Query file has no header row");
  pred_cmd->add_option("--out", pred.out, "Output file (default stdout)");
  pred_cmd->add_option("--format", pred.format, "csv or text")
      ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case));

  BenchmarkOptions bench;
  auto* bench_cmd = app.add_subcommand("benchmark", "Run the repeated-split experiment");
  bench_cmd->add_option("--config", bench.config, "JSON experiment file")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--seed", bench.seed, "Override the split seed");
  bench_cmd->add_option("--folds", bench.folds, "Override the number of folds")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--kmax", bench.k_max, "Override the k-NN search bound")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--alpha", bench.alpha, "Override the significance level");
  bench_cmd->add_option("--scaling", bench.scaling, "Override scaling for every dataset")
      ->check(CLI::IsMember({"none", "minmax"}));
  bench_cmd->add_option("--impute", bench.impute, "Override imputation for every dataset")
      ->check(CLI::IsMember({"median", "drop"}));
  bench_cmd->add_option("--out", bench.out, "Output directory");
  bench_cmd->add_option("--format", bench.format, "Summary printed to stdout: text or csv")
      ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case));

  ReportOptions rep;
  auto* rep_cmd = app.add_subcommand("report", "Summarise a results directory");
  rep_cmd->add_option("results", rep.results, "Directory written by 'benchmark'")
      ->required()
      ->check(CLI::ExistingDirectory);
  rep_cmd->add_option("--alpha", rep.alpha, "Significance level for the similarity markers");
  rep_cmd->add_option("--format", rep.format, "text or csv")
      ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case));
  rep_cmd->add_option("--out", rep.out, "Output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit_cmd) return run_fit(fit);
    if (*pred_cmd) return run_predict(pred);
    if (*bench_cmd) return run_benchmark_cmd(bench);
    if (*rep_cmd) return run_report(rep);
  } catch (const std::exception& e) {
    std::cerr << "plknn: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
