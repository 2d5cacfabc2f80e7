#pragma once

// Experiment harness: repeated stratified splits over a set of datasets,
// every configured method fitted per fold, metrics aggregated, pairwise
// Wilcoxon tests, Friedman ranks and the Nemenyi critical difference.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "plknn/data_io.hpp"
#include "plknn/eval.hpp"
#include "plknn/model_io.hpp"

namespace plknn {

enum class MetricKind { accuracy, f1 };

std::string_view metric_id(MetricKind m);
MetricKind parse_metric(std::string_view id);

struct ExperimentConfig {
  std::vector<DatasetSpec> datasets;
  std::vector<Method> methods{kAllMethods.begin(), kAllMethods.end()};
  SplitPlan split;
  std::size_t k_max = 50;
  /// Per-fold metric fed to the Wilcoxon tests and the Friedman ranking.
  MetricKind metric = MetricKind::f1;
  double alpha = 0.05;
  std::filesystem::path out_dir = "results";

  void validate() const;
  /// Canonical key=value rendering of every setting that affects results.
  std::string canonical() const;
};

/// Reads a JSON experiment description. Relative dataset paths resolve
/// against the config file's directory. Top-level "scaling", "impute" and
/// "categorical" act as defaults for datasets that do not set them.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Binary datasets score F1 on the positive class (configured or minority,
/// lowest index on ties); multiclass datasets use macro F1.
F1Mode f1_mode_for(const Dataset& data, const DatasetSpec& spec);

struct FoldOutcome {
  Method method;
  double accuracy = 0.0;
  double f1 = 0.0;
  std::size_t k = 0;  // tuned k for k-NN, 0 otherwise
};

/// Fits every method on `train` and scores it on `test`. Only k-NN looks at
/// `validation` (to tune k). Scaling, when requested, is fitted on `train`.
std::vector<FoldOutcome> evaluate_fold(const Dataset& train, const Dataset& validation,
                                       const Dataset& test, std::span<const Method> methods,
                                       F1Mode f1_mode, Scaling scaling, std::size_t k_max);

struct DatasetResult {
  std::string name;
  std::map<Method, MetricReport> reports;
  std::vector<std::size_t> tuned_k;  // per fold; empty without k-NN
  std::string error;                 // non-empty when the dataset failed

  bool failed() const { return !error.empty(); }
};

struct PairwiseTest {
  std::string dataset;
  Method reference;
  Method other;
  MetricKind metric;
  TestResult result;
};

struct BenchmarkResult {
  ExperimentConfig config;
  std::vector<DatasetResult> datasets;
  std::vector<PairwiseTest> wilcoxon;
  /// Over successful datasets; empty with fewer than two methods.
  std::vector<double> mean_ranks;
  double critical_difference = 0.0;
  double cd_alpha = 0.05;
  std::size_t ranked_datasets = 0;

  bool any_failed() const;
};

/// Runs the whole protocol. Per-dataset failures are recorded, not thrown.
BenchmarkResult run_benchmark(const ExperimentConfig& config);

/// Fills the Wilcoxon and Friedman/Nemenyi fields from the per-fold reports.
void compute_statistics(BenchmarkResult& result);

inline constexpr int kResultsSchemaVersion = 1;
inline constexpr std::string_view kArtifactVersion = "1.0.0";

/// Writes results.csv, summary.txt, wilcoxon.csv, nemenyi.svg and
/// provenance.txt into `dir`.
void write_outputs(const BenchmarkResult& result, const std::filesystem::path& dir);

/// Reloads results written by write_outputs; throws ConfigError on a schema
/// version mismatch. Statistics are recomputed with `alpha` when given.
BenchmarkResult read_results(const std::filesystem::path& dir,
                             std::optional<double> alpha = std::nullopt);

enum class ReportFormat { text, csv };

/// One row group per dataset: mean +/- std accuracy and F1 per (dataset, method),
/// '*' on the best mean F1 per dataset, '~' on methods whose per-fold metric
/// is not significantly different from the best one (p >= alpha).
std::string render_report(const BenchmarkResult& result, ReportFormat format);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace plknn
