#pragma once

// Classification metrics and the statistical comparison machinery:
// Wilcoxon signed-rank, Friedman mean ranks, Nemenyi critical difference and
// the CD diagram renderer.

#include <string>
#include <vector>

#include "plknn/core.hpp"

namespace plknn {

double accuracy(std::span<const Label> predicted, std::span<const Label> truth);

struct F1Mode {
  enum class Kind { binary, macro };
  Kind kind = Kind::macro;
  Label positive = 0;  // binary only

  static F1Mode binary(Label positive) { return {Kind::binary, positive}; }
  static F1Mode macro() { return {Kind::macro, 0}; }
};

/// Binary mode scores the positive class only and needs class_count == 2.
/// Macro mode averages over every schema class; a class with no true and no
/// predicted members contributes 0.
double f1_score(std::span<const Label> predicted, std::span<const Label> truth,
                std::size_t class_count, F1Mode mode);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
};

MeanStd mean_std(std::span<const double> values);

struct FoldMetrics {
  double accuracy = 0.0;
  double f1 = 0.0;
};

struct MetricReport {
  std::vector<FoldMetrics> folds;

  std::vector<double> accuracies() const;
  std::vector<double> f1s() const;
  MeanStd accuracy() const;
  MeanStd f1() const;
};

struct TestResult {
  double statistic = 0.0;  // W = min(W+, W-)
  double p_value = 1.0;
  bool reject_at_alpha = false;
  std::size_t n_effective = 0;
};

enum class WilcoxonMethod { automatic, exact, normal };

/// Largest number of non-zero differences handled by exact enumeration when
/// the method is `automatic`.
inline constexpr std::size_t kWilcoxonExactLimit = 25;

/// Paired two-sided signed-rank test on x - y. Zero differences are dropped;
/// tied magnitudes get mid-ranks. The exact path counts every one of the 2^n
/// sign assignments whose min(W+, W-) does not exceed the observed W. The
/// normal path uses tie and continuity corrections.
TestResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                double alpha = 0.05,
                                WilcoxonMethod method = WilcoxonMethod::automatic);

struct ScoreMatrix {
  std::vector<std::string> row_names;     // datasets
  std::vector<std::string> column_names;  // methods
  std::vector<std::vector<double>> values;

  void validate() const;
};

/// Per-row ranks (1 = best, mid-ranks on ties) averaged over rows.
std::vector<double> friedman_average_ranks(const ScoreMatrix& scores, bool higher_is_better = true);

/// Studentized range quantile q_alpha / sqrt(2) for k methods (infinite df).
/// Supported: alpha in {0.05, 0.10}, 2 <= k <= 10.
double nemenyi_q(std::size_t k_methods, double alpha = 0.05);

/// q_alpha * sqrt(k (k + 1) / (6 N)).
double nemenyi_critical_difference(std::size_t k_methods, std::size_t n_datasets,
                                   double alpha = 0.05);

/// Maximal runs of methods (sorted by rank) whose rank spread is <= cd.
/// Each group is returned as [first, last] positions in the rank-sorted order;
/// singletons are omitted.
struct RankGroup {
  std::size_t first = 0;
  std::size_t last = 0;
};
std::vector<RankGroup> cd_groups(std::span<const double> sorted_ranks, double cd);

/// Standalone SVG critical-difference diagram. Deterministic for fixed input.
std::string render_cd_diagram(std::span<const double> mean_ranks, double cd,
                              std::span<const std::string> method_names);

}  // namespace plknn
