#include "plknn/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace plknn {

namespace {

void require_paired(std::span<const Label> predicted, std::span<const Label> truth) {
  if (predicted.size() != truth.size()) {
    throw ContractError("metric: " + std::to_string(predicted.size()) + " predictions for " +
                        std::to_string(truth.size()) + " labels");
  }
  if (truth.empty()) throw ContractError("metric: empty label sequence");
}

double f1_for_class(std::span<const Label> predicted, std::span<const Label> truth, Label c) {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool p = predicted[i] == c;
    const bool t = truth[i] == c;
    tp += p && t;
    fp += p && !t;
    fn += !p && t;
  }
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (const char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

double accuracy(std::span<const Label> predicted, std::span<const Label> truth) {
  require_paired(predicted, truth);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double f1_score(std::span<const Label> predicted, std::span<const Label> truth,
                std::size_t class_count, F1Mode mode) {
  require_paired(predicted, truth);
  if (mode.kind == F1Mode::Kind::binary) {
    if (class_count != 2) {
      throw ConfigError("binary F1 requires 2 classes, got " + std::to_string(class_count));
    }
    if (mode.positive >= 2) throw ConfigError("binary F1: positive class out of range");
    return f1_for_class(predicted, truth, mode.positive);
  }
  if (class_count == 0) throw ConfigError("macro F1 requires at least one class");
  double sum = 0.0;
  for (Label c = 0; c < class_count; ++c) sum += f1_for_class(predicted, truth, c);
  return sum / static_cast<double>(class_count);
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (const double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / (n - 1.0));
  }
  return out;
}

std::vector<double> MetricReport::accuracies() const {
  std::vector<double> out;
  for (const auto& f : folds) out.push_back(f.accuracy);
  return out;
}

std::vector<double> MetricReport::f1s() const {
  std::vector<double> out;
  for (const auto& f : folds) out.push_back(f.f1);
  return out;
}

MeanStd MetricReport::accuracy() const { return mean_std(accuracies()); }
MeanStd MetricReport::f1() const { return mean_std(f1s()); }

// ---------------------------------------------------------------------------
// Wilcoxon signed-rank

TestResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                double alpha, WilcoxonMethod method) {
  if (x.size() != y.size()) throw ContractError("wilcoxon: unpaired samples");
  if (x.empty()) throw ContractError("wilcoxon: empty samples");

  std::vector<double> diffs;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    if (d != 0.0) diffs.push_back(d);
  }
  TestResult out;
  out.n_effective = diffs.size();
  if (diffs.empty()) return out;

  const std::size_t n = diffs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(diffs[a]) < std::abs(diffs[b]);
  });

  // Doubled mid-ranks are integers: positions a..b (1-based) share a + b.
  std::vector<std::uint64_t> rank2(n);
  std::vector<std::size_t> tie_sizes;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(diffs[order[j + 1]]) == std::abs(diffs[order[i]])) ++j;
    for (std::size_t p = i; p <= j; ++p) rank2[order[p]] = (i + 1) + (j + 1);
    tie_sizes.push_back(j - i + 1);
    i = j + 1;
  }

  std::uint64_t plus2 = 0;
  std::uint64_t total2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total2 += rank2[i];
    if (diffs[i] > 0.0) plus2 += rank2[i];
  }
  const std::uint64_t w2 = std::min(plus2, total2 - plus2);
  out.statistic = static_cast<double>(w2) / 2.0;

  const bool exact = method == WilcoxonMethod::exact ||
                     (method == WilcoxonMethod::automatic && n <= kWilcoxonExactLimit);
  if (exact) {
    // ways[s] = number of sign assignments whose positive doubled rank sum is s.
    std::vector<double> ways(total2 + 1, 0.0);
    ways[0] = 1.0;
    std::uint64_t reach = 0;
    for (const std::uint64_t r : rank2) {
      reach += r;
      for (std::uint64_t s = reach; s >= r; --s) {
        ways[s] += ways[s - r];
        if (s == r) break;
      }
    }
    double tail = 0.0;
    for (std::uint64_t s = 0; s <= total2; ++s) {
      if (std::min(s, total2 - s) <= w2) tail += ways[s];
    }
    out.p_value = std::min(1.0, tail / std::ldexp(1.0, static_cast<int>(n)));
  } else {
    const double nd = static_cast<double>(n);
    const double mean = nd * (nd + 1.0) / 4.0;
    double tie_term = 0.0;
    for (const std::size_t t : tie_sizes) {
      const double td = static_cast<double>(t);
      tie_term += td * td * td - td;
    }
    const double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0;
    if (var <= 0.0) {
      out.p_value = 1.0;
    } else {
      const double z = std::max(0.0, std::abs(out.statistic - mean) - 0.5) / std::sqrt(var);
      out.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    }
  }
  out.reject_at_alpha = out.p_value < alpha;
  return out;
}

// ---------------------------------------------------------------------------
// Friedman / Nemenyi

void ScoreMatrix::validate() const {
  if (values.size() != row_names.size()) throw ContractError("score matrix: row count mismatch");
  if (column_names.empty()) throw ContractError("score matrix: no methods");
  for (const auto& row : values) {
    if (row.size() != column_names.size()) throw ContractError("score matrix is not rectangular");
    for (const double v : row) {
      if (!std::isfinite(v)) throw ContractError("score matrix has a missing entry");
    }
  }
}

std::vector<double> friedman_average_ranks(const ScoreMatrix& scores, bool higher_is_better) {
  scores.validate();
  if (scores.column_names.size() < 2) throw ContractError("friedman: need at least 2 methods");
  if (scores.values.empty()) throw ContractError("friedman: need at least 1 dataset");

  const std::size_t k = scores.column_names.size();
  std::vector<double> sums(k, 0.0);
  std::vector<std::size_t> order(k);
  for (const auto& row : scores.values) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return higher_is_better ? row[a] > row[b] : row[a] < row[b];
    });
    for (std::size_t i = 0; i < k;) {
      std::size_t j = i;
      while (j + 1 < k && row[order[j + 1]] == row[order[i]]) ++j;
      const double mid = 0.5 * static_cast<double>((i + 1) + (j + 1));
      for (std::size_t p = i; p <= j; ++p) sums[order[p]] += mid;
      i = j + 1;
    }
  }
  for (double& s : sums) s /= static_cast<double>(scores.values.size());
  return sums;
}

double nemenyi_q(std::size_t k_methods, double alpha) {
  // Studentized range statistic (infinite degrees of freedom) divided by
  // sqrt(2), k = 2..10; Demsar, JMLR 7 (2006), Table 5.
  static constexpr std::array<double, 9> q005 = {1.960, 2.343, 2.569, 2.728, 2.850,
                                                 2.949, 3.031, 3.102, 3.164};
  static constexpr std::array<double, 9> q010 = {1.645, 2.052, 2.291, 2.459, 2.589,
                                                 2.693, 2.780, 2.855, 2.920};
  if (k_methods < 2 || k_methods > 10) {
    throw ConfigError("nemenyi: k = " + std::to_string(k_methods) + " outside supported 2..10");
  }
  if (std::abs(alpha - 0.05) < 1e-12) return q005[k_methods - 2];
  if (std::abs(alpha - 0.10) < 1e-12) return q010[k_methods - 2];
  throw ConfigError("nemenyi: alpha must be 0.05 or 0.10");
}

double nemenyi_critical_difference(std::size_t k_methods, std::size_t n_datasets, double alpha) {
  if (n_datasets < 1) throw ConfigError("nemenyi: need at least one dataset");
  const double k = static_cast<double>(k_methods);
  return nemenyi_q(k_methods, alpha) *
         std::sqrt(k * (k + 1.0) / (6.0 * static_cast<double>(n_datasets)));
}

std::vector<RankGroup> cd_groups(std::span<const double> sorted_ranks, double cd) {
  std::vector<RankGroup> groups;
  std::size_t last_end = 0;
  for (std::size_t i = 0; i < sorted_ranks.size(); ++i) {
    std::size_t j = i;
    while (j + 1 < sorted_ranks.size() && sorted_ranks[j + 1] - sorted_ranks[i] <= cd) ++j;
    if (j > i && (groups.empty() || j > last_end)) {
      groups.push_back({i, j});
      last_end = j;
    }
  }
  return groups;
}

std::string render_cd_diagram(std::span<const double> mean_ranks, double cd,
                              std::span<const std::string> method_names) {
  if (mean_ranks.size() != method_names.size()) {
    throw ContractError("cd diagram: ranks and names differ in length");
  }
  const std::size_t k = mean_ranks.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return mean_ranks[a] < mean_ranks[b]; });
  std::vector<double> sorted(k);
  for (std::size_t i = 0; i < k; ++i) sorted[i] = mean_ranks[order[i]];
  const auto groups = cd_groups(sorted, cd);

  const double width = 640.0;
  const double left = 160.0;
  const double right = width - 160.0;
  const double axis_y = 70.0;
  const std::size_t max_rank = std::max<std::size_t>(k, 2);
  const auto x_of = [&](double rank) {
    return left + (rank - 1.0) / static_cast<double>(max_rank - 1) * (right - left);
  };
  const std::size_t left_count = (k + 1) / 2;
  const double label_top = axis_y + 30.0 + 12.0 * static_cast<double>(groups.size());
  const double height = label_top + 22.0 * static_cast<double>(left_count) + 20.0;

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\""
      << fmt(height) << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // CD scale bar.
  const double cd_px = cd / static_cast<double>(max_rank - 1) * (right - left);
  svg << "<line class=\"cd-scale\" x1=\"" << fmt(left) << "\" y1=\"20.00\" x2=\""
      << fmt(left + cd_px) << "\" y2=\"20.00\" stroke=\"black\" stroke-width=\"2\"/>\n"
      << "<text x=\"" << fmt(left + cd_px / 2.0) << "\" y=\"14.00\" text-anchor=\"middle\">CD = "
      << fmt(cd) << "</text>\n";

  svg << "<line class=\"axis\" x1=\"" << fmt(left) << "\" y1=\"" << fmt(axis_y) << "\" x2=\""
      << fmt(right) << "\" y2=\"" << fmt(axis_y) << "\" stroke=\"black\"/>\n";
  for (std::size_t r = 1; r <= max_rank; ++r) {
    const double x = x_of(static_cast<double>(r));
    svg << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(axis_y - 6.0) << "\" x2=\"" << fmt(x)
        << "\" y2=\"" << fmt(axis_y) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(axis_y - 10.0)
        << "\" text-anchor=\"middle\">" << r << "</text>\n";
  }

  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double y = axis_y + 12.0 + 12.0 * static_cast<double>(g);
    svg << "<line class=\"cd-group\" x1=\"" << fmt(x_of(sorted[groups[g].first]) - 3.0)
        << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(x_of(sorted[groups[g].last]) + 3.0)
        << "\" y2=\"" << fmt(y) << "\" stroke=\"black\" stroke-width=\"4\"/>\n";
  }

  // Better half labelled on the left, the rest on the right.
  for (std::size_t i = 0; i < k; ++i) {
    const bool on_left = i < left_count;
    const std::size_t slot = on_left ? i : k - 1 - i;
    const double y = label_top + 22.0 * static_cast<double>(slot);
    const double x = x_of(sorted[i]);
    const double end_x = on_left ? left - 10.0 : right + 10.0;
    svg << "<polyline class=\"method\" points=\"" << fmt(x) << "," << fmt(axis_y) << " "
        << fmt(x) << "," << fmt(y) << " " << fmt(end_x) << "," << fmt(y)
        << "\" fill=\"none\" stroke=\"black\"/>\n"
        << "<text x=\"" << fmt(on_left ? end_x - 4.0 : end_x + 4.0) << "\" y=\""
        << fmt(y + 4.0) << "\" text-anchor=\"" << (on_left ? "end" : "start") << "\">"
        << xml_escape(method_names[order[i]]) << " (" << fmt(sorted[i]) << ")</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace plknn
