#pragma once

// Numeric types, distances and the dataset model shared by every module.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace plknn {

using FeatureVector = std::vector<double>;
using FeatureView = std::span<const double>;
using Label = std::size_t;

/// Precondition violated by the caller (dimension mismatch, empty input).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid configuration value (k out of range, unknown method, bad alpha).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Fitting failed because the training data cannot support the model.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double euclidean_distance(FeatureView a, FeatureView b);
double manhattan_distance(FeatureView a, FeatureView b);

/// Inner product <cstar - s, t - s>. Non-negative exactly when the angle at
/// `s` between `t` and `cstar` lies in the closed interval [-90, +90] degrees.
/// A zero direction (t == s or cstar == s) yields 0 and therefore counts as
/// inside.
double halfspace_side(FeatureView s, FeatureView cstar, FeatureView t);

struct Dataset {
  std::string name;
  std::vector<FeatureVector> samples;
  std::vector<Label> labels;
  std::size_t class_count = 0;
  std::vector<std::string> feature_names;
  /// Original label text per class index; may be empty for synthetic data.
  std::vector<std::string> class_names;

  std::size_t size() const { return samples.size(); }
  std::size_t feature_dim() const { return samples.empty() ? 0 : samples.front().size(); }

  /// Per-class sample counts, indexed by label.
  std::vector<std::size_t> class_counts() const;

  /// Throws ContractError naming the first violated invariant.
  /// With `require_all_classes`, every label in [0, class_count) must occur.
  void validate(bool require_all_classes = true) const;

  /// Rows selected by `indices`, in the given order. Metadata is copied.
  Dataset subset(std::span<const std::size_t> indices) const;

  std::string class_name(Label label) const;

  bool operator==(const Dataset&) const = default;
};

}  // namespace plknn
