#include "plknn/core.hpp"

#include <cmath>

namespace plknn {

namespace {

void require_same_dim(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw ContractError(std::string(op) + ": dimension mismatch (" + std::to_string(a) +
                        " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

double euclidean_distance(FeatureView a, FeatureView b) {
  require_same_dim(a.size(), b.size(), "euclidean_distance");
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

double manhattan_distance(FeatureView a, FeatureView b) {
  require_same_dim(a.size(), b.size(), "manhattan_distance");
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sum += std::abs(a[k] - b[k]);
  }
  return sum;
}

double halfspace_side(FeatureView s, FeatureView cstar, FeatureView t) {
  require_same_dim(s.size(), cstar.size(), "halfspace_side");
  require_same_dim(s.size(), t.size(), "halfspace_side");
  double dot = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    dot += (cstar[k] - s[k]) * (t[k] - s[k]);
  }
  return dot;
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(class_count, 0);
  for (const Label label : labels) {
    if (label < class_count) ++counts[label];
  }
  return counts;
}

void Dataset::validate(bool require_all_classes) const {
  if (samples.size() != labels.size()) {
    throw ContractError("dataset '" + name + "': " + std::to_string(samples.size()) +
                        " samples but " + std::to_string(labels.size()) + " labels");
  }
  if (samples.empty()) throw ContractError("dataset '" + name + "' is empty");
  const std::size_t dim = feature_dim();
  if (dim == 0) throw ContractError("dataset '" + name + "' has no features");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].size() != dim) {
      throw ContractError("dataset '" + name + "': row " + std::to_string(i) + " has " +
                          std::to_string(samples[i].size()) + " features, expected " +
                          std::to_string(dim));
    }
    for (const double v : samples[i]) {
      if (!std::isfinite(v)) {
        throw ContractError("dataset '" + name + "': non-finite value in row " +
                            std::to_string(i));
      }
    }
    if (labels[i] >= class_count) {
      throw ContractError("dataset '" + name + "': label " + std::to_string(labels[i]) +
                          " out of range for " + std::to_string(class_count) + " classes");
    }
  }
  if (require_all_classes) {
    const auto counts = class_counts();
    for (std::size_t c = 0; c < counts.size(); ++c) {
      if (counts[c] == 0) {
        throw ContractError("dataset '" + name + "': class '" + class_name(c) +
                            "' has no samples");
      }
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.name = name;
  out.class_count = class_count;
  out.feature_names = feature_names;
  out.class_names = class_names;
  out.samples.reserve(indices.size());
  out.labels.reserve(indices.size());
  for (const std::size_t i : indices) {
    out.samples.push_back(samples.at(i));
    out.labels.push_back(labels.at(i));
  }
  return out;
}

std::string Dataset::class_name(Label label) const {
  if (label < class_names.size()) return class_names[label];
  return std::to_string(label);
}

}  // namespace plknn
