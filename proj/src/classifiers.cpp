#include "plknn/classifiers.hpp"

#include <algorithm>
#include <numeric>

namespace plknn {

namespace {

std::size_t require_common_dim(std::span<const FeatureVector> samples, const char* op) {
  if (samples.empty()) throw ContractError(std::string(op) + ": no samples");
  const std::size_t dim = samples.front().size();
  for (const auto& x : samples) {
    if (x.size() != dim) throw ContractError(std::string(op) + ": dimension mismatch");
  }
  return dim;
}

std::vector<std::vector<FeatureVector>> group_by_class(const Dataset& data) {
  std::vector<std::vector<FeatureVector>> groups(data.class_count);
  for (std::size_t i = 0; i < data.size(); ++i) groups[data.labels[i]].push_back(data.samples[i]);
  return groups;
}

}  // namespace

FeatureVector class_centroid_median(std::span<const FeatureVector> samples) {
  const std::size_t dim = require_common_dim(samples, "class_centroid_median");
  const std::size_t n = samples.size();
  FeatureVector centroid(dim);
  std::vector<double> column(n);
  for (std::size_t k = 0; k < dim; ++k) {
    for (std::size_t i = 0; i < n; ++i) column[i] = samples[i][k];
    std::sort(column.begin(), column.end());
    centroid[k] = (n % 2 == 1) ? column[n / 2] : 0.5 * (column[n / 2 - 1] + column[n / 2]);
  }
  return centroid;
}

FeatureVector class_centroid_mean(std::span<const FeatureVector> samples) {
  const std::size_t dim = require_common_dim(samples, "class_centroid_mean");
  FeatureVector centroid(dim, 0.0);
  for (const auto& x : samples) {
    for (std::size_t k = 0; k < dim; ++k) centroid[k] += x[k];
  }
  for (double& v : centroid) v /= static_cast<double>(samples.size());
  return centroid;
}

double training_weight(FeatureView x, FeatureView centroid) {
  return 1.0 / (euclidean_distance(x, centroid) + kDistanceFloor);
}

std::size_t argmax_lowest(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

// ---------------------------------------------------------------------------
// CentroidModel

CentroidModel::CentroidModel(Dataset train, CentroidKind kind)
    : train_(std::move(train)), kind_(kind) {
  train_.validate(false);
  const auto groups = group_by_class(train_);
  centroids_.reserve(groups.size());
  for (std::size_t c = 0; c < groups.size(); ++c) {
    if (groups[c].empty()) {
      throw FitError("class '" + train_.class_name(c) + "' has no training samples");
    }
    centroids_.push_back(kind == CentroidKind::median ? class_centroid_median(groups[c])
                                                      : class_centroid_mean(groups[c]));
  }
  weights_.reserve(train_.size());
  for (std::size_t i = 0; i < train_.size(); ++i) {
    weights_.push_back(training_weight(train_.samples[i], centroids_[train_.labels[i]]));
  }
}

CentroidModel::CentroidModel(Dataset train, CentroidKind kind,
                             std::vector<FeatureVector> centroids, std::vector<double> weights)
    : train_(std::move(train)),
      kind_(kind),
      centroids_(std::move(centroids)),
      weights_(std::move(weights)) {
  train_.validate(false);
  if (centroids_.size() != train_.class_count || weights_.size() != train_.size()) {
    throw ContractError("model state does not match its training data");
  }
  for (const auto& c : centroids_) {
    if (c.size() != train_.feature_dim()) throw ContractError("centroid dimension mismatch");
  }
}

void CentroidModel::check_query(FeatureView s) const {
  if (s.size() != feature_dim()) {
    throw ContractError("query has " + std::to_string(s.size()) + " features, expected " +
                        std::to_string(feature_dim()));
  }
}

void CentroidModel::scale_weights(double factor) {
  for (double& w : weights_) w *= factor;
}

NearestCentroid CentroidModel::nearest_centroid(FeatureView s) const {
  check_query(s);
  NearestCentroid best{0, manhattan_distance(s, centroids_[0])};
  for (std::size_t c = 1; c < centroids_.size(); ++c) {
    const double d = manhattan_distance(s, centroids_[c]);
    if (d < best.radius) best = {c, d};
  }
  return best;
}

ClassScores CentroidModel::class_scores(FeatureView s,
                                        std::span<const std::size_t> neighbours) const {
  check_query(s);
  ClassScores out;
  out.p.assign(class_count(), 0.0);
  for (const std::size_t j : neighbours) {
    const double d = manhattan_distance(train_.samples[j], s);
    out.p[train_.labels[j]] += weights_[j] / (d + kDistanceFloor);
  }
  const double total = std::accumulate(out.p.begin(), out.p.end(), 0.0);
  if (total > 0.0) {
    out.empty = false;
    for (double& v : out.p) v /= total;
  }
  return out;
}

Prediction CentroidModel::decide(FeatureView s, std::span<const std::size_t> neighbours,
                                 const NearestCentroid& nearest) const {
  ClassScores scores = class_scores(s, neighbours);
  Prediction out;
  if (scores.empty) {
    out.label = nearest.index;
    out.fallback_used = true;
  } else {
    out.label = argmax_lowest(scores.p);
  }
  out.scores = std::move(scores.p);
  return out;
}

// ---------------------------------------------------------------------------
// PL-kNN

PLkNNModel PLkNNModel::fit(const Dataset& train) {
  return PLkNNModel(train, CentroidKind::median);
}

PLkNNModel PLkNNModel::restore(Dataset train, std::vector<FeatureVector> centroids,
                               std::vector<double> weights) {
  return PLkNNModel(std::move(train), CentroidKind::median, std::move(centroids),
                    std::move(weights));
}

std::vector<std::size_t> PLkNNModel::select_semicircle(FeatureView s,
                                                       const NearestCentroid& nearest) const {
  check_query(s);
  const FeatureView cstar = centroids_.at(nearest.index);
  std::vector<std::size_t> selected;
  for (std::size_t j = 0; j < train_.size(); ++j) {
    const auto& t = train_.samples[j];
    if (manhattan_distance(s, t) <= nearest.radius && halfspace_side(s, cstar, t) >= 0.0) {
      selected.push_back(j);
    }
  }
  return selected;
}

Prediction PLkNNModel::predict(FeatureView s) const {
  const NearestCentroid nearest = nearest_centroid(s);
  const auto selected = select_semicircle(s, nearest);
  return decide(s, selected, nearest);
}

PLkNNModel PLkNNModel::with_scaled_weights(double factor) const {
  PLkNNModel copy = *this;
  copy.scale_weights(factor);
  return copy;
}

// ---------------------------------------------------------------------------
// SMKNN / LMKNN

MKNNModel MKNNModel::fit(const Dataset& train, MKNNVariant variant) {
  struct Builder : CentroidModel {
    explicit Builder(const Dataset& d) : CentroidModel(d, CentroidKind::mean) {}
  };
  return MKNNModel(Builder(train), variant);
}

MKNNModel MKNNModel::restore(Dataset train, MKNNVariant variant,
                             std::vector<FeatureVector> centroids, std::vector<double> weights) {
  struct Builder : CentroidModel {
    Builder(Dataset d, std::vector<FeatureVector> c, std::vector<double> w)
        : CentroidModel(std::move(d), CentroidKind::mean, std::move(c), std::move(w)) {}
  };
  return MKNNModel(Builder(std::move(train), std::move(centroids), std::move(weights)), variant);
}

double MKNNModel::radius(FeatureView s) const {
  check_query(s);
  double r = manhattan_distance(s, centroids_[0]);
  for (std::size_t c = 1; c < centroids_.size(); ++c) {
    const double d = manhattan_distance(s, centroids_[c]);
    r = variant_ == MKNNVariant::smallest ? std::min(r, d) : std::max(r, d);
  }
  return r;
}

std::vector<std::size_t> MKNNModel::select_circle(FeatureView s, double radius) const {
  check_query(s);
  std::vector<std::size_t> selected;
  for (std::size_t j = 0; j < train_.size(); ++j) {
    if (manhattan_distance(s, train_.samples[j]) <= radius) selected.push_back(j);
  }
  return selected;
}

Prediction MKNNModel::predict(FeatureView s) const {
  const auto selected = select_circle(s, radius(s));
  return decide(s, selected, nearest_centroid(s));
}

// ---------------------------------------------------------------------------
// k-NN

KNNModel KNNModel::fit(const Dataset& train, std::size_t k) {
  train.validate(false);
  if (k < 1 || k > train.size()) {
    throw ConfigError("k = " + std::to_string(k) + " outside [1, " +
                      std::to_string(train.size()) + "]");
  }
  return KNNModel(train, k);
}

std::vector<std::size_t> neighbours_by_distance(const Dataset& train, FeatureView s) {
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(train.size());
  for (std::size_t j = 0; j < train.size(); ++j) {
    order.emplace_back(euclidean_distance(s, train.samples[j]), j);
  }
  std::sort(order.begin(), order.end());
  std::vector<std::size_t> out;
  out.reserve(order.size());
  for (const auto& [d, j] : order) out.push_back(j);
  return out;
}

Prediction KNNModel::predict(FeatureView s) const {
  if (s.size() != train_.feature_dim()) {
    throw ContractError("query has " + std::to_string(s.size()) + " features, expected " +
                        std::to_string(train_.feature_dim()));
  }
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(train_.size());
  for (std::size_t j = 0; j < train_.size(); ++j) {
    order.emplace_back(euclidean_distance(s, train_.samples[j]), j);
  }
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k_), order.end());

  Prediction out;
  out.scores.assign(train_.class_count, 0.0);
  for (std::size_t i = 0; i < k_; ++i) out.scores[train_.labels[order[i].second]] += 1.0;
  for (double& v : out.scores) v /= static_cast<double>(k_);
  out.label = argmax_lowest(out.scores);
  return out;
}

std::size_t tune_k(const Dataset& train, const Dataset& validation, std::size_t k_max) {
  if (validation.size() == 0) throw ConfigError("tune_k: empty validation set");
  if (train.size() == 0) throw ConfigError("tune_k: empty training set");
  const std::size_t limit = std::min(std::max<std::size_t>(k_max, 1), train.size());

  // Each validation query is sorted once; votes grow incrementally with k.
  std::vector<std::size_t> correct(limit + 1, 0);
  std::vector<std::size_t> votes(train.class_count);
  for (std::size_t v = 0; v < validation.size(); ++v) {
    const auto order = neighbours_by_distance(train, validation.samples[v]);
    std::fill(votes.begin(), votes.end(), 0);
    for (std::size_t k = 1; k <= limit; ++k) {
      ++votes[train.labels[order[k - 1]]];
      const auto winner = static_cast<Label>(
          std::max_element(votes.begin(), votes.end()) - votes.begin());
      if (winner == validation.labels[v]) ++correct[k];
    }
  }
  std::size_t best = 1;
  for (std::size_t k = 2; k <= limit; ++k) {
    if (correct[k] > correct[best]) best = k;
  }
  return best;
}

}  // namespace plknn
