#pragma once

// Parameterless k-NN (median centroids + semicircle neighbour selection),
// the SMKNN/LMKNN full-circle baselines and plain k-NN.
//
// All models are immutable after fitting. Prediction is a pure function of
// (model, query) and may run concurrently on a shared model.

#include <vector>

#include "plknn/core.hpp"

namespace plknn {

/// Additive floor inside every reciprocal distance (training weights and the
/// per-neighbour score term). Keeps exact matches dominant without infinities.
inline constexpr double kDistanceFloor = 1e-12;

struct Prediction {
  Label label = 0;
  /// Normalised per-class scores; all zero when `fallback_used`.
  std::vector<double> scores;
  bool fallback_used = false;
};

/// Component-wise median; even counts average the two middle values.
FeatureVector class_centroid_median(std::span<const FeatureVector> samples);
/// Component-wise arithmetic mean.
FeatureVector class_centroid_mean(std::span<const FeatureVector> samples);

/// 1 / (euclidean(x, c) + kDistanceFloor).
double training_weight(FeatureView x, FeatureView centroid);

struct NearestCentroid {
  Label index = 0;
  double radius = 0.0;  // Manhattan distance to that centroid
};

struct ClassScores {
  std::vector<double> p;
  /// True when no neighbour contributed (p is all zero).
  bool empty = true;
};

enum class CentroidKind { median, mean };

/// Per-class centroids plus inverse-distance weights of every retained
/// training sample against its own class centroid. Shared state of PL-kNN
/// and the MKNN variants.
class CentroidModel {
 public:
  const std::vector<FeatureVector>& centroids() const { return centroids_; }
  const std::vector<double>& weights() const { return weights_; }
  const Dataset& train() const { return train_; }
  std::size_t class_count() const { return centroids_.size(); }
  std::size_t feature_dim() const { return train_.feature_dim(); }
  CentroidKind centroid_kind() const { return kind_; }

  /// Closest centroid under Manhattan distance; lowest index on ties.
  NearestCentroid nearest_centroid(FeatureView s) const;

  /// Vote over the given neighbours: each adds weight / (manhattan + floor)
  /// to its own class. Scores are normalised to sum to one.
  ClassScores class_scores(FeatureView s, std::span<const std::size_t> neighbours) const;

  bool operator==(const CentroidModel&) const = default;

 protected:
  CentroidModel() = default;
  CentroidModel(Dataset train, CentroidKind kind);
  /// Restores a model from stored state; checks shapes only.
  CentroidModel(Dataset train, CentroidKind kind, std::vector<FeatureVector> centroids,
                std::vector<double> weights);

  Prediction decide(FeatureView s, std::span<const std::size_t> neighbours,
                    const NearestCentroid& nearest) const;
  void check_query(FeatureView s) const;
  void scale_weights(double factor);

  Dataset train_;
  CentroidKind kind_ = CentroidKind::median;
  std::vector<FeatureVector> centroids_;
  std::vector<double> weights_;
};

class PLkNNModel : public CentroidModel {
 public:
  static PLkNNModel fit(const Dataset& train);
  static PLkNNModel restore(Dataset train, std::vector<FeatureVector> centroids,
                            std::vector<double> weights);

  /// Training samples t with manhattan(s, t) <= radius and
  /// halfspace_side(s, c*, t) >= 0, over all classes, in training order.
  std::vector<std::size_t> select_semicircle(FeatureView s, const NearestCentroid& nearest) const;

  Prediction predict(FeatureView s) const;

  /// Copy with every stored weight multiplied by `factor`.
  PLkNNModel with_scaled_weights(double factor) const;

  bool operator==(const PLkNNModel&) const = default;

 private:
  using CentroidModel::CentroidModel;
};

enum class MKNNVariant { smallest, largest };

class MKNNModel : public CentroidModel {
 public:
  static MKNNModel fit(const Dataset& train, MKNNVariant variant);
  static MKNNModel restore(Dataset train, MKNNVariant variant,
                           std::vector<FeatureVector> centroids, std::vector<double> weights);

  MKNNVariant variant() const { return variant_; }

  /// Minimum (SMKNN) or maximum (LMKNN) Manhattan distance to the centroids.
  double radius(FeatureView s) const;
  /// All training samples within `radius` of s, in training order.
  std::vector<std::size_t> select_circle(FeatureView s, double radius) const;

  Prediction predict(FeatureView s) const;

  bool operator==(const MKNNModel&) const = default;

 private:
  MKNNModel(CentroidModel base, MKNNVariant variant)
      : CentroidModel(std::move(base)), variant_(variant) {}
  MKNNVariant variant_ = MKNNVariant::smallest;
};

class KNNModel {
 public:
  /// Throws ConfigError unless 1 <= k <= train.size().
  static KNNModel fit(const Dataset& train, std::size_t k);

  std::size_t k() const { return k_; }
  const Dataset& train() const { return train_; }

  /// Majority vote over the k Euclidean-nearest samples. Distance ties keep
  /// training order; vote ties go to the lowest class index.
  Prediction predict(FeatureView s) const;

  bool operator==(const KNNModel&) const = default;

 private:
  KNNModel(Dataset train, std::size_t k) : train_(std::move(train)), k_(k) {}
  Dataset train_;
  std::size_t k_ = 1;
};

/// Training indices ordered by (euclidean distance to s, index).
std::vector<std::size_t> neighbours_by_distance(const Dataset& train, FeatureView s);

/// Smallest k in [1, min(k_max, |train|)] maximising validation accuracy.
std::size_t tune_k(const Dataset& train, const Dataset& validation, std::size_t k_max = 50);

/// Index of the largest entry; lowest index on ties.
std::size_t argmax_lowest(std::span<const double> values);

}  // namespace plknn
