#pragma once

// Method registry and the versioned text format for fitted models.
//
// Every floating-point value is written as a C99 hex-float, so a saved model
// reloads bit-exactly and refitting identical data yields an identical file.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "plknn/classifiers.hpp"
#include "plknn/data_io.hpp"

namespace plknn {

enum class Method { plknn, smknn, lmknn, knn };

inline constexpr std::array<Method, 4> kAllMethods = {Method::plknn, Method::smknn,
                                                      Method::lmknn, Method::knn};

/// Identifier used in configs and files: "plknn", "smknn", "lmknn", "knn".
std::string_view method_id(Method m);
/// Display name: "PL-kNN", "SMKNN", "LMKNN", "k-NN".
std::string_view method_label(Method m);
/// Throws ConfigError on unknown names.
Method parse_method(std::string_view id);

using AnyModel = std::variant<PLkNNModel, MKNNModel, KNNModel>;

struct StoredModel {
  AnyModel model;
  /// Applied to raw queries before prediction when present.
  std::optional<MinMaxScaler> scaler;

  Method method() const;
  const Dataset& train() const;
  Prediction predict(FeatureView raw_query) const;
};

/// Parameterless methods ignore `k`; k-NN requires it.
AnyModel fit_model(Method method, const Dataset& train, std::size_t k = 1);

Prediction predict(const AnyModel& model, FeatureView s);

inline constexpr std::string_view kModelMagic = "plknn-model";
inline constexpr int kModelFormatVersion = 1;

class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void save_model(std::ostream& out, const StoredModel& model);
StoredModel load_model(std::istream& in);

std::string hexfloat(double v);

}  // namespace plknn
