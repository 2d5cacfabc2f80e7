#include "plknn/model_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

namespace plknn {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double parse_hex(const std::string& token) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') throw ModelFormatError("bad number '" + token + "'");
  return v;
}

void write_vector(std::ostream& out, std::string_view tag, FeatureView v) {
  out << tag;
  for (const double x : v) out << ' ' << hexfloat(x);
  out << '\n';
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Next line split into its tag and remainder.
  std::pair<std::string, std::string> line(std::string_view expected_tag) {
    std::string text;
    if (!std::getline(in_, text)) {
      throw ModelFormatError("unexpected end of model file, wanted '" +
                             std::string(expected_tag) + "'");
    }
    ++line_no_;
    const auto space = text.find(' ');
    std::string tag = text.substr(0, space);
    std::string rest = space == std::string::npos ? "" : text.substr(space + 1);
    if (tag != expected_tag) {
      throw ModelFormatError("line " + std::to_string(line_no_) + ": expected '" +
                             std::string(expected_tag) + "', found '" + tag + "'");
    }
    return {tag, rest};
  }

  std::size_t count(std::string_view tag) {
    const auto [t, rest] = line(tag);
    return static_cast<std::size_t>(parse_hex(rest));
  }

  std::vector<double> numbers(std::string_view tag, std::size_t expected) {
    const auto [t, rest] = line(tag);
    std::istringstream ss(rest);
    std::vector<double> out;
    std::string token;
    while (ss >> token) out.push_back(parse_hex(token));
    if (out.size() != expected) {
      throw ModelFormatError("line " + std::to_string(line_no_) + ": expected " +
                             std::to_string(expected) + " values, found " +
                             std::to_string(out.size()));
    }
    return out;
  }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

}  // namespace

std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

std::string_view method_id(Method m) {
  switch (m) {
    case Method::plknn: return "plknn";
    case Method::smknn: return "smknn";
    case Method::lmknn: return "lmknn";
    case Method::knn: return "knn";
  }
  return "?";
}

std::string_view method_label(Method m) {
  switch (m) {
    case Method::plknn: return "PL-kNN";
    case Method::smknn: return "SMKNN";
    case Method::lmknn: return "LMKNN";
    case Method::knn: return "k-NN";
  }
  return "?";
}

Method parse_method(std::string_view id) {
  for (const Method m : kAllMethods) {
    if (method_id(m) == id) return m;
  }
  throw ConfigError("unknown method '" + std::string(id) +
                    "' (expected plknn, smknn, lmknn or knn)");
}

AnyModel fit_model(Method method, const Dataset& train, std::size_t k) {
  switch (method) {
    case Method::plknn: return PLkNNModel::fit(train);
    case Method::smknn: return MKNNModel::fit(train, MKNNVariant::smallest);
    case Method::lmknn: return MKNNModel::fit(train, MKNNVariant::largest);
    case Method::knn: return KNNModel::fit(train, k);
  }
  throw ConfigError("unknown method");
}

Prediction predict(const AnyModel& model, FeatureView s) {
  return std::visit([&](const auto& m) { return m.predict(s); }, model);
}

Method StoredModel::method() const {
  return std::visit(overloaded{
                        [](const PLkNNModel&) { return Method::plknn; },
                        [](const MKNNModel& m) {
                          return m.variant() == MKNNVariant::smallest ? Method::smknn
                                                                      : Method::lmknn;
                        },
                        [](const KNNModel&) { return Method::knn; },
                    },
                    model);
}

const Dataset& StoredModel::train() const {
  return std::visit([](const auto& m) -> const Dataset& { return m.train(); }, model);
}

Prediction StoredModel::predict(FeatureView raw_query) const {
  if (raw_query.size() != train().feature_dim()) {
    throw ContractError("query has " + std::to_string(raw_query.size()) +
                        " features, model expects " + std::to_string(train().feature_dim()));
  }
  if (scaler) return plknn::predict(model, scaler->transform(raw_query));
  return plknn::predict(model, raw_query);
}

void save_model(std::ostream& out, const StoredModel& stored) {
  const Dataset& train = stored.train();
  const Method method = stored.method();
  out << kModelMagic << ' ' << kModelFormatVersion << '\n';
  out << "method " << method_id(method) << '\n';
  if (const auto* knn = std::get_if<KNNModel>(&stored.model)) out << "k " << knn->k() << '\n';
  out << "dim " << train.feature_dim() << '\n';
  out << "classes " << train.class_count << '\n';
  for (Label c = 0; c < train.class_count; ++c) out << "class " << train.class_name(c) << '\n';
  for (std::size_t k = 0; k < train.feature_dim(); ++k) {
    out << "feature "
        << (k < train.feature_names.size() ? train.feature_names[k] : "f" + std::to_string(k))
        << '\n';
  }
  if (stored.scaler) {
    out << "scaler minmax\n";
    write_vector(out, "lo", stored.scaler->lo());
    write_vector(out, "hi", stored.scaler->hi());
  } else {
    out << "scaler none\n";
  }
  const std::vector<double>* weights = nullptr;
  std::visit(overloaded{
                 [&](const KNNModel&) {},
                 [&](const auto& m) {
                   for (const auto& c : m.centroids()) write_vector(out, "centroid", c);
                   weights = &m.weights();
                 },
             },
             stored.model);
  out << "train " << train.size() << '\n';
  for (std::size_t i = 0; i < train.size(); ++i) {
    out << "sample " << train.labels[i] << ' ' << (weights ? hexfloat((*weights)[i]) : "-");
    for (const double x : train.samples[i]) out << ' ' << hexfloat(x);
    out << '\n';
  }
  out << "end\n";
}

StoredModel load_model(std::istream& in) {
  Reader r(in);
  {
    const auto [tag, version] = r.line(kModelMagic);
    if (version != std::to_string(kModelFormatVersion)) {
      throw ModelFormatError("unsupported model format version '" + version + "'");
    }
  }
  const Method method = parse_method(r.line("method").second);
  const std::size_t k = method == Method::knn ? r.count("k") : 0;
  const std::size_t dim = r.count("dim");
  Dataset train;
  train.class_count = r.count("classes");
  for (Label c = 0; c < train.class_count; ++c) train.class_names.push_back(r.line("class").second);
  for (std::size_t f = 0; f < dim; ++f) train.feature_names.push_back(r.line("feature").second);

  StoredModel stored{PLkNNModel{}, std::nullopt};
  const std::string scaler = r.line("scaler").second;
  if (scaler == "minmax") {
    auto lo = r.numbers("lo", dim);
    auto hi = r.numbers("hi", dim);
    stored.scaler = MinMaxScaler::restore(std::move(lo), std::move(hi));
  } else if (scaler != "none") {
    throw ModelFormatError("unknown scaler '" + scaler + "'");
  }

  std::vector<FeatureVector> centroids;
  if (method != Method::knn) {
    for (Label c = 0; c < train.class_count; ++c) centroids.push_back(r.numbers("centroid", dim));
  }
  const std::size_t m = r.count("train");
  std::vector<double> weights;
  for (std::size_t i = 0; i < m; ++i) {
    const auto [tag, rest] = r.line("sample");
    std::istringstream ss(rest);
    std::size_t label = 0;
    std::string weight;
    if (!(ss >> label >> weight)) throw ModelFormatError("malformed sample line");
    if (label >= train.class_count) throw ModelFormatError("sample label out of range");
    if (method != Method::knn) weights.push_back(parse_hex(weight));
    FeatureVector x;
    std::string token;
    while (ss >> token) x.push_back(parse_hex(token));
    if (x.size() != dim) throw ModelFormatError("sample has wrong dimension");
    train.samples.push_back(std::move(x));
    train.labels.push_back(label);
  }
  r.line("end");

  switch (method) {
    case Method::plknn:
      stored.model = PLkNNModel::restore(std::move(train), std::move(centroids), std::move(weights));
      break;
    case Method::smknn:
    case Method::lmknn:
      stored.model = MKNNModel::restore(
          std::move(train),
          method == Method::smknn ? MKNNVariant::smallest : MKNNVariant::largest,
          std::move(centroids), std::move(weights));
      break;
    case Method::knn:
      stored.model = KNNModel::fit(train, k);
      break;
  }
  return stored;
}

}  // namespace plknn
