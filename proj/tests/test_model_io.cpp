#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "plknn/model_io.hpp"

using namespace plknn;

namespace {

Dataset random_dataset(std::uint64_t seed, std::size_t m = 40, std::size_t d = 3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Dataset out;
  out.class_count = 3;
  out.class_names = {"setosa", "versicolor", "virginica"};
  for (std::size_t k = 0; k < d; ++k) out.feature_names.push_back("x" + std::to_string(k));
  for (std::size_t i = 0; i < m; ++i) {
    const Label c = i % 3;
    FeatureVector x(d);
    for (auto& v : x) v = g(rng) / 3.0 + static_cast<double>(c);
    out.samples.push_back(std::move(x));
    out.labels.push_back(c);
  }
  return out;
}

std::string serialise(const StoredModel& m) {
  std::ostringstream out;
  save_model(out, m);
  return out.str();
}

StoredModel parse(const std::string& text) {
  std::istringstream in(text);
  return load_model(in);
}

}  // namespace

TEST(ModelFile, RoundTripIsByteIdenticalForEveryMethod) {
  const auto train = random_dataset(1);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(1.0, 1.0);
  for (const Method method : kAllMethods) {
    StoredModel stored{fit_model(method, train, 5), std::nullopt};
    const std::string text = serialise(stored);
    const StoredModel back = parse(text);
    EXPECT_EQ(back.method(), method);
    EXPECT_EQ(serialise(back), text) << method_id(method);
    EXPECT_EQ(back.train().samples, train.samples);
    for (int q = 0; q < 50; ++q) {
      const FeatureVector s{g(rng), g(rng), g(rng)};
      const auto a = stored.predict(s);
      const auto b = back.predict(s);
      ASSERT_EQ(a.label, b.label);
      ASSERT_EQ(a.scores, b.scores);
    }
  }
}

TEST(ModelFile, RefittingIdenticalDataGivesIdenticalFile) {
  const auto train = random_dataset(3);
  const StoredModel a{fit_model(Method::plknn, train), std::nullopt};
  const StoredModel b{fit_model(Method::plknn, train), std::nullopt};
  EXPECT_EQ(serialise(a), serialise(b));
}

TEST(ModelFile, ScalerIsStoredAndApplied) {
  auto train = random_dataset(4);
  const auto scaler = MinMaxScaler::fit(train);
  scaler.transform_in_place(train);
  const StoredModel stored{fit_model(Method::lmknn, train), scaler};
  const auto back = parse(serialise(stored));
  ASSERT_TRUE(back.scaler.has_value());
  EXPECT_EQ(*back.scaler, scaler);
  const FeatureVector raw{0.3, 1.7, 2.2};
  EXPECT_EQ(back.predict(raw).label, std::get<MKNNModel>(stored.model).predict(scaler.transform(raw)).label);
}

TEST(ModelFile, MetadataSurvives) {
  const auto train = random_dataset(5);
  const auto back = parse(serialise(StoredModel{fit_model(Method::knn, train, 7), std::nullopt}));
  EXPECT_EQ(back.train().class_names, train.class_names);
  EXPECT_EQ(back.train().feature_names, train.feature_names);
  EXPECT_EQ(std::get<KNNModel>(back.model).k(), 7u);
}

TEST(ModelFile, RejectsDamagedInput) {
  const auto train = random_dataset(6);
  const std::string text = serialise(StoredModel{fit_model(Method::smknn, train), std::nullopt});
  EXPECT_THROW(parse("not-a-model 1\n"), ModelFormatError);
  std::string wrong_version = text;
  wrong_version.replace(wrong_version.find(" 1\n"), 3, " 9\n");
  EXPECT_THROW(parse(wrong_version), ModelFormatError);
  EXPECT_THROW(parse(text.substr(0, text.size() / 2)), ModelFormatError);
  std::string bad_method = text;
  bad_method.replace(bad_method.find("smknn"), 5, "xxxxx");
  EXPECT_THROW(parse(bad_method), ConfigError);
}

TEST(ModelFile, QueryDimensionChecked) {
  const auto train = random_dataset(7);
  const StoredModel stored{fit_model(Method::plknn, train), std::nullopt};
  try {
    stored.predict(FeatureVector{1.0, 2.0});
    FAIL() << "expected ContractError";
  } catch (const ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("expects 3"), std::string::npos);
  }
}

TEST(MethodRegistry, NamesRoundTrip) {
  for (const Method m : kAllMethods) EXPECT_EQ(parse_method(method_id(m)), m);
  EXPECT_EQ(method_label(Method::plknn), "PL-kNN");
  EXPECT_THROW(parse_method("svm"), ConfigError);
}
