#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "plknn/data_io.hpp"

using namespace plknn;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("plknn-io-" + std::to_string(std::random_device{}()) + "-" +
             std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name) << text;
    return path_ / name;
  }

 private:
  fs::path path_;
  static inline int counter_ = 0;
};

DatasetSpec spec_for(const fs::path& path) {
  DatasetSpec s;
  s.path = path;
  return s;
}

Dataset labelled(const std::vector<std::size_t>& class_sizes) {
  Dataset d;
  d.class_count = class_sizes.size();
  for (std::size_t c = 0; c < class_sizes.size(); ++c) {
    for (std::size_t i = 0; i < class_sizes[c]; ++i) {
      d.samples.push_back({static_cast<double>(d.samples.size())});
      d.labels.push_back(c);
    }
  }
  return d;
}

std::vector<std::size_t> counts_of(const Dataset& d, const std::vector<std::size_t>& idx) {
  std::vector<std::size_t> out(d.class_count, 0);
  for (const std::size_t i : idx) ++out[d.labels[i]];
  return out;
}

const fs::path kData = PLKNN_TEST_DATA_DIR;

}  // namespace

// ---------------------------------------------------------------------------
// Ingestion

TEST(Load, MinimalFileWithMissingMarker) {
  TempDir dir;
  const auto path = dir.write("tiny.csv", "a,b,label\n1,?,x\n3,4,y\n");
  const auto loaded = load_dataset(spec_for(path));
  EXPECT_EQ(loaded.data.size(), 2u);
  EXPECT_EQ(loaded.cells_imputed, 1u);
  EXPECT_EQ(loaded.data.samples[0], (FeatureVector{1, 4}));
  EXPECT_EQ(loaded.data.class_names, (std::vector<std::string>{"x", "y"}));

  auto drop = spec_for(path);
  drop.impute = ImputePolicy::drop_rows;
  const auto dropped = load_dataset(drop);
  EXPECT_EQ(dropped.data.size(), 1u);
  EXPECT_EQ(dropped.rows_dropped, 1u);
}

TEST(Load, LabelsMapInFirstAppearanceOrder) {
  TempDir dir;
  const auto path = dir.write("l.csv", "y,f\nzeta,1\nalpha,2\nzeta,3\nbeta,4\n");
  auto spec = spec_for(path);
  spec.label_column = "y";
  const auto d = load_dataset(spec).data;
  EXPECT_EQ(d.class_names, (std::vector<std::string>{"zeta", "alpha", "beta"}));
  EXPECT_EQ(d.labels, (std::vector<Label>{0, 1, 0, 2}));
  EXPECT_EQ(d.feature_names, (std::vector<std::string>{"f"}));

  spec.label_column = "0";
  EXPECT_EQ(load_dataset(spec).data.labels, d.labels);
}

TEST(Load, CategoricalColumns) {
  TempDir dir;
  const auto path = dir.write("c.csv", "sex,age,y\nm,30,a\nf,40,b\nm,?,a\n");
  const auto loaded = load_dataset(spec_for(path));
  EXPECT_EQ(loaded.encoded_columns, (std::vector<std::string>{"sex"}));
  EXPECT_EQ(loaded.data.samples[0][0], 0.0);
  EXPECT_EQ(loaded.data.samples[1][0], 1.0);
  EXPECT_EQ(loaded.data.samples[2][1], 35.0);

  auto strict = spec_for(path);
  strict.categorical = CategoricalPolicy::error;
  try {
    load_dataset(strict);
    FAIL() << "expected IngestError";
  } catch (const IngestError& e) {
    EXPECT_NE(std::string(e.what()).find("sex"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos);
  }
}

TEST(Load, Errors) {
  TempDir dir;
  EXPECT_THROW(load_dataset(spec_for(dir.write("r.csv", "a,b\n1,2\n3\n"))), IngestError);
  EXPECT_THROW(load_dataset(spec_for("/nonexistent/file.csv")), IngestError);
  auto bad_label = spec_for(dir.write("g.csv", "a,b\n1,x\n"));
  bad_label.label_column = "nope";
  EXPECT_THROW(load_dataset(bad_label), IngestError);
  EXPECT_THROW(load_dataset(spec_for(dir.write("m.csv", "a,b,y\n?,1,p\n?,2,q\n"))), IngestError);
  auto pos = spec_for(dir.write("p.csv", "a,y\n1,p\n2,q\n"));
  pos.positive_class = "z";
  EXPECT_THROW(load_dataset(pos), IngestError);
}

TEST(Load, QuotedCellsAndHeaderless) {
  TempDir dir;
  auto spec = spec_for(dir.write("q.csv", "\"1.5\", 2 ,\"lab el\"\n3,4,x\n"));
  spec.has_header = false;
  const auto d = load_dataset(spec).data;
  EXPECT_EQ(d.samples[0], (FeatureVector{1.5, 2}));
  EXPECT_EQ(d.class_names[0], "lab el");
}

TEST(Impute, MedianAndDrop) {
  const SparseRows rows{{1.0, 5.0}, {std::nullopt, 6.0}, {3.0, 7.0}};
  const auto med = impute_missing(rows, ImputePolicy::median);
  EXPECT_EQ(med.rows[1], (FeatureVector{2.0, 6.0}));
  EXPECT_EQ(med.cells_filled, 1u);
  const auto drop = impute_missing(rows, ImputePolicy::drop_rows);
  EXPECT_EQ(drop.rows.size(), 2u);
  EXPECT_EQ(drop.kept, (std::vector<std::size_t>{0, 2}));

  const SparseRows full{{1.0}, {2.0}};
  const auto same = impute_missing(full, ImputePolicy::median);
  EXPECT_EQ(same.rows, (std::vector<FeatureVector>{{1.0}, {2.0}}));
  EXPECT_EQ(same.cells_filled, 0u);
}

TEST(Load, BundledWineShape) {
  auto spec = spec_for(kData / "wine.csv");
  const auto d = load_dataset(spec).data;
  EXPECT_EQ(d.size(), 178u);
  EXPECT_EQ(d.feature_dim(), 13u);
  EXPECT_EQ(d.class_count, 3u);
}

TEST(Load, BundledBreastCancerOriginalMissingRows) {
  auto spec = spec_for(kData / "bco.csv");
  spec.drop_columns = {"id"};
  const auto median = load_dataset(spec);
  EXPECT_EQ(median.data.size(), 699u);
  EXPECT_EQ(median.cells_imputed, 16u);
  EXPECT_EQ(median.data.feature_dim(), 9u);
  spec.impute = ImputePolicy::drop_rows;
  EXPECT_EQ(load_dataset(spec).data.size(), 683u);
}

TEST(ParseNumber, Forms) {
  EXPECT_EQ(parse_number(" 2.5 "), 2.5);
  EXPECT_EQ(parse_number("+3"), 3.0);
  EXPECT_EQ(parse_number(".28"), 0.28);
  EXPECT_EQ(parse_number("1e3"), 1000.0);
  EXPECT_FALSE(parse_number("abc"));
  EXPECT_FALSE(parse_number("1.2.3"));
  EXPECT_FALSE(parse_number("inf"));
  EXPECT_FALSE(parse_number(""));
}

// ---------------------------------------------------------------------------
// Splits

TEST(Split, BalancedHundredAllocation) {
  const std::vector<std::size_t> sizes{50, 50};
  const auto alloc = stratified_allocation(sizes, SplitPlan{});
  std::array<std::size_t, 3> totals{};
  for (const auto& a : alloc) {
    EXPECT_EQ(a[0], 35u);
    EXPECT_TRUE((a[1] == 7 && a[2] == 8) || (a[1] == 8 && a[2] == 7));
    for (std::size_t p = 0; p < 3; ++p) totals[p] += a[p];
  }
  EXPECT_EQ(totals, (std::array<std::size_t, 3>{70, 15, 15}));

  const auto d = labelled({50, 50});
  const auto f = stratified_split(d, SplitPlan{}, 0);
  EXPECT_EQ(f.train.size(), 70u);
  EXPECT_EQ(f.validation.size(), 15u);
  EXPECT_EQ(f.test.size(), 15u);
}

TEST(Split, PartitionAndStratificationProperties) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> size(7, 120);
  const std::array<double, 3> fractions{0.70, 0.15, 0.15};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::size_t> sizes(2 + trial % 5);
    for (auto& s : sizes) s = size(rng);
    const auto d = labelled(sizes);
    SplitPlan plan;
    plan.n_folds = 3;
    plan.seed = static_cast<std::uint64_t>(trial);
    for (const auto& f : stratified_splits(d, plan)) {
      std::vector<std::size_t> all;
      all.insert(all.end(), f.train.begin(), f.train.end());
      all.insert(all.end(), f.validation.begin(), f.validation.end());
      all.insert(all.end(), f.test.begin(), f.test.end());
      std::sort(all.begin(), all.end());
      ASSERT_EQ(all.size(), d.size());
      for (std::size_t i = 0; i < all.size(); ++i) ASSERT_EQ(all[i], i);

      const std::array<std::vector<std::size_t>, 3> parts{f.train, f.validation, f.test};
      for (std::size_t p = 0; p < 3; ++p) {
        const auto counts = counts_of(d, parts[p]);
        for (std::size_t c = 0; c < sizes.size(); ++c) {
          ASSERT_LE(std::abs(static_cast<double>(counts[c]) -
                             fractions[p] * static_cast<double>(sizes[c])),
                    1.0 + 1e-9);  // 0.7 * 30 evaluates to 20.999999999999996
          ASSERT_GE(counts[c], 1u);
        }
      }
    }
  }
}

TEST(Split, TinyClassesStillReachEveryPartition) {
  const auto d = labelled({3, 4, 40});
  const auto f = stratified_split(d, SplitPlan{}, 5);
  for (const auto* part : {&f.train, &f.validation, &f.test}) {
    for (const std::size_t n : counts_of(d, *part)) EXPECT_GE(n, 1u);
  }
  EXPECT_THROW(stratified_split(labelled({2, 40}), SplitPlan{}, 0), SplitError);
}

TEST(Split, DeterministicAndFoldsDiffer) {
  const auto d = labelled({60, 40});
  SplitPlan plan;
  plan.n_folds = 1;
  const auto a = stratified_split(d, plan, 0);
  const auto b = stratified_split(d, plan, 0);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.validation, b.validation);
  EXPECT_EQ(a.test, b.test);
  EXPECT_NE(stratified_split(d, plan, 1).train, a.train);
  plan.seed = 99;
  EXPECT_NE(stratified_split(d, plan, 0).train, a.train);

  // Fold streams are independent of how many folds are requested.
  SplitPlan many = plan;
  many.n_folds = 5;
  EXPECT_EQ(stratified_splits(d, many)[3].test, stratified_split(d, plan, 3).test);
}

TEST(Split, InvalidPlans) {
  SplitPlan p;
  p.train = 0.8;
  EXPECT_THROW(p.validate(), ConfigError);
  p = SplitPlan{};
  p.n_folds = 0;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Split, RecombinationIsBitExact) {
  TempDir dir;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  std::string text = "f0,f1,f2,y\n";
  std::vector<std::vector<std::string>> cells;
  for (int i = 0; i < 90; ++i) {
    std::vector<std::string> row;
    for (int k = 0; k < 3; ++k) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", u(rng) / 7.0);
      row.push_back(buf);
      text += std::string(buf) + ",";
    }
    cells.push_back(row);
    text += (i % 3 == 0 ? "a\n" : "b\n");
  }
  const auto d = load_dataset(spec_for(dir.write("exact.csv", text))).data;
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t k = 0; k < 3; ++k) ASSERT_EQ(d.samples[i][k], std::strtod(cells[i][k].c_str(), nullptr));
  }
  const auto f = stratified_split(d, SplitPlan{}, 4);
  std::vector<FeatureVector> rebuilt(d.size());
  for (const auto* part : {&f.train, &f.validation, &f.test}) {
    const Dataset sub = d.subset(*part);
    for (std::size_t j = 0; j < part->size(); ++j) rebuilt[(*part)[j]] = sub.samples[j];
  }
  EXPECT_EQ(rebuilt, d.samples);
}

// ---------------------------------------------------------------------------
// Scaling

TEST(MinMax, TrainFittedAffineMap) {
  Dataset train;
  train.class_count = 1;
  train.samples = {{2.0, 5.0}, {6.0, 5.0}};
  train.labels = {0, 0};
  const auto s = MinMaxScaler::fit(train);
  EXPECT_EQ(s.transform(FeatureVector{4.0, 5.0}), (FeatureVector{0.5, 0.0}));
  EXPECT_EQ(s.transform(FeatureVector{10.0, 9.0}), (FeatureVector{2.0, 0.0}));
  EXPECT_EQ(s.transform(FeatureVector{0.0, 1.0})[0], -0.5);
  EXPECT_THROW(s.transform(FeatureVector{1.0}), ContractError);
}
