#pragma once

// Delimited-file ingestion, missing-value handling, min-max scaling and the
// repeated stratified train/validation/test split protocol.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "plknn/core.hpp"

namespace plknn {

class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SplitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CategoricalPolicy { error, integer_encode };
enum class ImputePolicy { median, drop_rows };
enum class Scaling { none, min_max };

struct DatasetSpec {
  std::string name;
  std::filesystem::path path;
  /// Header name, 0-based column index, or "last".
  std::string label_column = "last";
  /// Label text of the positive class for binary F1; minority class if unset.
  std::optional<std::string> positive_class;
  std::vector<std::string> missing_tokens{"?", ""};
  CategoricalPolicy categorical = CategoricalPolicy::integer_encode;
  ImputePolicy impute = ImputePolicy::median;
  Scaling scaling = Scaling::none;
  char delimiter = ',';
  bool has_header = true;
  /// Columns (names or indices) ignored entirely, e.g. record identifiers.
  std::vector<std::string> drop_columns;
};

struct Table {
  std::vector<std::string> header;  // synthesised "c0", "c1", ... without a header row
  std::vector<std::vector<std::string>> rows;
};

/// Reads a delimited text file. Cells are trimmed and stripped of one level
/// of double quotes. Blank lines are skipped; ragged rows are an error.
Table read_delimited(const std::filesystem::path& path, char delimiter, bool has_header);

/// Feature matrix with missing cells as nullopt.
using SparseRows = std::vector<std::vector<std::optional<double>>>;

struct Imputed {
  std::vector<FeatureVector> rows;
  /// Source row index of every output row.
  std::vector<std::size_t> kept;
  std::size_t cells_filled = 0;
};

/// drop_rows removes every row holding a missing cell; median fills each
/// missing cell with its column median over the observed values.
Imputed impute_missing(const SparseRows& rows, ImputePolicy policy);

struct LoadedDataset {
  Dataset data;
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;
  std::size_t cells_imputed = 0;
  /// Feature columns that were integer-encoded from text.
  std::vector<std::string> encoded_columns;
};

/// Labels map to contiguous indices in order of first appearance.
LoadedDataset load_dataset(const DatasetSpec& spec);

struct SplitPlan {
  std::size_t n_folds = 20;
  double train = 0.70;
  double validation = 0.15;
  double test = 0.15;
  std::uint64_t seed = 2022;

  void validate() const;
};

struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

/// Per-class partition sizes for a class of `n` samples given the global
/// budget; exposed for tests. See stratified_split for the allocation rule.
std::vector<std::array<std::size_t, 3>> stratified_allocation(
    std::span<const std::size_t> class_sizes, const SplitPlan& plan);

/// One independent random partition, fully determined by (seed, fold).
///
/// Per class: each partition receives floor(fraction * n_c) samples. The
/// leftover samples (at most two per class) go one per partition to whichever
/// partitions are furthest below their global floor-allocated totals, ties in
/// train, validation, test order. Every partition gets at least one sample of
/// every class. Members are drawn by a Fisher-Yates shuffle driven by
/// mt19937_64 seeded with splitmix64(seed, fold). Indices are returned sorted.
FoldSplit stratified_split(const Dataset& data, const SplitPlan& plan, std::size_t fold);

std::vector<FoldSplit> stratified_splits(const Dataset& data, const SplitPlan& plan);

/// Seed of the generator used for `fold`.
std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold);

/// Per-feature affine map onto [0, 1] fitted on one dataset and applied
/// unchanged to others. Zero-range features map to 0. No clipping.
class MinMaxScaler {
 public:
  static MinMaxScaler fit(const Dataset& train);
  static MinMaxScaler restore(std::vector<double> lo, std::vector<double> hi);

  FeatureVector transform(FeatureView x) const;
  void transform_in_place(Dataset& data) const;

  const std::vector<double>& lo() const { return lo_; }
  const std::vector<double>& hi() const { return hi_; }

  bool operator==(const MinMaxScaler&) const = default;

 private:
  std::vector<double> lo_;
  std::vector<double> hi_;
};

/// Parses a numeric cell; nullopt when the text is not a finite number.
std::optional<double> parse_number(std::string_view text);

}  // namespace plknn
