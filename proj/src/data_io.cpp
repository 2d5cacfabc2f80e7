#include "plknn/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>

namespace plknn {

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string clean_cell(std::string_view raw) {
  std::string_view s = trim(raw);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = trim(s.substr(1, s.size() - 2));
  return std::string(s);
}

std::vector<std::string> split_line(const std::string& line, char delimiter) {
  std::vector<std::string> cells;
  std::string current;
  bool quoted = false;
  for (const char ch : line) {
    if (ch == '"') quoted = !quoted;
    if (ch == delimiter && !quoted) {
      cells.push_back(clean_cell(current));
      current.clear();
    } else {
      current += ch;
    }
  }
  cells.push_back(clean_cell(current));
  return cells;
}

std::size_t resolve_column(const std::string& ref, const std::vector<std::string>& header,
                           const std::string& what) {
  if (ref == "last") return header.size() - 1;
  const auto named = std::find(header.begin(), header.end(), ref);
  if (named != header.end()) return static_cast<std::size_t>(named - header.begin());
  std::size_t index = 0;
  const auto [ptr, ec] = std::from_chars(ref.data(), ref.data() + ref.size(), index);
  if (ec == std::errc() && ptr == ref.data() + ref.size() && index < header.size()) return index;
  throw IngestError(what + " '" + ref + "' not found among " + std::to_string(header.size()) +
                    " columns");
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Uniform draw in [0, n) by rejection, so the sequence depends only on mt19937_64.
std::size_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  constexpr std::uint64_t top = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = top - top % n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return static_cast<std::size_t>(x % n);
}

std::size_t floor_share(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

}  // namespace

std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

Table read_delimited(const std::filesystem::path& path, char delimiter, bool has_header) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open '" + path.string() + "'");
  Table table;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto cells = split_line(line, delimiter);
    if (width == 0) {
      width = cells.size();
      if (has_header) {
        table.header = std::move(cells);
        continue;
      }
      for (std::size_t c = 0; c < width; ++c) table.header.push_back("c" + std::to_string(c));
    }
    if (cells.size() != width) {
      throw IngestError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(width) + " columns, found " +
                        std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (width == 0) throw IngestError("'" + path.string() + "' is empty");
  return table;
}

Imputed impute_missing(const SparseRows& rows, ImputePolicy policy) {
  Imputed out;
  if (rows.empty()) return out;
  const std::size_t dim = rows.front().size();

  if (policy == ImputePolicy::drop_rows) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (std::any_of(rows[i].begin(), rows[i].end(), [](const auto& v) { return !v; })) continue;
      FeatureVector row;
      row.reserve(dim);
      for (const auto& v : rows[i]) row.push_back(*v);
      out.rows.push_back(std::move(row));
      out.kept.push_back(i);
    }
    return out;
  }

  std::vector<double> medians(dim, 0.0);
  for (std::size_t k = 0; k < dim; ++k) {
    std::vector<double> observed;
    bool any_missing = false;
    for (const auto& row : rows) {
      if (row[k]) {
        observed.push_back(*row[k]);
      } else {
        any_missing = true;
      }
    }
    if (!any_missing) continue;
    if (observed.empty()) {
      throw IngestError("feature column " + std::to_string(k) + " has no observed values");
    }
    std::sort(observed.begin(), observed.end());
    const std::size_t n = observed.size();
    medians[k] = n % 2 == 1 ? observed[n / 2] : 0.5 * (observed[n / 2 - 1] + observed[n / 2]);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    FeatureVector row(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      if (rows[i][k]) {
        row[k] = *rows[i][k];
      } else {
        row[k] = medians[k];
        ++out.cells_filled;
      }
    }
    out.rows.push_back(std::move(row));
    out.kept.push_back(i);
  }
  return out;
}

LoadedDataset load_dataset(const DatasetSpec& spec) {
  const Table table = read_delimited(spec.path, spec.delimiter, spec.has_header);
  const std::string where = "'" + spec.path.string() + "'";
  const std::size_t label_col = resolve_column(spec.label_column, table.header, "label column");

  std::vector<bool> skip(table.header.size(), false);
  skip[label_col] = true;
  for (const auto& ref : spec.drop_columns) skip[resolve_column(ref, table.header, "column")] = true;
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (!skip[c]) feature_cols.push_back(c);
  }
  if (feature_cols.empty()) throw IngestError(where + ": no feature columns");

  const auto is_missing = [&](const std::string& cell) {
    return std::find(spec.missing_tokens.begin(), spec.missing_tokens.end(), cell) !=
           spec.missing_tokens.end();
  };

  LoadedDataset out;
  out.rows_read = table.rows.size();

  // Columns holding any non-numeric, non-missing text are categorical.
  std::vector<bool> categorical(feature_cols.size(), false);
  for (std::size_t f = 0; f < feature_cols.size(); ++f) {
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const std::string& cell = table.rows[r][feature_cols[f]];
      if (is_missing(cell) || parse_number(cell)) continue;
      if (spec.categorical == CategoricalPolicy::error) {
        throw IngestError(where + ": row " + std::to_string(r + 1) + ", column '" +
                          table.header[feature_cols[f]] + "': non-numeric value '" + cell +
                          "'");
      }
      categorical[f] = true;
      break;
    }
  }

  std::vector<std::map<std::string, double>> codes(feature_cols.size());
  SparseRows sparse;
  std::vector<std::string> label_text;
  sparse.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (is_missing(row[label_col])) {
      throw IngestError(where + ": row " + std::to_string(r + 1) + " has a missing label");
    }
    std::vector<std::optional<double>> values(feature_cols.size());
    for (std::size_t f = 0; f < feature_cols.size(); ++f) {
      const std::string& cell = row[feature_cols[f]];
      if (is_missing(cell)) continue;
      if (categorical[f]) {
        auto [it, inserted] = codes[f].try_emplace(cell, static_cast<double>(codes[f].size()));
        values[f] = it->second;
      } else {
        values[f] = parse_number(cell);
      }
    }
    sparse.push_back(std::move(values));
    label_text.push_back(row[label_col]);
  }

  Imputed imputed = impute_missing(sparse, spec.impute);
  out.cells_imputed = imputed.cells_filled;
  out.rows_dropped = sparse.size() - imputed.rows.size();

  Dataset& data = out.data;
  data.name = spec.name.empty() ? spec.path.stem().string() : spec.name;
  for (const std::size_t c : feature_cols) data.feature_names.push_back(table.header[c]);
  for (std::size_t f = 0; f < feature_cols.size(); ++f) {
    if (categorical[f]) out.encoded_columns.push_back(table.header[feature_cols[f]]);
  }
  std::map<std::string, Label> label_index;
  for (const std::size_t r : imputed.kept) {
    const auto [it, inserted] = label_index.try_emplace(label_text[r], data.class_names.size());
    if (inserted) data.class_names.push_back(label_text[r]);
    data.labels.push_back(it->second);
  }
  data.samples = std::move(imputed.rows);
  data.class_count = data.class_names.size();
  if (data.size() == 0) throw IngestError(where + ": no usable rows");
  data.validate();
  if (spec.positive_class && label_index.count(*spec.positive_class) == 0) {
    throw IngestError(where + ": positive class '" + *spec.positive_class + "' not present");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Splitting

void SplitPlan::validate() const {
  if (n_folds < 1) throw ConfigError("split plan needs at least one fold");
  if (train <= 0.0 || validation <= 0.0 || test <= 0.0) {
    throw ConfigError("split fractions must be positive");
  }
  if (std::abs(train + validation + test - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1");
  }
}

std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(fold)));
}

std::vector<std::array<std::size_t, 3>> stratified_allocation(
    std::span<const std::size_t> class_sizes, const SplitPlan& plan) {
  plan.validate();
  const std::array<double, 3> fractions{plan.train, plan.validation, plan.test};
  const std::size_t total = std::accumulate(class_sizes.begin(), class_sizes.end(), std::size_t{0});

  std::array<std::size_t, 3> target{};
  for (std::size_t p = 0; p < 3; ++p) target[p] = floor_share(fractions[p], total);
  for (std::size_t p = 0, left = total - target[0] - target[1] - target[2]; left > 0; ++p, --left) {
    ++target[p % 3];
  }

  std::vector<std::array<std::size_t, 3>> alloc(class_sizes.size());
  std::array<std::size_t, 3> assigned{};
  for (std::size_t c = 0; c < class_sizes.size(); ++c) {
    for (std::size_t p = 0; p < 3; ++p) {
      alloc[c][p] = floor_share(fractions[p], class_sizes[c]);
      assigned[p] += alloc[c][p];
    }
  }
  for (std::size_t c = 0; c < class_sizes.size(); ++c) {
    std::size_t left = class_sizes[c] - alloc[c][0] - alloc[c][1] - alloc[c][2];
    std::array<bool, 3> used{};
    while (left > 0) {
      std::size_t best = 3;
      long best_deficit = 0;
      for (std::size_t p = 0; p < 3; ++p) {
        if (used[p]) continue;
        const long deficit = static_cast<long>(target[p]) - static_cast<long>(assigned[p]);
        if (best == 3 || deficit > best_deficit) {
          best = p;
          best_deficit = deficit;
        }
      }
      ++alloc[c][best];
      ++assigned[best];
      used[best] = true;
      --left;
    }
    // Tiny classes: guarantee one member per partition, borrowing from train.
    for (std::size_t p = 1; p < 3; ++p) {
      if (alloc[c][p] == 0 && alloc[c][0] > 1) {
        --alloc[c][0];
        ++alloc[c][p];
      }
    }
  }
  return alloc;
}

FoldSplit stratified_split(const Dataset& data, const SplitPlan& plan, std::size_t fold) {
  plan.validate();
  std::vector<std::vector<std::size_t>> members(data.class_count);
  for (std::size_t i = 0; i < data.size(); ++i) members[data.labels[i]].push_back(i);
  std::vector<std::size_t> sizes;
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (members[c].size() < 3) {
      throw SplitError("class '" + data.class_name(c) + "' has " +
                       std::to_string(members[c].size()) +
                       " samples; at least 3 are needed for a three-way split");
    }
    sizes.push_back(members[c].size());
  }
  const auto alloc = stratified_allocation(sizes, plan);

  std::mt19937_64 rng(fold_seed(plan.seed, fold));
  FoldSplit out;
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto& m = members[c];
    // Fisher-Yates spelled out: std::shuffle's draw sequence is library-specific.
    for (std::size_t i = m.size() - 1; i > 0; --i) std::swap(m[i], m[bounded(rng, i + 1)]);
    auto it = m.begin();
    const auto take = [&](std::vector<std::size_t>& dst, std::size_t count) {
      dst.insert(dst.end(), it, it + static_cast<std::ptrdiff_t>(count));
      it += static_cast<std::ptrdiff_t>(count);
    };
    take(out.train, alloc[c][0]);
    take(out.validation, alloc[c][1]);
    take(out.test, alloc[c][2]);
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.validation.begin(), out.validation.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::vector<FoldSplit> stratified_splits(const Dataset& data, const SplitPlan& plan) {
  plan.validate();
  std::vector<FoldSplit> folds;
  folds.reserve(plan.n_folds);
  for (std::size_t f = 0; f < plan.n_folds; ++f) folds.push_back(stratified_split(data, plan, f));
  return folds;
}

// ---------------------------------------------------------------------------
// Scaling

MinMaxScaler MinMaxScaler::fit(const Dataset& train) {
  train.validate(false);
  MinMaxScaler s;
  s.lo_ = train.samples.front();
  s.hi_ = train.samples.front();
  for (const auto& x : train.samples) {
    for (std::size_t k = 0; k < x.size(); ++k) {
      s.lo_[k] = std::min(s.lo_[k], x[k]);
      s.hi_[k] = std::max(s.hi_[k], x[k]);
    }
  }
  return s;
}

MinMaxScaler MinMaxScaler::restore(std::vector<double> lo, std::vector<double> hi) {
  if (lo.size() != hi.size()) throw ContractError("scaler bounds differ in length");
  MinMaxScaler s;
  s.lo_ = std::move(lo);
  s.hi_ = std::move(hi);
  return s;
}

FeatureVector MinMaxScaler::transform(FeatureView x) const {
  if (x.size() != lo_.size()) {
    throw ContractError("scaler expects " + std::to_string(lo_.size()) + " features, got " +
                        std::to_string(x.size()));
  }
  FeatureVector out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double range = hi_[k] - lo_[k];
    out[k] = range > 0.0 ? (x[k] - lo_[k]) / range : 0.0;
  }
  return out;
}

void MinMaxScaler::transform_in_place(Dataset& data) const {
  for (auto& x : data.samples) x = transform(x);
}

}  // namespace plknn
