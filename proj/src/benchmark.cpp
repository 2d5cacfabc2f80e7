#include "plknn/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace plknn {

namespace {

using json = nlohmann::json;

std::string num17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed4(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string_view impute_id(ImputePolicy p) { return p == ImputePolicy::median ? "median" : "drop"; }
std::string_view scaling_id(Scaling s) { return s == Scaling::none ? "none" : "minmax"; }
std::string_view categorical_id(CategoricalPolicy c) {
  return c == CategoricalPolicy::error ? "error" : "encode";
}

ImputePolicy parse_impute(const std::string& s) {
  if (s == "median") return ImputePolicy::median;
  if (s == "drop") return ImputePolicy::drop_rows;
  throw ConfigError("unknown impute policy '" + s + "' (expected median or drop)");
}

Scaling parse_scaling(const std::string& s) {
  if (s == "none") return Scaling::none;
  if (s == "minmax") return Scaling::min_max;
  throw ConfigError("unknown scaling '" + s + "' (expected none or minmax)");
}

CategoricalPolicy parse_categorical(const std::string& s) {
  if (s == "encode") return CategoricalPolicy::integer_encode;
  if (s == "error") return CategoricalPolicy::error;
  throw ConfigError("unknown categorical policy '" + s + "' (expected encode or error)");
}

std::string column_ref(const json& j) {
  return j.is_number_integer() ? std::to_string(j.get<long>()) : j.get<std::string>();
}

std::vector<double> metric_values(const MetricReport& report, MetricKind metric) {
  return metric == MetricKind::f1 ? report.f1s() : report.accuracies();
}

double metric_mean(const MetricReport& report, MetricKind metric) {
  return metric == MetricKind::f1 ? report.f1().mean : report.accuracy().mean;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string_view metric_id(MetricKind m) { return m == MetricKind::f1 ? "f1" : "accuracy"; }

MetricKind parse_metric(std::string_view id) {
  if (id == "f1") return MetricKind::f1;
  if (id == "accuracy") return MetricKind::accuracy;
  throw ConfigError("unknown metric '" + std::string(id) + "' (expected f1 or accuracy)");
}

// ---------------------------------------------------------------------------
// Configuration

void ExperimentConfig::validate() const {
  if (datasets.empty()) throw ConfigError("experiment lists no datasets");
  if (methods.empty()) throw ConfigError("experiment lists no methods");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  if (k_max < 1) throw ConfigError("kmax must be at least 1");
  split.validate();
  for (std::size_t i = 0; i < methods.size(); ++i) {
    for (std::size_t j = i + 1; j < methods.size(); ++j) {
      if (methods[i] == methods[j]) throw ConfigError("method listed twice");
    }
  }
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream out;
  out << "seed=" << split.seed << "\nfolds=" << split.n_folds << "\nfractions="
      << num17(split.train) << ',' << num17(split.validation) << ',' << num17(split.test)
      << "\nkmax=" << k_max << "\nmetric=" << metric_id(metric) << "\nalpha=" << num17(alpha)
      << "\nmethods=";
  for (std::size_t i = 0; i < methods.size(); ++i) out << (i ? "," : "") << method_id(methods[i]);
  out << '\n';
  for (const auto& d : datasets) {
    out << "dataset=" << d.name << ";path=" << d.path.filename().string()
        << ";label=" << d.label_column << ";positive=" << d.positive_class.value_or("")
        << ";missing=" << join(d.missing_tokens, "|") << ";categorical="
        << categorical_id(d.categorical) << ";impute=" << impute_id(d.impute)
        << ";scaling=" << scaling_id(d.scaling) << ";delimiter=" << d.delimiter
        << ";header=" << d.has_header << ";drop=" << join(d.drop_columns, "|") << '\n';
  }
  return out.str();
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("'" + path.string() + "': " + e.what());
  }
  const auto base = path.parent_path();
  ExperimentConfig cfg;
  try {
    cfg.split.seed = doc.value("seed", cfg.split.seed);
    cfg.split.n_folds = doc.value("folds", cfg.split.n_folds);
    if (doc.contains("fractions")) {
      const auto f = doc.at("fractions").get<std::vector<double>>();
      if (f.size() != 3) throw ConfigError("fractions needs three values");
      cfg.split.train = f[0];
      cfg.split.validation = f[1];
      cfg.split.test = f[2];
    }
    cfg.k_max = doc.value("kmax", cfg.k_max);
    cfg.alpha = doc.value("alpha", cfg.alpha);
    cfg.metric = parse_metric(doc.value("metric", std::string("f1")));
    if (doc.contains("methods")) {
      cfg.methods.clear();
      for (const auto& m : doc.at("methods")) cfg.methods.push_back(parse_method(m.get<std::string>()));
    }
    if (doc.contains("out")) cfg.out_dir = base / doc.at("out").get<std::string>();
    const std::string scaling = doc.value("scaling", std::string("none"));
    const std::string impute = doc.value("impute", std::string("median"));
    const std::string categorical = doc.value("categorical", std::string("encode"));

    for (const auto& d : doc.at("datasets")) {
      DatasetSpec spec;
      spec.path = d.at("path").get<std::string>();
      if (spec.path.is_relative()) spec.path = base / spec.path;
      spec.name = d.value("name", spec.path.stem().string());
      if (d.contains("label")) spec.label_column = column_ref(d.at("label"));
      if (d.contains("positive") && !d.at("positive").is_null()) {
        spec.positive_class = d.at("positive").is_string() ? d.at("positive").get<std::string>()
                                                           : d.at("positive").dump();
      }
      if (d.contains("missing")) spec.missing_tokens = d.at("missing").get<std::vector<std::string>>();
      spec.categorical = parse_categorical(d.value("categorical", categorical));
      spec.impute = parse_impute(d.value("impute", impute));
      spec.scaling = parse_scaling(d.value("scaling", scaling));
      const std::string delim = d.value("delimiter", std::string(","));
      if (delim.size() != 1) throw ConfigError("delimiter must be a single character");
      spec.delimiter = delim == "\\t" ? '\t' : delim[0];
      spec.has_header = d.value("header", true);
      if (d.contains("drop")) {
        for (const auto& c : d.at("drop")) spec.drop_columns.push_back(column_ref(c));
      }
      cfg.datasets.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    throw ConfigError("'" + path.string() + "': " + e.what());
  }
  cfg.validate();
  return cfg;
}

F1Mode f1_mode_for(const Dataset& data, const DatasetSpec& spec) {
  if (data.class_count != 2) return F1Mode::macro();
  if (spec.positive_class) {
    for (Label c = 0; c < data.class_count; ++c) {
      if (data.class_name(c) == *spec.positive_class) return F1Mode::binary(c);
    }
    throw ConfigError("positive class '" + *spec.positive_class + "' not found in '" +
                      data.name + "'");
  }
  const auto counts = data.class_counts();
  return F1Mode::binary(counts[1] < counts[0] ? 1 : 0);
}

// ---------------------------------------------------------------------------
// Protocol

std::vector<FoldOutcome> evaluate_fold(const Dataset& train_in, const Dataset& validation_in,
                                       const Dataset& test_in, std::span<const Method> methods,
                                       F1Mode f1_mode, Scaling scaling, std::size_t k_max) {
  Dataset train = train_in;
  Dataset validation = validation_in;
  Dataset test = test_in;
  if (scaling == Scaling::min_max) {
    const auto scaler = MinMaxScaler::fit(train);
    scaler.transform_in_place(train);
    scaler.transform_in_place(validation);
    scaler.transform_in_place(test);
  }

  std::vector<FoldOutcome> out;
  std::vector<Label> predicted(test.size());
  for (const Method method : methods) {
    FoldOutcome o{method};
    if (method == Method::knn) o.k = tune_k(train, validation, k_max);
    const AnyModel model = fit_model(method, train, o.k);
    for (std::size_t i = 0; i < test.size(); ++i) predicted[i] = predict(model, test.samples[i]).label;
    o.accuracy = accuracy(predicted, test.labels);
    o.f1 = f1_score(predicted, test.labels, test.class_count, f1_mode);
    out.push_back(o);
  }
  return out;
}

bool BenchmarkResult::any_failed() const {
  return std::any_of(datasets.begin(), datasets.end(), [](const auto& d) { return d.failed(); });
}

BenchmarkResult run_benchmark(const ExperimentConfig& config) {
  config.validate();
  BenchmarkResult result;
  result.config = config;
  for (const auto& spec : config.datasets) {
    DatasetResult dr;
    dr.name = spec.name;
    try {
      const Dataset data = load_dataset(spec).data;
      const F1Mode mode = f1_mode_for(data, spec);
      for (std::size_t f = 0; f < config.split.n_folds; ++f) {
        const FoldSplit split = stratified_split(data, config.split, f);
        const auto outcomes =
            evaluate_fold(data.subset(split.train), data.subset(split.validation),
                          data.subset(split.test), config.methods, mode, spec.scaling,
                          config.k_max);
        for (const auto& o : outcomes) {
          dr.reports[o.method].folds.push_back({o.accuracy, o.f1});
          if (o.method == Method::knn) dr.tuned_k.push_back(o.k);
        }
      }
    } catch (const std::exception& e) {
      dr.error = e.what();
      dr.reports.clear();
      dr.tuned_k.clear();
    }
    result.datasets.push_back(std::move(dr));
  }
  compute_statistics(result);
  return result;
}

void compute_statistics(BenchmarkResult& result) {
  const auto& cfg = result.config;
  result.wilcoxon.clear();
  result.mean_ranks.clear();
  result.critical_difference = 0.0;
  result.ranked_datasets = 0;

  const Method reference =
      std::find(cfg.methods.begin(), cfg.methods.end(), Method::plknn) != cfg.methods.end()
          ? Method::plknn
          : cfg.methods.front();

  ScoreMatrix scores;
  for (const auto& m : cfg.methods) scores.column_names.emplace_back(method_label(m));
  for (const auto& d : result.datasets) {
    if (d.failed()) continue;
    for (const Method m : cfg.methods) {
      if (m == reference) continue;
      const auto a = metric_values(d.reports.at(reference), cfg.metric);
      const auto b = metric_values(d.reports.at(m), cfg.metric);
      result.wilcoxon.push_back({d.name, reference, m, cfg.metric,
                                 wilcoxon_signed_rank(a, b, cfg.alpha)});
    }
    scores.row_names.push_back(d.name);
    std::vector<double> row;
    for (const Method m : cfg.methods) row.push_back(metric_mean(d.reports.at(m), cfg.metric));
    scores.values.push_back(std::move(row));
  }

  result.ranked_datasets = scores.values.size();
  if (cfg.methods.size() >= 2 && !scores.values.empty()) {
    result.mean_ranks = friedman_average_ranks(scores, true);
    const bool supported = std::abs(cfg.alpha - 0.05) < 1e-12 || std::abs(cfg.alpha - 0.10) < 1e-12;
    result.cd_alpha = supported ? cfg.alpha : 0.05;
    if (cfg.methods.size() <= 10) {
      result.critical_difference =
          nemenyi_critical_difference(cfg.methods.size(), scores.values.size(), result.cd_alpha);
    }
  }
}

// ---------------------------------------------------------------------------
// Output files

void write_outputs(const BenchmarkResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& cfg = result.config;

  std::ostringstream csv;
  csv << "dataset,method,fold,accuracy,f1\n";
  for (const auto& d : result.datasets) {
    for (const Method m : cfg.methods) {
      const auto it = d.reports.find(m);
      if (it == d.reports.end()) continue;
      for (std::size_t f = 0; f < it->second.folds.size(); ++f) {
        csv << d.name << ',' << method_id(m) << ',' << f << ','
            << num17(it->second.folds[f].accuracy) << ',' << num17(it->second.folds[f].f1) << '\n';
      }
    }
  }
  write_file(dir / "results.csv", csv.str());

  std::ostringstream wil;
  wil << "dataset,reference,method,metric,n_effective,statistic,p_value,reject\n";
  for (const auto& t : result.wilcoxon) {
    wil << t.dataset << ',' << method_id(t.reference) << ',' << method_id(t.other) << ','
        << metric_id(t.metric) << ',' << t.result.n_effective << ','
        << num17(t.result.statistic) << ',' << num17(t.result.p_value) << ','
        << (t.result.reject_at_alpha ? 1 : 0) << '\n';
  }
  write_file(dir / "wilcoxon.csv", wil.str());

  if (!result.mean_ranks.empty()) {
    std::vector<std::string> names;
    for (const Method m : cfg.methods) names.emplace_back(method_label(m));
    write_file(dir / "nemenyi.svg",
               render_cd_diagram(result.mean_ranks, result.critical_difference, names));
  } else {
    write_file(dir / "nemenyi.svg",
               "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
               "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"320\" height=\"40\">\n"
               "<text x=\"10\" y=\"24\">no ranking: fewer than two methods or no datasets"
               "</text>\n</svg>\n");
  }

  write_file(dir / "summary.txt", render_report(result, ReportFormat::text));

  std::ostringstream prov;
  std::vector<std::string> method_ids;
  for (const Method m : cfg.methods) method_ids.emplace_back(method_id(m));
  prov << "schema_version=" << kResultsSchemaVersion << '\n'
       << "artifact_version=" << kArtifactVersion << '\n'
       << "seed=" << cfg.split.seed << '\n'
       << "folds=" << cfg.split.n_folds << '\n'
       << "fractions=" << num17(cfg.split.train) << ',' << num17(cfg.split.validation) << ','
       << num17(cfg.split.test) << '\n'
       << "kmax=" << cfg.k_max << '\n'
       << "metric=" << metric_id(cfg.metric) << '\n'
       << "alpha=" << num17(cfg.alpha) << '\n'
       << "methods=" << join(method_ids, ",") << '\n'
       << "config_digest=" << std::hex << std::setw(16) << std::setfill('0')
       << fnv1a64(cfg.canonical()) << std::dec << '\n';
  std::vector<std::string> names;
  for (const auto& d : result.datasets) names.push_back(d.name);
  prov << "datasets=" << join(names, ",") << '\n';
  for (const auto& d : result.datasets) {
    prov << "status." << d.name << '=' << (d.failed() ? "failed: " + d.error : "ok") << '\n';
    if (!d.tuned_k.empty()) {
      std::vector<std::string> ks;
      for (const auto k : d.tuned_k) ks.push_back(std::to_string(k));
      prov << "tuned_k." << d.name << '=' << join(ks, ",") << '\n';
    }
  }
  prov << "generated_at=" << utc_timestamp() << '\n';
  write_file(dir / "provenance.txt", prov.str());
}

BenchmarkResult read_results(const std::filesystem::path& dir, std::optional<double> alpha) {
  std::map<std::string, std::string> prov;
  {
    std::istringstream in(read_file(dir / "provenance.txt"));
    std::string line;
    while (std::getline(in, line)) {
      const auto eq = line.find('=');
      if (eq != std::string::npos) prov[line.substr(0, eq)] = line.substr(eq + 1);
    }
  }
  const auto get = [&](const std::string& key) {
    const auto it = prov.find(key);
    if (it == prov.end()) throw ConfigError("provenance.txt lacks '" + key + "'");
    return it->second;
  };
  if (get("schema_version") != std::to_string(kResultsSchemaVersion)) {
    throw ConfigError("results schema version " + get("schema_version") +
                      " is not supported (expected " + std::to_string(kResultsSchemaVersion) +
                      ")");
  }

  BenchmarkResult result;
  auto& cfg = result.config;
  cfg.methods.clear();
  for (const auto& id : split(get("methods"), ',')) cfg.methods.push_back(parse_method(id));
  cfg.metric = parse_metric(get("metric"));
  cfg.alpha = alpha.value_or(std::stod(get("alpha")));
  cfg.split.seed = std::stoull(get("seed"));
  cfg.split.n_folds = std::stoul(get("folds"));
  cfg.k_max = std::stoul(get("kmax"));
  cfg.out_dir = dir;

  std::map<std::string, std::size_t> position;
  for (const auto& name : split(get("datasets"), ',')) {
    DatasetResult d;
    d.name = name;
    const std::string status = get("status." + name);
    if (status != "ok") d.error = status.rfind("failed: ", 0) == 0 ? status.substr(8) : status;
    if (const auto it = prov.find("tuned_k." + name); it != prov.end()) {
      for (const auto& k : split(it->second, ',')) d.tuned_k.push_back(std::stoul(k));
    }
    position[name] = result.datasets.size();
    result.datasets.push_back(std::move(d));
    DatasetSpec spec;
    spec.name = name;
    cfg.datasets.push_back(spec);
  }

  std::istringstream in(read_file(dir / "results.csv"));
  std::string line;
  std::getline(in, line);
  if (line != "dataset,method,fold,accuracy,f1") throw ConfigError("results.csv has an unexpected header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 5) throw ConfigError("results.csv: malformed row '" + line + "'");
    const auto it = position.find(cells[0]);
    if (it == position.end()) throw ConfigError("results.csv: unknown dataset '" + cells[0] + "'");
    auto& folds = result.datasets[it->second].reports[parse_method(cells[1])].folds;
    if (std::stoul(cells[2]) != folds.size()) throw ConfigError("results.csv: folds out of order");
    folds.push_back({std::stod(cells[3]), std::stod(cells[4])});
  }
  compute_statistics(result);
  return result;
}

// ---------------------------------------------------------------------------
// Report

std::string render_report(const BenchmarkResult& result, ReportFormat format) {
  const auto& cfg = result.config;
  std::ostringstream out;
  if (format == ReportFormat::csv) {
    out << "dataset,method,accuracy_mean,accuracy_std,f1_mean,f1_std,best_f1,p_vs_best,"
           "similar_to_best\n";
  } else {
    out << "PL-kNN benchmark summary (" << cfg.split.n_folds << " folds, seed " << cfg.split.seed
        << ", Wilcoxon on per-fold " << metric_id(cfg.metric) << ", alpha " << cfg.alpha
        << ")\n"
        << "'*' best mean F1-score; '~' not significantly different from it (p >= alpha)\n\n"
        << pad("Dataset", 10) << pad("Method", 9) << pad("Accuracy", 20) << pad("F1-Score", 22)
        << "p vs best\n";
  }

  const bool csv = format == ReportFormat::csv;
  for (const auto& d : result.datasets) {
    if (d.failed()) continue;
    Method best = cfg.methods.front();
    for (const Method m : cfg.methods) {
      if (d.reports.at(m).f1().mean > d.reports.at(best).f1().mean) best = m;
    }
    bool first_row = true;
    for (const Method m : cfg.methods) {
      const auto& rep = d.reports.at(m);
      std::string p_text = "-";
      bool similar = false;
      if (m != best) {
        const auto t = wilcoxon_signed_rank(metric_values(rep, cfg.metric),
                                            metric_values(d.reports.at(best), cfg.metric),
                                            cfg.alpha);
        p_text = csv ? num17(t.p_value) : fixed4(t.p_value);
        similar = !t.reject_at_alpha;
      }
      if (format == ReportFormat::csv) {
        out << d.name << ',' << method_id(m) << ',' << num17(rep.accuracy().mean) << ','
            << num17(rep.accuracy().std) << ',' << num17(rep.f1().mean) << ','
            << num17(rep.f1().std) << ',' << (m == best ? 1 : 0) << ','
            << (m == best ? std::string() : p_text) << ',' << (similar ? 1 : 0) << '\n';
        continue;
      }
      const std::string marker = m == best ? " *" : similar ? " ~" : "";
      out << pad(first_row ? d.name : "", 10) << pad(std::string(method_label(m)), 9)
          << pad(fixed4(rep.accuracy().mean) + " +/- " + fixed4(rep.accuracy().std), 20)
          << pad(fixed4(rep.f1().mean) + " +/- " + fixed4(rep.f1().std) + marker, 22) << p_text
          << '\n';
      first_row = false;
    }
  }
  if (format == ReportFormat::csv) return out.str();

  if (!result.mean_ranks.empty()) {
    out << "\nFriedman mean ranks on " << metric_id(cfg.metric) << " over "
        << result.ranked_datasets << " datasets (lower is better):\n";
    for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
      out << "  " << pad(std::string(method_label(cfg.methods[i])), 8) << ' '
          << fixed4(result.mean_ranks[i]) << '\n';
    }
    if (result.critical_difference > 0.0) {
      out << "Nemenyi critical difference (alpha " << result.cd_alpha
          << "): " << fixed4(result.critical_difference) << '\n';
    }
    out << "CD diagram: nemenyi.svg\n";
  } else if (cfg.methods.size() < 2) {
    out << "\nNo statistical comparison: a single method was evaluated.\n";
  } else {
    out << "\nNo statistical comparison: no dataset completed.\n";
  }

  for (const auto& d : result.datasets) {
    if (d.tuned_k.empty()) continue;
    const auto [lo, hi] = std::minmax_element(d.tuned_k.begin(), d.tuned_k.end());
    out << "k-NN tuned k on " << d.name << ": " << *lo << ".." << *hi << '\n';
  }
  bool header = false;
  for (const auto& d : result.datasets) {
    if (!d.failed()) continue;
    if (!header) out << "\nFailed datasets:\n";
    header = true;
    out << "  " << d.name << ": " << d.error << '\n';
  }
  return out.str();
}

}  // namespace plknn
