#include "brforest/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "brforest/csv.hpp"
#include "brforest/rng.hpp"

namespace brf {

const char* to_string(FeatureKind k) {
  return k == FeatureKind::Continuous ? "continuous" : "binary";
}
const char* to_string(SplitQuality q) { return q == SplitQuality::Gini ? "gini" : "entropy"; }
const char* to_string(FeatureSubset f) {
  switch (f) {
    case FeatureSubset::Sqrt: return "sqrt";
    case FeatureSubset::Log2: return "log2";
    default: return "all";
  }
}

std::vector<int> Dataset::class_counts() const {
  std::vector<int> counts(static_cast<std::size_t>(n_classes), 0);
  for (int y : labels) counts.at(static_cast<std::size_t>(y))++;
  return counts;
}

void Dataset::validate() const {
  const auto n = n_rows();
  const auto d = n_features();
  if (n < 2 || d < 1 || n_classes < 2)
    throw DataError("dataset '" + name + "': needs N >= 2, D >= 1, C >= 2");
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw DataError("dataset '" + name + "': label count mismatch");
  if (static_cast<Eigen::Index>(feature_kinds.size()) != d)
    throw DataError("dataset '" + name + "': feature_kinds length mismatch");
  for (int y : labels)
    if (y < 0 || y >= n_classes)
      throw DataError("dataset '" + name + "': label id out of range");
  for (int c : class_counts())
    if (c < 2) throw DataError("dataset '" + name + "': class with fewer than 2 members");
  for (Eigen::Index j = 0; j < d; ++j) {
    const double lo = features.col(j).minCoeff();
    const double hi = features.col(j).maxCoeff();
    if (!(lo < hi)) throw DataError("dataset '" + name + "': constant column " + std::to_string(j));
  }
  std::unordered_set<std::string> seen;
  seen.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::string key(reinterpret_cast<const char*>(features.row(i).eval().data()),
                    sizeof(double) * static_cast<std::size_t>(d));
    key.append(reinterpret_cast<const char*>(&labels[static_cast<std::size_t>(i)]), sizeof(int));
    if (!seen.insert(std::move(key)).second)
      throw DataError("dataset '" + name + "': duplicate row " + std::to_string(i));
  }
}

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool is_missing_marker(const std::string& cell, const CsvOptions& opt) {
  const std::string low = lower(cell);
  for (const auto& m : opt.missing_markers)
    if (low == lower(m)) return true;
  return false;
}

std::optional<double> parse_finite(const std::string& s) {
  const char* b = s.data();
  const char* e = b + s.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  while (e > b && (e[-1] == ' ' || e[-1] == '\t')) --e;
  if (b == e) return std::nullopt;
  double v = 0.0;
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string file_stem(const std::string& path) {
  auto slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  auto dot = base.find_last_of('.');
  return dot == std::string::npos ? base : base.substr(0, dot);
}

}  // namespace

RawTable load_csv(const std::string& path, const std::string& target,
                  const std::set<std::string>& categorical_hints, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path + "': empty file");
  const auto header = split_csv_line(line, options.delimiter);
  const std::size_t width = header.size();

  RawTable table;
  table.name = file_stem(path);
  table.columns.resize(width);
  for (std::size_t j = 0; j < width; ++j) table.columns[j].name = header[j];

  std::size_t target_idx = width;
  for (std::size_t j = 0; j < width; ++j)
    if (header[j] == target) target_idx = j;
  if (target_idx == width)
    throw DataError("'" + path + "': target column '" + target + "' not found");
  table.target_column = target_idx;

  std::size_t row_number = 0;  // 1-based over data rows
  while (std::getline(in, line)) {
    ++row_number;
    if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;  // trailing newline
    auto fields = split_csv_line(line, options.delimiter);
    if (fields.size() != width)
      throw DataError("'" + path + "': ragged row " + std::to_string(row_number) +
                      ": expected " + std::to_string(width) + " fields, got " +
                      std::to_string(fields.size()));
    if (is_missing_marker(fields[target_idx], options)) continue;  // reject at load
    for (std::size_t j = 0; j < width; ++j) {
      const bool miss = is_missing_marker(fields[j], options);
      table.columns[j].cells.push_back(std::move(fields[j]));
      table.columns[j].missing.push_back(miss ? 1 : 0);
    }
  }
  if (table.n_rows() == 0) throw DataError("'" + path + "': no usable data rows");

  for (std::size_t j = 0; j < width; ++j) {
    RawColumn& col = table.columns[j];
    if (j == target_idx) {
      col.categorical = true;
      continue;
    }
    if (categorical_hints.count(col.name)) {
      col.categorical = true;
      continue;
    }
    bool numeric = true;
    for (std::size_t i = 0; i < col.cells.size() && numeric; ++i)
      if (!col.missing[i] && !parse_finite(col.cells[i])) numeric = false;
    col.categorical = !numeric;
  }
  return table;
}

Dataset preprocess(const RawTable& raw) {
  const std::size_t n_in = raw.n_rows();
  const std::size_t width = raw.columns.size();
  if (width == 0 || n_in == 0) throw DataError("preprocess: empty table");
  if (raw.target_column >= width) throw DataError("preprocess: bad target index");
  for (const auto& col : raw.columns)
    if (col.cells.size() != n_in || col.missing.size() != n_in)
      throw DataError("preprocess: column length mismatch");
  const RawColumn& target = raw.columns[raw.target_column];
  for (std::size_t i = 0; i < n_in; ++i)
    if (target.missing[i]) throw DataError("preprocess: missing target in row " + std::to_string(i));

  // 1. drop exact duplicate rows (raw cells incl. label; missing cells compare equal)
  std::vector<std::size_t> rows;
  {
    std::unordered_set<std::string> seen;
    seen.reserve(n_in);
    for (std::size_t i = 0; i < n_in; ++i) {
      std::string key;
      for (std::size_t j = 0; j < width; ++j) {
        key += raw.columns[j].missing[i] ? std::string(1, '\x01') : raw.columns[j].cells[i];
        key += '\x1f';
      }
      if (seen.insert(std::move(key)).second) rows.push_back(i);
    }
  }

  // 2. drop rows whose class occurs exactly once
  {
    std::unordered_map<std::string, int> counts;
    for (std::size_t i : rows) counts[target.cells[i]]++;
    std::vector<std::size_t> kept;
    for (std::size_t i : rows)
      if (counts[target.cells[i]] > 1) kept.push_back(i);
    rows = std::move(kept);
  }

  // 3. drop columns with a single distinct non-missing value
  std::vector<std::size_t> feature_cols;
  for (std::size_t j = 0; j < width; ++j) {
    if (j == raw.target_column) continue;
    const RawColumn& col = raw.columns[j];
    std::unordered_set<std::string> distinct;
    for (std::size_t i : rows) {
      if (col.missing[i]) continue;
      if (col.categorical) {
        distinct.insert(col.cells[i]);
      } else {
        distinct.insert(format_double(*parse_finite(col.cells[i])));
      }
      if (distinct.size() > 1) break;
    }
    if (distinct.size() > 1) feature_cols.push_back(j);
  }

  // labels by sorted original representation
  std::vector<std::string> class_names;
  for (std::size_t i : rows) class_names.push_back(target.cells[i]);
  std::sort(class_names.begin(), class_names.end());
  class_names.erase(std::unique(class_names.begin(), class_names.end()), class_names.end());

  const std::size_t n = rows.size();
  if (n < 2 || class_names.size() < 2 || feature_cols.empty())
    throw DataError("dataset degenerate after preprocessing");

  std::vector<int> labels(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto it = std::lower_bound(class_names.begin(), class_names.end(), target.cells[rows[r]]);
    labels[r] = static_cast<int>(it - class_names.begin());
  }

  // 4-6. impute and encode
  std::vector<std::vector<double>> out_cols;
  std::vector<std::string> out_names;
  std::vector<FeatureKind> out_kinds;
  for (std::size_t j : feature_cols) {
    const RawColumn& col = raw.columns[j];
    if (!col.categorical) {
      double sum = 0.0;
      std::size_t cnt = 0;
      for (std::size_t i : rows)
        if (!col.missing[i]) {
          sum += *parse_finite(col.cells[i]);
          ++cnt;
        }
      const double mean = cnt ? sum / static_cast<double>(cnt) : 0.0;
      std::vector<double> v(n);
      for (std::size_t r = 0; r < n; ++r) {
        const std::size_t i = rows[r];
        v[r] = col.missing[i] ? mean : *parse_finite(col.cells[i]);
      }
      out_cols.push_back(std::move(v));
      out_names.push_back(col.name);
      out_kinds.push_back(FeatureKind::Continuous);
    } else {
      std::vector<std::string> cats;
      for (std::size_t i : rows) cats.push_back(col.missing[i] ? "__missing__" : col.cells[i]);
      std::vector<std::string> levels = cats;
      std::sort(levels.begin(), levels.end());
      levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
      for (const auto& level : levels) {
        std::vector<double> v(n);
        for (std::size_t r = 0; r < n; ++r) v[r] = cats[r] == level ? 1.0 : 0.0;
        out_cols.push_back(std::move(v));
        out_names.push_back(col.name + "=" + level);
        out_kinds.push_back(FeatureKind::Binary);
      }
    }
  }

  // 7. z-score with population std
  Dataset ds;
  ds.name = raw.name;
  ds.n_classes = static_cast<int>(class_names.size());
  ds.labels = std::move(labels);
  ds.feature_names = std::move(out_names);
  ds.feature_kinds = std::move(out_kinds);
  ds.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(out_cols.size()));
  for (std::size_t j = 0; j < out_cols.size(); ++j) {
    Eigen::Map<Eigen::VectorXd> v(out_cols[j].data(), static_cast<Eigen::Index>(n));
    const double mean = v.mean();
    const double sd = std::sqrt((v.array() - mean).square().mean());
    ds.features.col(static_cast<Eigen::Index>(j)) = (v.array() - mean) / sd;
  }
  ds.validate();
  return ds;
}

FoldAssignment stratified_two_fold(const Dataset& ds, int repeat_index, std::uint64_t seed) {
  const auto counts = ds.class_counts();
  for (int c : counts)
    if (c < 2) throw DataError("stratified_two_fold: class with fewer than 2 members");

  FoldAssignment fa;
  fa.repeat_index = repeat_index;
  fa.fold_id.assign(static_cast<std::size_t>(ds.n_rows()), 0);

  std::vector<std::vector<int>> members(static_cast<std::size_t>(ds.n_classes));
  for (std::size_t i = 0; i < ds.labels.size(); ++i)
    members[static_cast<std::size_t>(ds.labels[i])].push_back(static_cast<int>(i));

  for (std::size_t c = 0; c < members.size(); ++c) {
    Rng rng(chain_seed(seed, {kTagFold, static_cast<std::uint64_t>(repeat_index), c}));
    auto& idx = members[c];
    rng.shuffle(idx);
    int fold = static_cast<int>(rng.below(2));
    for (int i : idx) {
      fa.fold_id[static_cast<std::size_t>(i)] = fold;
      fold = 1 - fold;
    }
  }
  return fa;
}

Dataset neighborhood_scale(const Dataset& ds) {
  Dataset out = ds;
  for (Eigen::Index j = 0; j < ds.n_features(); ++j) {
    auto col = out.features.col(j);
    if (ds.feature_kinds[static_cast<std::size_t>(j)] == FeatureKind::Continuous) {
      const double mean = col.mean();
      const double sd = std::sqrt((col.array() - mean).square().mean());
      if (!(sd > 0.0))
        throw DataError("neighborhood_scale: constant continuous column " + std::to_string(j));
      col = (col.array() - mean) / sd;
    } else {
      const double lo = col.minCoeff();
      const double hi = col.maxCoeff();
      if (!(lo < hi))
        throw DataError("neighborhood_scale: binary column " + std::to_string(j) +
                        " has a single value");
      for (Eigen::Index i = 0; i < col.size(); ++i) {
        const double v = col(i);
        if (v != lo && v != hi)
          throw DataError("neighborhood_scale: binary column " + std::to_string(j) +
                          " has more than two values");
        col(i) = v == lo ? -1.0 : 1.0;
      }
    }
  }
  return out;
}

void save_dataset(const Dataset& ds, const std::string& manifest_path,
                  const std::string& csv_path) {
  nlohmann::json j;
  j["name"] = ds.name;
  j["n"] = ds.n_rows();
  j["d"] = ds.n_features();
  j["c"] = ds.n_classes;
  std::vector<std::string> kinds;
  for (auto k : ds.feature_kinds) kinds.emplace_back(to_string(k));
  j["feature_kinds"] = kinds;
  j["feature_names"] = ds.feature_names;
  j["matrix_csv"] = csv_path;

  std::ofstream mf(manifest_path);
  if (!mf) throw DataError("cannot write '" + manifest_path + "'");
  mf << j.dump(2) << "\n";

  std::ofstream cf(csv_path);
  if (!cf) throw DataError("cannot write '" + csv_path + "'");
  {
    std::vector<std::string> header = ds.feature_names;
    header.push_back("label");
    cf << join_csv_line(header) << "\n";
  }
  for (Eigen::Index i = 0; i < ds.n_rows(); ++i) {
    std::vector<std::string> fields;
    fields.reserve(static_cast<std::size_t>(ds.n_features()) + 1);
    for (Eigen::Index j2 = 0; j2 < ds.n_features(); ++j2)
      fields.push_back(format_double(ds.features(i, j2)));
    fields.push_back(std::to_string(ds.labels[static_cast<std::size_t>(i)]));
    cf << join_csv_line(fields) << "\n";
  }
}

Dataset load_dataset(const std::string& manifest_path, const std::string& csv_path) {
  std::ifstream mf(manifest_path);
  if (!mf) throw DataError("cannot open '" + manifest_path + "'");
  nlohmann::json j;
  try {
    mf >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("'" + manifest_path + "': " + e.what());
  }

  Dataset ds;
  ds.name = j.at("name").get<std::string>();
  ds.n_classes = j.at("c").get<int>();
  for (const auto& k : j.at("feature_kinds"))
    ds.feature_kinds.push_back(k.get<std::string>() == "binary" ? FeatureKind::Binary
                                                                : FeatureKind::Continuous);
  if (j.contains("feature_names"))
    ds.feature_names = j.at("feature_names").get<std::vector<std::string>>();

  std::ifstream cf(csv_path);
  if (!cf) throw DataError("cannot open '" + csv_path + "'");
  std::string line;
  if (!std::getline(cf, line)) throw DataError("'" + csv_path + "': empty file");
  const std::size_t width = split_csv_line(line).size();
  if (width != ds.feature_kinds.size() + 1)
    throw DataError("'" + csv_path + "': column count does not match manifest");

  std::vector<std::vector<double>> rows;
  while (std::getline(cf, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != width) throw DataError("'" + csv_path + "': ragged row");
    std::vector<double> r(width);
    for (std::size_t k = 0; k < width; ++k) r[k] = parse_double(fields[k]);
    rows.push_back(std::move(r));
  }

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(width - 1);
  ds.features.resize(n, d);
  ds.labels.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j2 = 0; j2 < d; ++j2) ds.features(i, j2) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j2)];
    ds.labels[static_cast<std::size_t>(i)] = static_cast<int>(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)]);
  }
  if (ds.feature_names.empty())
    for (Eigen::Index j2 = 0; j2 < d; ++j2) ds.feature_names.push_back("f" + std::to_string(j2));
  return ds;
}

std::string matrix_path_for(const std::string& manifest_path) {
  const std::string suffix = ".manifest.json";
  if (manifest_path.size() > suffix.size() &&
      manifest_path.compare(manifest_path.size() - suffix.size(), suffix.size(), suffix) == 0)
    return manifest_path.substr(0, manifest_path.size() - suffix.size()) + ".csv";
  return manifest_path + ".csv";
}

}  // namespace brf
