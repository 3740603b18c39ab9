#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "brforest/dataset.hpp"

namespace brf {

// A loaded but unencoded table. Cells are kept verbatim; missing cells are
// flagged instead of erased so preprocess() can apply the imputation rules.
struct RawColumn {
  std::string name;
  bool categorical = false;
  std::vector<std::string> cells;
  std::vector<std::uint8_t> missing;
};

struct RawTable {
  std::string name;
  std::vector<RawColumn> columns;
  std::size_t target_column = 0;

  std::size_t n_rows() const { return columns.empty() ? 0 : columns[0].cells.size(); }
};

struct CsvOptions {
  char delimiter = ',';
  // Case-insensitive; the empty string matches empty cells.
  std::vector<std::string> missing_markers = {"", "?", "NA"};
};

// Reads a headered CSV. A column is numerical when every non-missing cell
// parses as a finite number and the column is not hinted categorical.
// Rows with a missing target are rejected here. Ragged rows are an error.
RawTable load_csv(const std::string& path, const std::string& target,
                  const std::set<std::string>& categorical_hints = {},
                  const CsvOptions& options = {});

// The full encoding pipeline, applied in this order: drop duplicate rows,
// drop rows of classes occurring once, drop columns with a single distinct
// value, impute categorical missing as "__missing__", impute numerical
// missing with the column mean, one-hot encode categoricals, then z-score
// every column with the population standard deviation. Labels become
// 0..C-1 by sorted original representation.
Dataset preprocess(const RawTable& raw);

struct FoldAssignment {
  std::vector<int> fold_id;  // 0 or 1 per observation
  int repeat_index = 0;
};

// Stratified 2-fold split: each class is shuffled by a stream derived from
// (seed, repeat_index, class) and dealt alternately to the folds, so the
// per-class fold sizes differ by at most one.
FoldAssignment stratified_two_fold(const Dataset& ds, int repeat_index, std::uint64_t seed);

// Re-scales an encoded dataset for neighborhood analysis: continuous
// columns are z-scored (idempotent) and binary columns mapped onto -1/+1,
// lower original value to -1.
Dataset neighborhood_scale(const Dataset& ds);

// Dataset manifest (JSON: name, n, d, c, kinds, feature names) plus a plain
// numeric CSV of the encoded matrix with the label id as last column.
void save_dataset(const Dataset& ds, const std::string& manifest_path,
                  const std::string& csv_path);
Dataset load_dataset(const std::string& manifest_path, const std::string& csv_path);

// Derives the matrix CSV path from a manifest path by convention
// ("x.manifest.json" -> "x.csv").
std::string matrix_path_for(const std::string& manifest_path);

}  // namespace brf
