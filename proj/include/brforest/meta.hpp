#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "brforest/dataset.hpp"
#include "brforest/experiment.hpp"

namespace brf {

inline constexpr int kMaxNeighbors = 10;
inline constexpr int kKLCount = 65;  // (k, l) for k in 1..10, l in 0..k

// Flat position of the (k, l) statistic; k-major, l ascending.
int kl_index(int k, int l);
std::string kl_name(int k, int l);  // "3_2"
std::vector<std::string> kl_names();

// Normalized neighborhood statistics of one dataset: values[kl_index(k, l)]
// is the share (x100) of observations with exactly l same-class neighbors
// among their k nearest by Manhattan distance. Every k-row sums to 100.
struct KLStats {
  std::string dataset;
  int n_classes = 0;
  Eigen::VectorXd values;  // length kKLCount
};

// Expects a dataset scaled by neighborhood_scale(); needs N >= 11. Distance
// ties break toward the lower row index.
KLStats kl_statistics(const Dataset& scaled);

// Each k_l multiplied by the dataset's class count; names get a "*C" suffix.
Eigen::VectorXd class_scaled_features(const KLStats& kl);

struct NamedFeatures {
  std::vector<std::string> names;
  Eigen::VectorXd values;
};

// Pairwise interactions over the base vector: f/g, g/f, f-g, g-f, f*g, f+g
// per unordered pair plus f*f and f+f per feature (12,610 outputs from 65
// inputs). Division by zero flags the value as missing (NaN).
NamedFeatures interaction_features(const std::vector<std::string>& names,
                                   const Eigen::VectorXd& base);

// Rows = datasets, columns = named meta-features; NaN marks missing.
struct MetaFeatureMatrix {
  std::vector<std::string> dataset_names;
  std::vector<std::string> feature_names;
  Eigen::MatrixXd values;
};

enum class MetaPool { Base, BaseInteractions, BaseScaled, All };

MetaFeatureMatrix build_meta_matrix(const std::vector<KLStats>& stats, MetaPool pool);

// Spearman of every feature against every target column, pairwise-complete
// over non-missing cells. Undefined (constant) combinations come back NaN.
struct CorrelationTable {
  std::vector<std::string> feature_names;
  std::vector<std::string> target_names;
  Eigen::MatrixXd rho;
};

CorrelationTable correlation_table(const MetaFeatureMatrix& matrix,
                                   const std::vector<std::string>& target_names,
                                   const Eigen::MatrixXd& targets);

enum class Regime { LE1, GT1 };

struct RegimeLabel {
  std::string dataset;
  Regime value = Regime::LE1;
};

// GT1 iff the winner's best BR exceeds 1. With a p threshold, datasets whose
// max p-value exceeds it are dropped (undisputed labels only).
std::vector<RegimeLabel> regime_labels(const std::vector<WinnerReport>& reports,
                                       std::optional<double> p_threshold = std::nullopt);

// Leave-two-out over the regimes: one held-out dataset per class, all cross
// pairs, |LE1| * |GT1| splits.
struct LtoSplit {
  std::vector<int> train;
  int held_out_le1 = -1;
  int held_out_gt1 = -1;
};

std::vector<LtoSplit> leave_two_out_splits(const std::vector<RegimeLabel>& labels);

struct MetaCell {
  std::string config;
  double br = 0.0;
  int top_k = 0;
  double accuracy = 0.0;
};

struct MetaExperimentReport {
  std::vector<MetaCell> cells;  // config-major, then br, then k
  MetaCell best;
};

// For every split: rank features by |Spearman| against the regime label on
// the training rows only, keep the top k, fit the forest, score the two
// held-out datasets. Accuracy is averaged per split then over splits.
MetaExperimentReport meta_evaluate(const MetaFeatureMatrix& matrix,
                                   const std::vector<RegimeLabel>& labels,
                                   const std::vector<ForestConfig>& configs,
                                   const std::vector<double>& br_values, int max_k,
                                   std::uint64_t seed, int threads = 1);

}  // namespace brf
