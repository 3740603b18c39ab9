#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "brforest/dataset.hpp"
#include "brforest/rng.hpp"

namespace brf {

struct TreeConfig {
  std::optional<int> max_depth;                        // md; absent = unlimited
  int min_samples_split = 2;                           // mn
  int min_samples_leaf = 1;                            // ml
  SplitQuality split_quality = SplitQuality::Gini;     // qs
  FeatureSubset feature_subset = FeatureSubset::Sqrt;  // nf
};

// Flat node array; nodes[0] is the root. Leaves keep the weighted class
// counts seen during training, internal nodes route on x[feature] <= threshold.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<std::int64_t> class_counts;  // leaves only

  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;
  int n_classes = 0;
  Eigen::Index n_features = 0;
  TreeConfig config;

  int depth() const;
  int leaf_count() const;
};

// A training row with its bootstrap multiplicity. Multiplicity counts fully
// in impurities and in the mn/ml constraints.
struct WeightedRow {
  int row;
  std::int64_t weight;
};

// Candidate split chosen by exhaustive midpoint search over the given
// features. weighted_child_impurity is the size-weighted mean of the child
// impurities; ties are broken by lowest feature index then lowest threshold.
struct SplitDecision {
  int feature;
  double threshold;
  double weighted_child_impurity;
};

// Gini (1 - sum p^2) or Shannon entropy in bits (-sum p log2 p).
double impurity(std::span<const std::int64_t> class_counts, SplitQuality quality);

std::optional<SplitDecision> best_split(const Eigen::MatrixXd& features,
                                        std::span<const int> labels,
                                        std::span<const WeightedRow> rows,
                                        std::span<const int> candidate_features, int n_classes,
                                        SplitQuality quality, std::int64_t min_samples_leaf);

// CART growth over a bootstrap multiset of row indices. At every node a
// fresh feature subset is drawn from rng (size floor(sqrt(D)), floor(log2 D)
// or D, clamped to >= 1).
DecisionTree fit_tree(const Dataset& ds, std::span<const int> sample_indices,
                      const TreeConfig& config, Rng& rng);

// Leaf class frequencies for one observation; sums to 1.
Eigen::VectorXd predict_tree(const DecisionTree& tree, Eigen::Ref<const Eigen::RowVectorXd> x);

}  // namespace brf
