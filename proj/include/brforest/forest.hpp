#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "brforest/tree.hpp"

namespace brf {

struct ForestConfig {
  std::string name = "RF(base)";
  int n_trees = 100;                 // nt
  TreeConfig tree;
  double bootstrap_rate = 1.0;       // BR; any positive value
  std::uint64_t seed = 0;
};

struct RandomForest {
  std::vector<DecisionTree> trees;
  int n_classes = 0;
  Eigen::Index n_features = 0;
  ForestConfig config;
};

// round(br * n_rows) draws with replacement, half away from zero. Throws
// when the rounded size is zero.
std::vector<int> bootstrap_sample(Eigen::Index n_rows, double br, Rng& rng);

// Tree i trains on the stream derived from (config.seed, i), so the fit is
// identical no matter how many threads run it.
RandomForest fit_forest(const Dataset& ds, const ForestConfig& config, int threads = 1);

struct Prediction {
  int label = 0;
  Eigen::VectorXd proba;
};

// Soft voting: mean of tree probability vectors, argmax with ties going to
// the lowest class id.
Prediction predict_forest(const RandomForest& rf, Eigen::Ref<const Eigen::RowVectorXd> x);

// Hard majority voting over per-tree argmax labels (optional alternative).
Prediction predict_forest_hard(const RandomForest& rf, Eigen::Ref<const Eigen::RowVectorXd> x);

std::vector<int> predict_labels(const RandomForest& rf, const Eigen::MatrixXd& x,
                                int threads = 1, bool hard_vote = false);

// The 18 tuned configurations: RF(base) plus every single-parameter
// modification (nt 200/500; md 10/15/20/25; entropy; mn 3/4/6/8;
// ml 2/3/4/5; nf log2/all).
std::vector<ForestConfig> named_configs();

// Lookup by name tag, e.g. "RF(qs_ent)". Throws DataError when unknown.
ForestConfig named_config(const std::string& name);

}  // namespace brf
