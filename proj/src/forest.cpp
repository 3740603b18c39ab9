#include "brforest/forest.hpp"

#include <cmath>

#include "brforest/parallel.hpp"

namespace brf {

std::vector<int> bootstrap_sample(Eigen::Index n_rows, double br, Rng& rng) {
  if (n_rows < 1) throw DataError("bootstrap_sample: empty training set");
  if (!(br > 0.0)) throw DataError("bootstrap_sample: bootstrap rate must be positive");
  const auto draws = std::llround(br * static_cast<double>(n_rows));
  if (draws <= 0) throw DataError("empty bootstrap");
  std::vector<int> idx(static_cast<std::size_t>(draws));
  for (auto& v : idx) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_rows)));
  return idx;
}

RandomForest fit_forest(const Dataset& ds, const ForestConfig& config, int threads) {
  if (config.n_trees < 1) throw DataError("fit_forest: n_trees must be >= 1");
  RandomForest rf;
  rf.n_classes = ds.n_classes;
  rf.n_features = ds.n_features();
  rf.config = config;
  rf.trees.resize(static_cast<std::size_t>(config.n_trees));

  parallel_for(config.n_trees, threads, [&](int i) {
    Rng rng(chain_seed(config.seed, {kTagTree, static_cast<std::uint64_t>(i)}));
    const auto sample = bootstrap_sample(ds.n_rows(), config.bootstrap_rate, rng);
    rf.trees[static_cast<std::size_t>(i)] = fit_tree(ds, sample, config.tree, rng);
  });
  return rf;
}

Prediction predict_forest(const RandomForest& rf, Eigen::Ref<const Eigen::RowVectorXd> x) {
  if (rf.trees.empty()) throw DataError("predict_forest: empty forest");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(rf.n_classes);
  for (const auto& t : rf.trees) acc += predict_tree(t, x);
  acc /= static_cast<double>(rf.trees.size());
  Prediction p;
  p.proba = std::move(acc);
  p.label = 0;
  for (int c = 1; c < rf.n_classes; ++c)
    if (p.proba(c) > p.proba(p.label)) p.label = c;
  return p;
}

Prediction predict_forest_hard(const RandomForest& rf, Eigen::Ref<const Eigen::RowVectorXd> x) {
  if (rf.trees.empty()) throw DataError("predict_forest: empty forest");
  Eigen::VectorXd votes = Eigen::VectorXd::Zero(rf.n_classes);
  for (const auto& t : rf.trees) {
    const Eigen::VectorXd proba = predict_tree(t, x);
    int best = 0;
    for (int c = 1; c < rf.n_classes; ++c)
      if (proba(c) > proba(best)) best = c;
    votes(best) += 1.0;
  }
  Prediction p;
  p.label = 0;
  for (int c = 1; c < rf.n_classes; ++c)
    if (votes(c) > votes(p.label)) p.label = c;
  p.proba = votes / static_cast<double>(rf.trees.size());
  return p;
}

std::vector<int> predict_labels(const RandomForest& rf, const Eigen::MatrixXd& x, int threads,
                                bool hard_vote) {
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  parallel_for(static_cast<int>(x.rows()), threads, [&](int i) {
    out[static_cast<std::size_t>(i)] =
        hard_vote ? predict_forest_hard(rf, x.row(i)).label : predict_forest(rf, x.row(i)).label;
  });
  return out;
}

std::vector<ForestConfig> named_configs() {
  std::vector<ForestConfig> out;
  auto add = [&](const std::string& name, auto&& mutate) {
    ForestConfig cfg;
    cfg.name = name;
    mutate(cfg);
    out.push_back(std::move(cfg));
  };
  add("RF(base)", [](ForestConfig&) {});
  add("RF(nt_200)", [](ForestConfig& c) { c.n_trees = 200; });
  add("RF(nt_500)", [](ForestConfig& c) { c.n_trees = 500; });
  add("RF(md_10)", [](ForestConfig& c) { c.tree.max_depth = 10; });
  add("RF(md_15)", [](ForestConfig& c) { c.tree.max_depth = 15; });
  add("RF(md_20)", [](ForestConfig& c) { c.tree.max_depth = 20; });
  add("RF(md_25)", [](ForestConfig& c) { c.tree.max_depth = 25; });
  add("RF(qs_ent)", [](ForestConfig& c) { c.tree.split_quality = SplitQuality::Entropy; });
  add("RF(mn_3)", [](ForestConfig& c) { c.tree.min_samples_split = 3; });
  add("RF(mn_4)", [](ForestConfig& c) { c.tree.min_samples_split = 4; });
  add("RF(mn_6)", [](ForestConfig& c) { c.tree.min_samples_split = 6; });
  add("RF(mn_8)", [](ForestConfig& c) { c.tree.min_samples_split = 8; });
  add("RF(ml_2)", [](ForestConfig& c) { c.tree.min_samples_leaf = 2; });
  add("RF(ml_3)", [](ForestConfig& c) { c.tree.min_samples_leaf = 3; });
  add("RF(ml_4)", [](ForestConfig& c) { c.tree.min_samples_leaf = 4; });
  add("RF(ml_5)", [](ForestConfig& c) { c.tree.min_samples_leaf = 5; });
  add("RF(nf_log)", [](ForestConfig& c) { c.tree.feature_subset = FeatureSubset::Log2; });
  add("RF(nf_all)", [](ForestConfig& c) { c.tree.feature_subset = FeatureSubset::All; });
  return out;
}

ForestConfig named_config(const std::string& name) {
  for (auto& cfg : named_configs())
    if (cfg.name == name) return cfg;
  throw DataError("unknown configuration '" + name + "'");
}

}  // namespace brf
