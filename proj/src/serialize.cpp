#include "brforest/serialize.hpp"

#include <fstream>

#include <json.hpp>

namespace brf {

namespace {

using nlohmann::json;

json node_to_json(const DecisionTree& tree, int idx) {
  const TreeNode& n = tree.nodes[static_cast<std::size_t>(idx)];
  if (n.is_leaf()) return json{{"counts", n.class_counts}};
  return json{{"feature", n.feature},
              {"threshold", n.threshold},
              {"left", node_to_json(tree, n.left)},
              {"right", node_to_json(tree, n.right)}};
}

int node_from_json(const json& j, DecisionTree& tree) {
  const int idx = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (j.contains("counts")) {
    tree.nodes[static_cast<std::size_t>(idx)].class_counts =
        j.at("counts").get<std::vector<std::int64_t>>();
    return idx;
  }
  const int feature = j.at("feature").get<int>();
  const double threshold = j.at("threshold").get<double>();
  const int left = node_from_json(j.at("left"), tree);
  const int right = node_from_json(j.at("right"), tree);
  auto& n = tree.nodes[static_cast<std::size_t>(idx)];
  n.feature = feature;
  n.threshold = threshold;
  n.left = left;
  n.right = right;
  return idx;
}

json config_to_json(const ForestConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["n_trees"] = cfg.n_trees;
  j["bootstrap_rate"] = cfg.bootstrap_rate;
  j["seed"] = cfg.seed;
  if (cfg.tree.max_depth) j["max_depth"] = *cfg.tree.max_depth;
  j["min_samples_split"] = cfg.tree.min_samples_split;
  j["min_samples_leaf"] = cfg.tree.min_samples_leaf;
  j["split_quality"] = to_string(cfg.tree.split_quality);
  j["feature_subset"] = to_string(cfg.tree.feature_subset);
  return j;
}

ForestConfig config_from_json(const json& j) {
  ForestConfig cfg;
  cfg.name = j.at("name").get<std::string>();
  cfg.n_trees = j.at("n_trees").get<int>();
  cfg.bootstrap_rate = j.at("bootstrap_rate").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("max_depth")) cfg.tree.max_depth = j.at("max_depth").get<int>();
  cfg.tree.min_samples_split = j.at("min_samples_split").get<int>();
  cfg.tree.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  cfg.tree.split_quality =
      j.at("split_quality").get<std::string>() == "entropy" ? SplitQuality::Entropy
                                                            : SplitQuality::Gini;
  const auto nf = j.at("feature_subset").get<std::string>();
  cfg.tree.feature_subset = nf == "sqrt"  ? FeatureSubset::Sqrt
                            : nf == "log2" ? FeatureSubset::Log2
                                           : FeatureSubset::All;
  return cfg;
}

}  // namespace

std::string forest_to_json(const RandomForest& rf) {
  json j;
  j["format_version"] = 1;
  j["config"] = config_to_json(rf.config);
  j["n_classes"] = rf.n_classes;
  j["n_features"] = rf.n_features;
  json trees = json::array();
  for (const auto& t : rf.trees) trees.push_back(node_to_json(t, 0));
  j["trees"] = std::move(trees);
  return j.dump();
}

RandomForest forest_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("model parse error: ") + e.what());
  }
  if (j.at("format_version").get<int>() != 1)
    throw DataError("unsupported model format version");

  RandomForest rf;
  rf.config = config_from_json(j.at("config"));
  rf.n_classes = j.at("n_classes").get<int>();
  rf.n_features = j.at("n_features").get<Eigen::Index>();
  for (const auto& tj : j.at("trees")) {
    DecisionTree t;
    t.n_classes = rf.n_classes;
    t.n_features = rf.n_features;
    t.config = rf.config.tree;
    node_from_json(tj, t);
    rf.trees.push_back(std::move(t));
  }
  if (rf.trees.empty()) throw DataError("model has no trees");
  return rf;
}

void save_forest(const RandomForest& rf, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << forest_to_json(rf) << "\n";
}

RandomForest load_forest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return forest_from_json(text);
}

}  // namespace brf
