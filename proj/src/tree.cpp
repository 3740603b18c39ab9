#include "brforest/tree.hpp"

#include <algorithm>
#include <cmath>

namespace brf {

int DecisionTree::depth() const {
  // nodes are stored preorder, so a simple walk suffices
  std::vector<std::pair<int, int>> stack{{0, 0}};
  int best = 0;
  while (!stack.empty()) {
    auto [idx, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    const TreeNode& n = nodes[static_cast<std::size_t>(idx)];
    if (!n.is_leaf()) {
      stack.push_back({n.left, d + 1});
      stack.push_back({n.right, d + 1});
    }
  }
  return best;
}

int DecisionTree::leaf_count() const {
  int c = 0;
  for (const auto& n : nodes) c += n.is_leaf() ? 1 : 0;
  return c;
}

double impurity(std::span<const std::int64_t> class_counts, SplitQuality quality) {
  std::int64_t total = 0;
  for (std::int64_t c : class_counts) {
    if (c < 0) throw DataError("impurity: negative class count");
    total += c;
  }
  if (total <= 0) throw DataError("impurity: all-zero class counts");
  const double w = static_cast<double>(total);
  if (quality == SplitQuality::Gini) {
    double sumsq = 0.0;
    for (std::int64_t c : class_counts) sumsq += static_cast<double>(c) * static_cast<double>(c);
    return 1.0 - sumsq / (w * w);
  }
  double h = 0.0;
  for (std::int64_t c : class_counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / w;
    h -= p * std::log2(p);
  }
  return h;
}

namespace {

struct SplitItem {
  double value;
  std::int32_t label;
  std::int64_t weight;
};

// Reused across all nodes of one tree.
struct Workspace {
  std::vector<SplitItem> items;
  std::vector<std::int64_t> left_counts;
  std::vector<std::int64_t> right_counts;
  std::vector<std::int64_t> node_counts;
  std::vector<int> feature_perm;
  std::vector<int> candidates;
};

// Mean child impurity ((W_l*I_l + W_r*I_r) / W) scanned over all midpoints
// of one feature, with I evaluated through impurity() on the integer count
// vectors so that mathematically equal candidates compare bitwise equal.
// First strictly better candidate wins; scanning features in ascending order
// and thresholds in ascending order yields the (feature, threshold)
// tie-break.
void scan_feature(const Eigen::MatrixXd& features, std::span<const int> labels,
                  std::span<const WeightedRow> rows, int feature, SplitQuality quality,
                  std::int64_t min_leaf, std::span<const std::int64_t> node_counts,
                  std::int64_t node_weight, Workspace& ws, bool& found, double& best_score,
                  int& best_feature, double& best_threshold) {
  auto& items = ws.items;
  items.clear();
  const double* col = features.col(feature).data();
  for (const WeightedRow& r : rows)
    items.push_back({col[r.row], labels[static_cast<std::size_t>(r.row)], r.weight});
  std::sort(items.begin(), items.end(),
            [](const SplitItem& a, const SplitItem& b) { return a.value < b.value; });
  if (items.front().value == items.back().value) return;  // no distinct values

  const int n_classes = static_cast<int>(node_counts.size());
  auto& left = ws.left_counts;
  auto& right = ws.right_counts;
  std::fill(left.begin(), left.end(), 0);
  for (int c = 0; c < n_classes; ++c)
    right[static_cast<std::size_t>(c)] = node_counts[static_cast<std::size_t>(c)];

  std::int64_t wl = 0;
  const std::size_t n = items.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const SplitItem& it = items[i];
    const auto c = static_cast<std::size_t>(it.label);
    left[c] += it.weight;
    right[c] -= it.weight;
    wl += it.weight;
    if (items[i + 1].value <= it.value) continue;  // not a boundary
    const std::int64_t wr = node_weight - wl;
    if (wl < min_leaf || wr < min_leaf) continue;
    const double score = (static_cast<double>(wl) * impurity(left, quality) +
                          static_cast<double>(wr) * impurity(right, quality)) /
                         static_cast<double>(node_weight);
    if (!found || score < best_score) {
      double threshold = it.value + (items[i + 1].value - it.value) / 2.0;
      if (threshold >= items[i + 1].value) threshold = it.value;  // adjacent doubles
      found = true;
      best_score = score;
      best_feature = feature;
      best_threshold = threshold;
    }
  }
}

}  // namespace

std::optional<SplitDecision> best_split(const Eigen::MatrixXd& features,
                                        std::span<const int> labels,
                                        std::span<const WeightedRow> rows,
                                        std::span<const int> candidate_features, int n_classes,
                                        SplitQuality quality, std::int64_t min_samples_leaf) {
  if (rows.size() < 2) return std::nullopt;

  Workspace ws;
  ws.left_counts.assign(static_cast<std::size_t>(n_classes), 0);
  ws.right_counts.assign(static_cast<std::size_t>(n_classes), 0);
  ws.node_counts.assign(static_cast<std::size_t>(n_classes), 0);
  std::int64_t weight = 0;
  for (const WeightedRow& r : rows) {
    ws.node_counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(r.row)])] += r.weight;
    weight += r.weight;
  }

  std::vector<int> sorted(candidate_features.begin(), candidate_features.end());
  std::sort(sorted.begin(), sorted.end());

  bool found = false;
  double best_score = 0.0, best_threshold = 0.0;
  int best_feature = -1;
  for (int f : sorted)
    scan_feature(features, labels, rows, f, quality, min_samples_leaf, ws.node_counts, weight, ws,
                 found, best_score, best_feature, best_threshold);
  if (!found) return std::nullopt;
  return SplitDecision{best_feature, best_threshold, best_score};
}

DecisionTree fit_tree(const Dataset& ds, std::span<const int> sample_indices,
                      const TreeConfig& config, Rng& rng) {
  if (sample_indices.empty()) throw DataError("fit_tree: empty sample");
  const auto n_rows = ds.n_rows();
  const int d = static_cast<int>(ds.n_features());
  const int n_classes = ds.n_classes;

  int subset_size;
  switch (config.feature_subset) {
    case FeatureSubset::Sqrt:
      subset_size = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));
      break;
    case FeatureSubset::Log2:
      subset_size = std::max(1, static_cast<int>(std::floor(std::log2(static_cast<double>(d)))));
      break;
    default:
      subset_size = d;
  }

  // collapse the multiset to (row, multiplicity), ascending row order
  std::vector<std::int64_t> mult(static_cast<std::size_t>(n_rows), 0);
  for (int idx : sample_indices) {
    if (idx < 0 || idx >= n_rows) throw DataError("fit_tree: sample index out of range");
    mult[static_cast<std::size_t>(idx)]++;
  }
  std::vector<WeightedRow> rows;
  rows.reserve(sample_indices.size());
  for (Eigen::Index i = 0; i < n_rows; ++i)
    if (mult[static_cast<std::size_t>(i)] > 0)
      rows.push_back({static_cast<int>(i), mult[static_cast<std::size_t>(i)]});

  Workspace ws;
  ws.items.reserve(rows.size());
  ws.left_counts.assign(static_cast<std::size_t>(n_classes), 0);
  ws.right_counts.assign(static_cast<std::size_t>(n_classes), 0);
  ws.feature_perm.resize(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) ws.feature_perm[static_cast<std::size_t>(j)] = j;
  ws.candidates.resize(static_cast<std::size_t>(subset_size));

  DecisionTree tree;
  tree.n_classes = n_classes;
  tree.n_features = ds.n_features();
  tree.config = config;

  struct Task {
    std::size_t begin, end;
    int depth;
    int parent;     // node index whose child link to fill, -1 for root
    bool is_left;
    std::vector<std::int64_t> counts;
    std::int64_t weight;
  };

  std::vector<std::int64_t> root_counts(static_cast<std::size_t>(n_classes), 0);
  std::int64_t root_weight = 0;
  for (const WeightedRow& r : rows) {
    root_counts[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(r.row)])] += r.weight;
    root_weight += r.weight;
  }

  std::vector<Task> stack;
  stack.push_back({0, rows.size(), 0, -1, false, std::move(root_counts), root_weight});

  while (!stack.empty()) {
    Task task = std::move(stack.back());
    stack.pop_back();

    const int node_index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (task.parent >= 0) {
      auto& p = tree.nodes[static_cast<std::size_t>(task.parent)];
      (task.is_left ? p.left : p.right) = node_index;
    }

    int nonzero = 0;
    for (std::int64_t c : task.counts) nonzero += c > 0 ? 1 : 0;
    const bool pure = nonzero <= 1;
    const bool too_small = task.weight < config.min_samples_split;
    const bool at_depth = config.max_depth && task.depth >= *config.max_depth;

    std::optional<SplitDecision> split;
    if (!pure && !too_small && !at_depth) {
      // fresh feature subset, without replacement, scanned in ascending order
      for (int t = 0; t < subset_size; ++t) {
        const int j = t + static_cast<int>(rng.below(static_cast<std::uint64_t>(d - t)));
        std::swap(ws.feature_perm[static_cast<std::size_t>(t)],
                  ws.feature_perm[static_cast<std::size_t>(j)]);
        ws.candidates[static_cast<std::size_t>(t)] = ws.feature_perm[static_cast<std::size_t>(t)];
      }
      std::sort(ws.candidates.begin(), ws.candidates.end());

      bool found = false;
      double best_score = 0.0, best_threshold = 0.0;
      int best_feature = -1;
      const std::span<const WeightedRow> node_rows(rows.data() + task.begin,
                                                   task.end - task.begin);
      for (int f : ws.candidates)
        scan_feature(ds.features, ds.labels, node_rows, f, config.split_quality,
                     config.min_samples_leaf, task.counts, task.weight, ws, found, best_score,
                     best_feature, best_threshold);
      if (found) split = SplitDecision{best_feature, best_threshold, best_score};
    }

    if (!split) {
      tree.nodes[static_cast<std::size_t>(node_index)].class_counts = std::move(task.counts);
      continue;
    }

    const double* col = ds.features.col(split->feature).data();
    auto mid_it = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(task.begin),
                                 rows.begin() + static_cast<std::ptrdiff_t>(task.end),
                                 [&](const WeightedRow& r) { return col[r.row] <= split->threshold; });
    const auto mid = static_cast<std::size_t>(mid_it - rows.begin());

    std::vector<std::int64_t> left_counts(static_cast<std::size_t>(n_classes), 0);
    std::int64_t left_weight = 0;
    for (std::size_t i = task.begin; i < mid; ++i) {
      left_counts[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(rows[i].row)])] +=
          rows[i].weight;
      left_weight += rows[i].weight;
    }
    std::vector<std::int64_t> right_counts(static_cast<std::size_t>(n_classes), 0);
    for (int c = 0; c < n_classes; ++c)
      right_counts[static_cast<std::size_t>(c)] =
          task.counts[static_cast<std::size_t>(c)] - left_counts[static_cast<std::size_t>(c)];

    auto& node = tree.nodes[static_cast<std::size_t>(node_index)];
    node.feature = split->feature;
    node.threshold = split->threshold;

    // right pushed first so the left child is processed (and numbered) first
    stack.push_back({mid, task.end, task.depth + 1, node_index, false, std::move(right_counts),
                     task.weight - left_weight});
    stack.push_back({task.begin, mid, task.depth + 1, node_index, true, std::move(left_counts),
                     left_weight});
  }
  return tree;
}

Eigen::VectorXd predict_tree(const DecisionTree& tree, Eigen::Ref<const Eigen::RowVectorXd> x) {
  if (x.size() != tree.n_features)
    throw DataError("predict_tree: expected " + std::to_string(tree.n_features) + " features");
  for (Eigen::Index j = 0; j < x.size(); ++j)
    if (!std::isfinite(x(j))) throw DataError("predict_tree: non-finite input value");

  const TreeNode* node = &tree.nodes[0];
  while (!node->is_leaf())
    node = &tree.nodes[static_cast<std::size_t>(x(node->feature) <= node->threshold ? node->left
                                                                                    : node->right)];
  Eigen::VectorXd proba(tree.n_classes);
  std::int64_t total = 0;
  for (std::int64_t c : node->class_counts) total += c;
  for (int c = 0; c < tree.n_classes; ++c)
    proba(c) = static_cast<double>(node->class_counts[static_cast<std::size_t>(c)]) /
               static_cast<double>(total);
  return proba;
}

}  // namespace brf
