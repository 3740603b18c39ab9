#include "brforest/meta.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "brforest/parallel.hpp"
#include "brforest/stats.hpp"

namespace brf {

int kl_index(int k, int l) {
  if (k < 1 || k > kMaxNeighbors || l < 0 || l > k) throw DataError("kl_index: bad (k, l)");
  return (k - 1) * (k + 2) / 2 + l;
}

std::string kl_name(int k, int l) { return std::to_string(k) + "_" + std::to_string(l); }

std::vector<std::string> kl_names() {
  std::vector<std::string> names;
  names.reserve(kKLCount);
  for (int k = 1; k <= kMaxNeighbors; ++k)
    for (int l = 0; l <= k; ++l) names.push_back(kl_name(k, l));
  return names;
}

KLStats kl_statistics(const Dataset& scaled) {
  const auto n = scaled.n_rows();
  if (n <= kMaxNeighbors)
    throw DataError("kl_statistics: need more than " + std::to_string(kMaxNeighbors) + " rows");

  // same-class count among the first k neighbors, per row
  std::vector<std::array<int, kMaxNeighbors>> same(static_cast<std::size_t>(n));
  parallel_for(static_cast<int>(n), default_threads(), [&](int i) {
    std::vector<std::pair<double, int>> dist;
    dist.reserve(static_cast<std::size_t>(n) - 1);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = (scaled.features.row(i) - scaled.features.row(j)).cwiseAbs().sum();
      dist.emplace_back(d, static_cast<int>(j));
    }
    std::partial_sort(dist.begin(), dist.begin() + kMaxNeighbors, dist.end());
    int count = 0;
    for (int k = 0; k < kMaxNeighbors; ++k) {
      if (scaled.labels[static_cast<std::size_t>(dist[static_cast<std::size_t>(k)].second)] ==
          scaled.labels[static_cast<std::size_t>(i)])
        ++count;
      same[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = count;
    }
  });

  Eigen::VectorXd raw = Eigen::VectorXd::Zero(kKLCount);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int k = 1; k <= kMaxNeighbors; ++k)
      raw(kl_index(k, same[static_cast<std::size_t>(i)][static_cast<std::size_t>(k - 1)])) += 1.0;

  KLStats out;
  out.dataset = scaled.name;
  out.n_classes = scaled.n_classes;
  out.values = raw * (100.0 / static_cast<double>(n));
  return out;
}

Eigen::VectorXd class_scaled_features(const KLStats& kl) {
  return kl.values * static_cast<double>(kl.n_classes);
}

NamedFeatures interaction_features(const std::vector<std::string>& names,
                                   const Eigen::VectorXd& base) {
  const auto n = static_cast<std::size_t>(base.size());
  if (names.size() != n) throw DataError("interaction_features: name/value length mismatch");

  NamedFeatures out;
  const std::size_t total = n * (n - 1) / 2 * 6 + n * 2;
  out.names.reserve(total);
  out.values.resize(static_cast<Eigen::Index>(total));
  Eigen::Index w = 0;
  auto push = [&](std::string name, double v) {
    out.names.push_back(std::move(name));
    out.values(w++) = v;
  };
  auto div = [](double a, double b) {
    return b == 0.0 ? std::numeric_limits<double>::quiet_NaN() : a / b;
  };

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double f = base(static_cast<Eigen::Index>(i));
      const double g = base(static_cast<Eigen::Index>(j));
      const std::string& a = names[i];
      const std::string& b = names[j];
      push(a + "/" + b, div(f, g));
      push(b + "/" + a, div(g, f));
      push(a + "-" + b, f - g);
      push(b + "-" + a, g - f);
      push(a + "*" + b, f * g);
      push(a + "+" + b, f + g);
    }
  for (std::size_t i = 0; i < n; ++i) {
    const double f = base(static_cast<Eigen::Index>(i));
    push(names[i] + "*" + names[i], f * f);
    push(names[i] + "+" + names[i], f + f);
  }
  return out;
}

MetaFeatureMatrix build_meta_matrix(const std::vector<KLStats>& stats, MetaPool pool) {
  if (stats.empty()) throw DataError("build_meta_matrix: no datasets");
  const auto base_names = kl_names();

  MetaFeatureMatrix m;
  std::vector<std::vector<double>> rows;
  for (const auto& kl : stats) {
    if (kl.values.size() != kKLCount) throw DataError("build_meta_matrix: bad k_l vector");
    m.dataset_names.push_back(kl.dataset);

    std::vector<std::string> names = base_names;
    std::vector<double> vals(kl.values.data(), kl.values.data() + kKLCount);
    if (pool == MetaPool::BaseScaled || pool == MetaPool::All) {
      const Eigen::VectorXd scaled = class_scaled_features(kl);
      for (int i = 0; i < kKLCount; ++i) {
        names.push_back(base_names[static_cast<std::size_t>(i)] + "*C");
        vals.push_back(scaled(i));
      }
    }
    if (pool == MetaPool::BaseInteractions || pool == MetaPool::All) {
      const auto inter = interaction_features(base_names, kl.values);
      names.insert(names.end(), inter.names.begin(), inter.names.end());
      vals.insert(vals.end(), inter.values.data(), inter.values.data() + inter.values.size());
    }
    if (m.feature_names.empty()) m.feature_names = std::move(names);
    rows.push_back(std::move(vals));
  }

  m.values.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(m.feature_names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

namespace {

// Spearman over pairwise-complete cases; NaN when undefined.
double spearman_or_nan(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::isfinite(x[i]) && std::isfinite(y[i])) {
      xs.push_back(x[i]);
      ys.push_back(y[i]);
    }
  if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  auto constant = [](const std::vector<double>& v) {
    for (double e : v)
      if (e != v[0]) return false;
    return true;
  };
  if (constant(xs) || constant(ys)) return std::numeric_limits<double>::quiet_NaN();
  return spearman_rho(xs, ys);
}

}  // namespace

CorrelationTable correlation_table(const MetaFeatureMatrix& matrix,
                                   const std::vector<std::string>& target_names,
                                   const Eigen::MatrixXd& targets) {
  if (matrix.values.rows() < 3) throw DataError("correlation_table: need at least 3 datasets");
  if (targets.rows() != matrix.values.rows())
    throw DataError("correlation_table: target row count mismatch");
  if (targets.cols() != static_cast<Eigen::Index>(target_names.size()))
    throw DataError("correlation_table: target name count mismatch");

  CorrelationTable table;
  table.feature_names = matrix.feature_names;
  table.target_names = target_names;
  table.rho.resize(matrix.values.cols(), targets.cols());
  const auto n = static_cast<std::size_t>(matrix.values.rows());
  for (Eigen::Index f = 0; f < matrix.values.cols(); ++f) {
    std::vector<double> feat(n);
    for (std::size_t i = 0; i < n; ++i) feat[i] = matrix.values(static_cast<Eigen::Index>(i), f);
    for (Eigen::Index t = 0; t < targets.cols(); ++t) {
      std::vector<double> tgt(n);
      for (std::size_t i = 0; i < n; ++i) tgt[i] = targets(static_cast<Eigen::Index>(i), t);
      table.rho(f, t) = spearman_or_nan(feat, tgt);
    }
  }
  return table;
}

std::vector<RegimeLabel> regime_labels(const std::vector<WinnerReport>& reports,
                                       std::optional<double> p_threshold) {
  if (reports.empty()) throw DataError("regime_labels: no reports");
  std::vector<RegimeLabel> out;
  for (const auto& r : reports) {
    if (p_threshold) {
      if (r.max_p_value < 0.0)
        throw DataError("regime_labels: p filtering requested but '" + r.dataset +
                        "' has no p-value");
      if (r.max_p_value > *p_threshold) continue;
    }
    out.push_back({r.dataset, r.best_br > 1.0 ? Regime::GT1 : Regime::LE1});
  }
  return out;
}

std::vector<LtoSplit> leave_two_out_splits(const std::vector<RegimeLabel>& labels) {
  std::vector<int> le1, gt1;
  for (std::size_t i = 0; i < labels.size(); ++i)
    (labels[i].value == Regime::LE1 ? le1 : gt1).push_back(static_cast<int>(i));
  if (le1.empty() || gt1.empty())
    throw DataError("leave_two_out_splits: both regimes must be present");

  std::vector<LtoSplit> splits;
  splits.reserve(le1.size() * gt1.size());
  for (int i : le1)
    for (int j : gt1) {
      LtoSplit s;
      s.held_out_le1 = i;
      s.held_out_gt1 = j;
      for (std::size_t t = 0; t < labels.size(); ++t)
        if (static_cast<int>(t) != i && static_cast<int>(t) != j)
          s.train.push_back(static_cast<int>(t));
      splits.push_back(std::move(s));
    }
  return splits;
}

MetaExperimentReport meta_evaluate(const MetaFeatureMatrix& matrix,
                                   const std::vector<RegimeLabel>& labels,
                                   const std::vector<ForestConfig>& configs,
                                   const std::vector<double>& br_values, int max_k,
                                   std::uint64_t seed, int threads) {
  if (labels.size() < 4) throw DataError("meta_evaluate: need at least 4 labeled datasets");
  if (configs.empty() || br_values.empty() || max_k < 1)
    throw DataError("meta_evaluate: empty meta grid");

  // align labels to matrix rows by dataset name
  std::vector<int> row_of(labels.size(), -1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto it = std::find(matrix.dataset_names.begin(), matrix.dataset_names.end(),
                              labels[i].dataset);
    if (it == matrix.dataset_names.end())
      throw DataError("meta_evaluate: dataset '" + labels[i].dataset +
                      "' missing from the feature matrix");
    row_of[i] = static_cast<int>(it - matrix.dataset_names.begin());
  }

  const auto splits = leave_two_out_splits(labels);
  const int n_configs = static_cast<int>(configs.size());
  const int n_brs = static_cast<int>(br_values.size());
  const std::size_t n_cells = static_cast<std::size_t>(n_configs) *
                              static_cast<std::size_t>(n_brs) * static_cast<std::size_t>(max_k);

  // per-split accuracy contributions, reduced sequentially afterwards
  std::vector<std::vector<double>> contrib(splits.size(),
                                           std::vector<double>(n_cells, 0.0));

  parallel_for(static_cast<int>(splits.size()), threads, [&](int si) {
    const LtoSplit& split = splits[static_cast<std::size_t>(si)];
    const std::size_t n_train = split.train.size();

    std::vector<double> target(n_train);
    for (std::size_t i = 0; i < n_train; ++i)
      target[i] =
          labels[static_cast<std::size_t>(split.train[i])].value == Regime::GT1 ? 1.0 : 0.0;

    // rank features on training rows only
    struct Ranked {
      double abs_rho;
      int feature;
    };
    std::vector<Ranked> ranked;
    std::vector<double> feat(n_train);
    for (Eigen::Index f = 0; f < matrix.values.cols(); ++f) {
      bool usable = true;
      for (std::size_t i = 0; i < n_train && usable; ++i) {
        feat[i] = matrix.values(row_of[static_cast<std::size_t>(split.train[i])], f);
        if (!std::isfinite(feat[i])) usable = false;
      }
      if (!usable) continue;
      bool constant = true;
      for (std::size_t i = 1; i < n_train; ++i)
        if (feat[i] != feat[0]) {
          constant = false;
          break;
        }
      if (constant) continue;
      ranked.push_back({std::fabs(spearman_rho(feat, target)), static_cast<int>(f)});
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
      if (a.abs_rho != b.abs_rho) return a.abs_rho > b.abs_rho;
      return a.feature < b.feature;
    });

    for (int k = 1; k <= max_k; ++k) {
      const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.size());
      if (kk == 0) continue;

      Dataset train_ds;
      train_ds.name = "meta";
      train_ds.n_classes = 2;
      train_ds.features.resize(static_cast<Eigen::Index>(n_train),
                               static_cast<Eigen::Index>(kk));
      train_ds.labels.resize(n_train);
      train_ds.feature_kinds.assign(kk, FeatureKind::Continuous);
      Eigen::VectorXd col_mean(static_cast<Eigen::Index>(kk));
      for (std::size_t j = 0; j < kk; ++j) {
        const int f = ranked[j].feature;
        for (std::size_t i = 0; i < n_train; ++i)
          train_ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              matrix.values(row_of[static_cast<std::size_t>(split.train[i])], f);
        col_mean(static_cast<Eigen::Index>(j)) =
            train_ds.features.col(static_cast<Eigen::Index>(j)).mean();
      }
      for (std::size_t i = 0; i < n_train; ++i)
        train_ds.labels[i] = static_cast<int>(target[i]);

      auto validation_row = [&](int label_idx) {
        Eigen::RowVectorXd x(static_cast<Eigen::Index>(kk));
        for (std::size_t j = 0; j < kk; ++j) {
          const double v = matrix.values(row_of[static_cast<std::size_t>(label_idx)],
                                         ranked[j].feature);
          x(static_cast<Eigen::Index>(j)) = std::isfinite(v) ? v : col_mean(static_cast<Eigen::Index>(j));
        }
        return x;
      };
      const Eigen::RowVectorXd x_le1 = validation_row(split.held_out_le1);
      const Eigen::RowVectorXd x_gt1 = validation_row(split.held_out_gt1);

      for (int c = 0; c < n_configs; ++c)
        for (int b = 0; b < n_brs; ++b) {
          ForestConfig cfg = configs[static_cast<std::size_t>(c)];
          cfg.bootstrap_rate = br_values[static_cast<std::size_t>(b)];
          cfg.seed = chain_seed(seed, {kTagMeta, static_cast<std::uint64_t>(si),
                                       static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(b),
                                       static_cast<std::uint64_t>(k)});
          const RandomForest rf = fit_forest(train_ds, cfg, 1);
          double correct = 0.0;
          if (predict_forest(rf, x_le1).label == 0) correct += 1.0;
          if (predict_forest(rf, x_gt1).label == 1) correct += 1.0;
          const std::size_t cell =
              (static_cast<std::size_t>(c) * static_cast<std::size_t>(n_brs) +
               static_cast<std::size_t>(b)) *
                  static_cast<std::size_t>(max_k) +
              static_cast<std::size_t>(k - 1);
          contrib[static_cast<std::size_t>(si)][cell] = correct / 2.0;
        }
    }
  });

  MetaExperimentReport report;
  report.cells.reserve(n_cells);
  for (int c = 0; c < n_configs; ++c)
    for (int b = 0; b < n_brs; ++b)
      for (int k = 1; k <= max_k; ++k) {
        const std::size_t cell = (static_cast<std::size_t>(c) * static_cast<std::size_t>(n_brs) +
                                  static_cast<std::size_t>(b)) *
                                     static_cast<std::size_t>(max_k) +
                                 static_cast<std::size_t>(k - 1);
        double sum = 0.0;
        for (const auto& row : contrib) sum += row[cell];
        report.cells.push_back({configs[static_cast<std::size_t>(c)].name,
                                br_values[static_cast<std::size_t>(b)], k,
                                sum / static_cast<double>(splits.size())});
      }
  report.best = report.cells.front();
  for (const auto& cell : report.cells)
    if (cell.accuracy > report.best.accuracy) report.best = cell;
  return report;
}

}  // namespace brf
