#include "brforest/synth.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "brforest/rng.hpp"

namespace brf {

namespace {

Dataset make_continuous(std::string name, Eigen::MatrixXd features, std::vector<int> labels,
                        int n_classes) {
  Dataset ds;
  ds.name = std::move(name);
  ds.n_classes = n_classes;
  ds.labels = std::move(labels);
  ds.feature_kinds.assign(static_cast<std::size_t>(features.cols()), FeatureKind::Continuous);
  for (Eigen::Index j = 0; j < features.cols(); ++j)
    ds.feature_names.push_back("f" + std::to_string(j));
  ds.features = std::move(features);
  return ds;
}

// Per-class sample counts, remainder spread over the leading classes.
std::vector<int> balanced_counts(int n, int groups) {
  std::vector<int> counts(static_cast<std::size_t>(groups), n / groups);
  for (int i = 0; i < n % groups; ++i) counts[static_cast<std::size_t>(i)]++;
  return counts;
}

}  // namespace

Dataset synth_classification(const SynthSpec& spec) {
  if (spec.n_features < 1) throw DataError("synth_classification: n_features must be >= 1");
  if (spec.n_classes < 2) throw DataError("synth_classification: n_classes must be >= 2");
  if (spec.n_clusters_per_class < 1)
    throw DataError("synth_classification: n_clusters_per_class must be >= 1");
  if (spec.class_sep < 0) throw DataError("synth_classification: class_sep must be positive");
  const int n_clusters = spec.n_classes * spec.n_clusters_per_class;
  if (spec.n_samples < n_clusters)
    throw DataError("synth_classification: n_samples smaller than cluster count");
  if (spec.n_features < 63 && (1LL << spec.n_features) < n_clusters)
    throw DataError("synth_classification: more clusters than hypercube vertices (2^n_features)");

  Rng rng(chain_seed(spec.seed, {kTagSynth}));

  // distinct vertex codes
  std::vector<std::uint64_t> codes;
  if (spec.n_features < 21) {
    const std::uint64_t total = 1ULL << spec.n_features;
    codes.resize(total);
    for (std::uint64_t v = 0; v < total; ++v) codes[v] = v;
    rng.shuffle(codes);
    codes.resize(static_cast<std::size_t>(n_clusters));
  } else {
    std::unordered_set<std::uint64_t> seen;
    while (codes.size() < static_cast<std::size_t>(n_clusters)) {
      std::uint64_t v = rng.next_u64();
      if (spec.n_features < 64) v &= (1ULL << spec.n_features) - 1;
      if (seen.insert(v).second) codes.push_back(v);
    }
  }

  const auto cluster_sizes = balanced_counts(spec.n_samples, n_clusters);
  Eigen::MatrixXd x(spec.n_samples, spec.n_features);
  std::vector<int> labels(static_cast<std::size_t>(spec.n_samples));
  Eigen::Index row = 0;
  for (int c = 0; c < n_clusters; ++c) {
    Eigen::RowVectorXd vertex(spec.n_features);
    for (int j = 0; j < spec.n_features; ++j)
      vertex(j) = (codes[static_cast<std::size_t>(c)] >> j & 1) ? spec.class_sep : -spec.class_sep;
    const int cls = c % spec.n_classes;
    for (int s = 0; s < cluster_sizes[static_cast<std::size_t>(c)]; ++s, ++row) {
      for (int j = 0; j < spec.n_features; ++j) x(row, j) = vertex(j) + rng.normal();
      labels[static_cast<std::size_t>(row)] = cls;
    }
  }
  return make_continuous("synth_classification", std::move(x), std::move(labels), spec.n_classes);
}

Dataset synth_waveform(int n_samples, std::uint64_t seed) {
  if (n_samples < 6) throw DataError("synth_waveform: need at least 6 samples");
  const int d = 21;
  auto wave = [](int j) { return std::max(6.0 - std::abs(j - 7.0), 0.0); };
  // base waveforms peaking at positions 7, 15 and 11 (1-based)
  auto h1 = [&](int j) { return wave(j + 1); };
  auto h2 = [&](int j) { return wave(j + 1 - 8); };
  auto h3 = [&](int j) { return wave(j + 1 - 4); };

  Rng rng(chain_seed(seed, {kTagSynth, 1}));
  const auto counts = balanced_counts(n_samples, 3);
  Eigen::MatrixXd x(n_samples, d);
  std::vector<int> labels(static_cast<std::size_t>(n_samples));
  Eigen::Index row = 0;
  for (int cls = 0; cls < 3; ++cls) {
    for (int s = 0; s < counts[static_cast<std::size_t>(cls)]; ++s, ++row) {
      const double u = rng.next_double();
      for (int j = 0; j < d; ++j) {
        double a, b;
        if (cls == 0) {
          a = h1(j); b = h2(j);
        } else if (cls == 1) {
          a = h1(j); b = h3(j);
        } else {
          a = h2(j); b = h3(j);
        }
        x(row, j) = u * a + (1.0 - u) * b + rng.normal();
      }
      labels[static_cast<std::size_t>(row)] = cls;
    }
  }
  return make_continuous("waveform", std::move(x), std::move(labels), 3);
}

Dataset synth_twonorm(int n_samples, std::uint64_t seed) {
  if (n_samples < 4) throw DataError("synth_twonorm: need at least 4 samples");
  const int d = 20;
  const double a = 2.0 / std::sqrt(static_cast<double>(d));
  Rng rng(chain_seed(seed, {kTagSynth, 2}));
  const auto counts = balanced_counts(n_samples, 2);
  Eigen::MatrixXd x(n_samples, d);
  std::vector<int> labels(static_cast<std::size_t>(n_samples));
  Eigen::Index row = 0;
  for (int cls = 0; cls < 2; ++cls)
    for (int s = 0; s < counts[static_cast<std::size_t>(cls)]; ++s, ++row) {
      const double mean = cls == 0 ? a : -a;
      for (int j = 0; j < d; ++j) x(row, j) = mean + rng.normal();
      labels[static_cast<std::size_t>(row)] = cls;
    }
  return make_continuous("twonorm", std::move(x), std::move(labels), 2);
}

Dataset synth_threenorm(int n_samples, std::uint64_t seed) {
  if (n_samples < 4) throw DataError("synth_threenorm: need at least 4 samples");
  const int d = 20;
  const double a = 2.0 / std::sqrt(static_cast<double>(d));
  Rng rng(chain_seed(seed, {kTagSynth, 3}));
  const auto counts = balanced_counts(n_samples, 2);
  Eigen::MatrixXd x(n_samples, d);
  std::vector<int> labels(static_cast<std::size_t>(n_samples));
  Eigen::Index row = 0;
  for (int cls = 0; cls < 2; ++cls)
    for (int s = 0; s < counts[static_cast<std::size_t>(cls)]; ++s, ++row) {
      if (cls == 0) {
        const double mean = rng.below(2) ? a : -a;  // unimodal pick per sample
        for (int j = 0; j < d; ++j) x(row, j) = mean + rng.normal();
      } else {
        for (int j = 0; j < d; ++j) x(row, j) = (j % 2 == 0 ? a : -a) + rng.normal();
      }
      labels[static_cast<std::size_t>(row)] = cls;
    }
  return make_continuous("threenorm", std::move(x), std::move(labels), 2);
}

Dataset synth_ringnorm(int n_samples, std::uint64_t seed) {
  if (n_samples < 4) throw DataError("synth_ringnorm: need at least 4 samples");
  const int d = 20;
  const double a = 1.0 / std::sqrt(static_cast<double>(d));
  Rng rng(chain_seed(seed, {kTagSynth, 4}));
  const auto counts = balanced_counts(n_samples, 2);
  Eigen::MatrixXd x(n_samples, d);
  std::vector<int> labels(static_cast<std::size_t>(n_samples));
  Eigen::Index row = 0;
  for (int cls = 0; cls < 2; ++cls)
    for (int s = 0; s < counts[static_cast<std::size_t>(cls)]; ++s, ++row) {
      for (int j = 0; j < d; ++j)
        x(row, j) = cls == 0 ? 2.0 * rng.normal() : a + rng.normal();
      labels[static_cast<std::size_t>(row)] = cls;
    }
  return make_continuous("ringnorm", std::move(x), std::move(labels), 2);
}

}  // namespace brf
