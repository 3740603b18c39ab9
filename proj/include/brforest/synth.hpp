#pragma once

#include <cstdint>

#include "brforest/dataset.hpp"

namespace brf {

struct SynthSpec {
  int n_samples = 300;
  int n_features = 2;
  int n_classes = 2;
  int n_clusters_per_class = 1;
  double class_sep = 1.0;
  std::uint64_t seed = 0;
};

// Gaussian blobs at distinct hypercube vertices (side 2*class_sep, centered
// at the origin), vertices dealt round-robin to classes, unit noise per
// feature. Sample counts are split as evenly as possible across clusters.
Dataset synth_classification(const SynthSpec& spec);

// Classic synthetic benchmark generators (21 or 20 features). Balanced
// class counts up to the remainder; deterministic per seed.
Dataset synth_waveform(int n_samples, std::uint64_t seed);
Dataset synth_twonorm(int n_samples, std::uint64_t seed);
Dataset synth_threenorm(int n_samples, std::uint64_t seed);
Dataset synth_ringnorm(int n_samples, std::uint64_t seed);

}  // namespace brf
