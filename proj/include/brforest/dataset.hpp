#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <vector>

namespace brf {

// Raised for invalid inputs and malformed data files. The CLI maps it to
// exit code 2; everything else unexpected is exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FeatureKind { Continuous, Binary };
enum class SplitQuality { Gini, Entropy };
enum class FeatureSubset { Sqrt, Log2, All };

// Encoded, fully numeric dataset: the output of preprocess() and the input
// to everything downstream. Labels are dense ids in 0..n_classes-1.
struct Dataset {
  std::string name;
  Eigen::MatrixXd features;                 // N x D
  std::vector<FeatureKind> feature_kinds;   // length D
  std::vector<std::string> feature_names;   // length D
  std::vector<int> labels;                  // length N
  int n_classes = 0;

  Eigen::Index n_rows() const { return features.rows(); }
  Eigen::Index n_features() const { return features.cols(); }

  std::vector<int> class_counts() const;
  // Throws DataError unless all structural invariants hold (N >= 2, D >= 1,
  // C >= 2, every class occurring at least twice, no constant column, no
  // duplicate feature+label row).
  void validate() const;
};

const char* to_string(FeatureKind k);
const char* to_string(SplitQuality q);
const char* to_string(FeatureSubset f);

}  // namespace brf
