#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "brforest/data.hpp"
#include "brforest/forest.hpp"

namespace brf {

inline std::vector<double> default_br_grid() {
  return {0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 2.0, 3.0, 4.0, 5.0};
}

struct GridSpec {
  std::vector<ForestConfig> configs;            // templates; br and seed filled per cell
  std::vector<double> br_values = default_br_grid();  // strictly increasing
  int repeats = 20;
  std::uint64_t seed = 0;

  void validate() const;
};

// Accuracy per (config, br, repeat, fold) cell. Fold f means fold f was the
// test half of that repeat's shared assignment.
struct GridResult {
  std::string dataset;
  std::vector<std::string> config_names;
  std::vector<double> br_values;
  int repeats = 0;
  std::vector<double> accuracies;  // flat, (config, br, repeat, fold) strides

  std::size_t index(int c, int b, int r, int f) const {
    return ((static_cast<std::size_t>(c) * br_values.size() + static_cast<std::size_t>(b)) *
                static_cast<std::size_t>(repeats) +
            static_cast<std::size_t>(r)) *
               2 +
           static_cast<std::size_t>(f);
  }
  double at(int c, int b, int r, int f) const { return accuracies[index(c, b, r, f)]; }
  // All 2*repeats accuracies of one (config, br), ordered by (repeat, fold)
  // -- the positional pairing every t-test in the harness relies on.
  std::vector<double> cell_vector(int c, int b) const;
  double cell_mean(int c, int b) const;
};

// Accuracies carried over from a previous run, keyed by
// (config name, br, repeat, fold).
using CellMap = std::map<std::tuple<std::string, double, int, int>, double>;

struct CellRow {
  int config, br, repeat, fold;
  double accuracy;
  bool precomputed;
};

// Runs the cross-validated grid. Fold assignments are generated once per
// repeat from (spec.seed, repeat) and shared by every (config, br) cell.
// `on_row`, when given, is invoked in canonical (config, br, repeat, fold)
// order as soon as each prefix of the grid is complete, which lets callers
// stream an append-only results file that is byte-identical for any thread
// count.
GridResult run_grid(const Dataset& ds, const GridSpec& spec, int threads = 1,
                    const CellMap* precomputed = nullptr,
                    const std::function<void(const CellRow&)>& on_row = nullptr);

struct WinnerReport {
  std::string dataset;
  std::string best_config;
  double best_br = 0.0;
  double mean_accuracy = 0.0;   // fraction in [0, 1]
  double max_p_value = -1.0;    // < 0 until significance_analysis fills it
};

// Argmax of cell means; ties broken by lower br, then earlier config order.
WinnerReport select_winner(const GridResult& gr);

// Max p over paired one-sided t-tests of the winner cell against every
// (config, br) cell in the opposite BR group (<= 1 vs > 1).
double significance_analysis(const GridResult& gr, const WinnerReport& winner);

struct BRCurve {
  std::string dataset;
  std::string config;
  std::vector<std::pair<double, double>> points;  // (br, mean accuracy)
};

std::vector<BRCurve> br_curves(const GridResult& gr);

struct BRHistogram {
  std::map<double, int> overall;
  std::map<std::string, std::map<double, int>> per_config;
};

BRHistogram winning_br_histogram(const std::vector<WinnerReport>& reports, bool per_config);

// Canonical results format: dataset,config,br,repeat,fold,accuracy.
void write_grid_csv(const GridResult& gr, std::ostream& out);
GridResult read_grid_csv(std::istream& in, const std::string& source_name = "grid csv");
CellMap read_grid_cells(std::istream& in, std::string& dataset_name,
                        const std::string& source_name = "grid csv");

}  // namespace brf
