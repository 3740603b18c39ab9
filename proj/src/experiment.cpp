#include "brforest/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <mutex>
#include <ostream>
#include <set>

#include "brforest/csv.hpp"
#include "brforest/parallel.hpp"
#include "brforest/stats.hpp"

namespace brf {

void GridSpec::validate() const {
  if (configs.empty()) throw DataError("grid spec: no configurations");
  if (repeats < 1) throw DataError("grid spec: repeats must be >= 1");
  if (br_values.empty()) throw DataError("grid spec: no BR values");
  for (std::size_t i = 0; i < br_values.size(); ++i) {
    if (!(br_values[i] > 0.0)) throw DataError("grid spec: BR values must be positive");
    if (i && !(br_values[i] > br_values[i - 1]))
      throw DataError("grid spec: BR values must be strictly increasing");
  }
  std::set<std::string> names;
  for (const auto& c : configs)
    if (!names.insert(c.name).second)
      throw DataError("grid spec: duplicate configuration name '" + c.name + "'");
}

std::vector<double> GridResult::cell_vector(int c, int b) const {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(repeats) * 2);
  for (int r = 0; r < repeats; ++r)
    for (int f = 0; f < 2; ++f) v.push_back(at(c, b, r, f));
  return v;
}

double GridResult::cell_mean(int c, int b) const {
  double sum = 0.0;
  for (int r = 0; r < repeats; ++r)
    for (int f = 0; f < 2; ++f) sum += at(c, b, r, f);
  return sum / (2.0 * static_cast<double>(repeats));
}

namespace {

Dataset subset_rows(const Dataset& ds, const std::vector<int>& rows) {
  Dataset out;
  out.name = ds.name;
  out.n_classes = ds.n_classes;
  out.feature_kinds = ds.feature_kinds;
  out.feature_names = ds.feature_names;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), ds.n_features());
  out.labels.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = ds.features.row(rows[i]);
    out.labels[i] = ds.labels[static_cast<std::size_t>(rows[i])];
  }
  return out;
}

}  // namespace

GridResult run_grid(const Dataset& ds, const GridSpec& spec, int threads,
                    const CellMap* precomputed, const std::function<void(const CellRow&)>& on_row) {
  spec.validate();
  const int n_configs = static_cast<int>(spec.configs.size());
  const int n_brs = static_cast<int>(spec.br_values.size());

  GridResult gr;
  gr.dataset = ds.name;
  for (const auto& c : spec.configs) gr.config_names.push_back(c.name);
  gr.br_values = spec.br_values;
  gr.repeats = spec.repeats;
  gr.accuracies.assign(
      static_cast<std::size_t>(n_configs) * static_cast<std::size_t>(n_brs) *
          static_cast<std::size_t>(spec.repeats) * 2,
      0.0);

  // fold assignments shared by every (config, br) cell of a repeat
  std::vector<FoldAssignment> folds(static_cast<std::size_t>(spec.repeats));
  std::vector<std::array<std::vector<int>, 2>> fold_rows(static_cast<std::size_t>(spec.repeats));
  for (int r = 0; r < spec.repeats; ++r) {
    folds[static_cast<std::size_t>(r)] = stratified_two_fold(ds, r, spec.seed);
    const auto& fa = folds[static_cast<std::size_t>(r)];
    for (std::size_t i = 0; i < fa.fold_id.size(); ++i)
      fold_rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(fa.fold_id[i])].push_back(
          static_cast<int>(i));
  }

  // one task per (config, br, repeat); each computes both fold cells
  const int n_tasks = n_configs * n_brs * spec.repeats;
  const std::size_t n_cells = gr.accuracies.size();

  std::mutex seq_mutex;
  std::vector<char> done(n_cells, 0);
  std::size_t cursor = 0;

  auto cell_done = [&](std::size_t flat, int c, int b, int r, int f, double acc,
                       bool was_precomputed) {
    gr.accuracies[flat] = acc;
    if (!on_row) return;
    std::lock_guard<std::mutex> lock(seq_mutex);
    done[flat] = 1;
    (void)c; (void)b; (void)r; (void)f; (void)was_precomputed;
    while (cursor < n_cells && done[cursor]) {
      const std::size_t per_config = static_cast<std::size_t>(n_brs) *
                                     static_cast<std::size_t>(spec.repeats) * 2;
      const std::size_t per_br = static_cast<std::size_t>(spec.repeats) * 2;
      const int cc = static_cast<int>(cursor / per_config);
      const int bb = static_cast<int>(cursor % per_config / per_br);
      const int rr = static_cast<int>(cursor % per_br / 2);
      const int ff = static_cast<int>(cursor % 2);
      bool pre = false;
      if (precomputed) {
        const auto key = std::make_tuple(gr.config_names[static_cast<std::size_t>(cc)],
                                         gr.br_values[static_cast<std::size_t>(bb)], rr, ff);
        pre = precomputed->count(key) > 0;
      }
      on_row({cc, bb, rr, ff, gr.accuracies[cursor], pre});
      ++cursor;
    }
  };

  parallel_for(n_tasks, threads, [&](int task) {
    const int c = task / (n_brs * spec.repeats);
    const int b = task % (n_brs * spec.repeats) / spec.repeats;
    const int r = task % spec.repeats;
    const double br = spec.br_values[static_cast<std::size_t>(b)];
    const std::string& cname = gr.config_names[static_cast<std::size_t>(c)];

    bool have[2] = {false, false};
    double acc[2] = {0.0, 0.0};
    if (precomputed) {
      for (int f = 0; f < 2; ++f) {
        const auto it = precomputed->find(std::make_tuple(cname, br, r, f));
        if (it != precomputed->end()) {
          have[f] = true;
          acc[f] = it->second;
        }
      }
    }

    if (!have[0] || !have[1]) {
      Dataset part[2];
      for (int f = 0; f < 2; ++f)
        part[f] = subset_rows(ds, fold_rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(f)]);
      for (int f = 0; f < 2; ++f) {
        if (have[f]) continue;
        // test on fold f, train on the other
        ForestConfig cfg = spec.configs[static_cast<std::size_t>(c)];
        cfg.bootstrap_rate = br;
        cfg.seed = chain_seed(spec.seed, {kTagGrid, static_cast<std::uint64_t>(c),
                                          static_cast<std::uint64_t>(b),
                                          static_cast<std::uint64_t>(r),
                                          static_cast<std::uint64_t>(f)});
        const Dataset& train = part[1 - f];
        const Dataset& test = part[f];
        const RandomForest rf = fit_forest(train, cfg, 1);
        int correct = 0;
        for (Eigen::Index i = 0; i < test.n_rows(); ++i)
          if (predict_forest(rf, test.features.row(i)).label ==
              test.labels[static_cast<std::size_t>(i)])
            ++correct;
        acc[f] = static_cast<double>(correct) / static_cast<double>(test.n_rows());
      }
    }

    for (int f = 0; f < 2; ++f)
      cell_done(gr.index(c, b, r, f), c, b, r, f, acc[f], have[f]);
  });

  return gr;
}

WinnerReport select_winner(const GridResult& gr) {
  if (gr.config_names.empty() || gr.br_values.empty() || gr.repeats < 1)
    throw DataError("select_winner: empty grid");
  int best_c = 0, best_b = 0;
  double best_mean = -1.0;
  // br-major scan: for equal means the lower br wins, then earlier config
  for (std::size_t b = 0; b < gr.br_values.size(); ++b)
    for (std::size_t c = 0; c < gr.config_names.size(); ++c) {
      const double m = gr.cell_mean(static_cast<int>(c), static_cast<int>(b));
      if (m > best_mean) {
        best_mean = m;
        best_c = static_cast<int>(c);
        best_b = static_cast<int>(b);
      }
    }
  WinnerReport w;
  w.dataset = gr.dataset;
  w.best_config = gr.config_names[static_cast<std::size_t>(best_c)];
  w.best_br = gr.br_values[static_cast<std::size_t>(best_b)];
  w.mean_accuracy = best_mean;
  return w;
}

double significance_analysis(const GridResult& gr, const WinnerReport& winner) {
  const auto cit = std::find(gr.config_names.begin(), gr.config_names.end(), winner.best_config);
  const auto bit = std::find(gr.br_values.begin(), gr.br_values.end(), winner.best_br);
  if (cit == gr.config_names.end() || bit == gr.br_values.end())
    throw DataError("significance_analysis: winner not in grid");
  const int wc = static_cast<int>(cit - gr.config_names.begin());
  const int wb = static_cast<int>(bit - gr.br_values.begin());

  const bool winner_low = winner.best_br <= 1.0;
  const auto winner_cells = gr.cell_vector(wc, wb);

  double max_p = -1.0;
  for (std::size_t b = 0; b < gr.br_values.size(); ++b) {
    const bool low = gr.br_values[b] <= 1.0;
    if (low == winner_low) continue;
    for (std::size_t c = 0; c < gr.config_names.size(); ++c) {
      const auto other = gr.cell_vector(static_cast<int>(c), static_cast<int>(b));
      max_p = std::max(max_p, paired_t_greater(winner_cells, other).p_value);
    }
  }
  if (max_p < 0.0)
    throw DataError("significance_analysis: no cells in the opposite BR group");
  return max_p;
}

std::vector<BRCurve> br_curves(const GridResult& gr) {
  std::vector<BRCurve> out;
  for (std::size_t c = 0; c < gr.config_names.size(); ++c) {
    BRCurve curve;
    curve.dataset = gr.dataset;
    curve.config = gr.config_names[c];
    for (std::size_t b = 0; b < gr.br_values.size(); ++b)
      curve.points.emplace_back(gr.br_values[b],
                                gr.cell_mean(static_cast<int>(c), static_cast<int>(b)));
    out.push_back(std::move(curve));
  }
  return out;
}

BRHistogram winning_br_histogram(const std::vector<WinnerReport>& reports, bool per_config) {
  if (reports.empty()) throw DataError("winning_br_histogram: no reports");
  BRHistogram h;
  for (const auto& r : reports) {
    h.overall[r.best_br]++;
    if (per_config) h.per_config[r.best_config][r.best_br]++;
  }
  return h;
}

void write_grid_csv(const GridResult& gr, std::ostream& out) {
  out << "dataset,config,br,repeat,fold,accuracy\n";
  for (std::size_t c = 0; c < gr.config_names.size(); ++c)
    for (std::size_t b = 0; b < gr.br_values.size(); ++b)
      for (int r = 0; r < gr.repeats; ++r)
        for (int f = 0; f < 2; ++f)
          out << join_csv_line({gr.dataset, gr.config_names[c], format_double(gr.br_values[b]),
                                std::to_string(r), std::to_string(f),
                                format_double(gr.at(static_cast<int>(c), static_cast<int>(b), r, f))})
              << "\n";
}

CellMap read_grid_cells(std::istream& in, std::string& dataset_name,
                        const std::string& source_name) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(source_name + ": empty file");
  const auto header = split_csv_line(line);
  const std::vector<std::string> expected = {"dataset", "config", "br",
                                             "repeat",  "fold",   "accuracy"};
  if (header != expected) throw DataError(source_name + ": unexpected header");

  CellMap cells;
  dataset_name.clear();
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 6)
      throw DataError(source_name + ": ragged row " + std::to_string(row));
    if (dataset_name.empty())
      dataset_name = f[0];
    else if (dataset_name != f[0])
      throw DataError(source_name + ": multiple dataset names in one file");
    const auto key = std::make_tuple(f[1], parse_double(f[2]), static_cast<int>(parse_double(f[3])),
                                     static_cast<int>(parse_double(f[4])));
    const double acc = parse_double(f[5]);
    if (!(acc >= 0.0 && acc <= 1.0))
      throw DataError(source_name + ": accuracy out of [0,1] at row " + std::to_string(row));
    const auto it = cells.find(key);
    if (it != cells.end() && it->second != acc)
      throw DataError(source_name + ": conflicting duplicate key at row " + std::to_string(row) +
                      " (rerun with --force to recompute)");
    cells[key] = acc;
  }
  return cells;
}

GridResult read_grid_csv(std::istream& in, const std::string& source_name) {
  std::string dataset;
  const CellMap cells = read_grid_cells(in, dataset, source_name);
  if (cells.empty()) throw DataError(source_name + ": no rows");

  std::vector<std::string> config_names;
  std::set<double> brs;
  int max_repeat = 0;
  for (const auto& [key, acc] : cells) {
    const auto& [cfg, br, rep, fold] = key;
    if (std::find(config_names.begin(), config_names.end(), cfg) == config_names.end())
      config_names.push_back(cfg);
    brs.insert(br);
    max_repeat = std::max(max_repeat, rep);
  }

  GridResult gr;
  gr.dataset = dataset;
  gr.config_names = std::move(config_names);
  gr.br_values.assign(brs.begin(), brs.end());
  gr.repeats = max_repeat + 1;
  gr.accuracies.assign(gr.config_names.size() * gr.br_values.size() *
                           static_cast<std::size_t>(gr.repeats) * 2,
                       0.0);

  std::vector<char> seen(gr.accuracies.size(), 0);
  for (const auto& [key, acc] : cells) {
    const auto& [cfg, br, rep, fold] = key;
    const auto c = std::find(gr.config_names.begin(), gr.config_names.end(), cfg) -
                   gr.config_names.begin();
    const auto b = std::find(gr.br_values.begin(), gr.br_values.end(), br) - gr.br_values.begin();
    if (fold < 0 || fold > 1 || rep < 0)
      throw DataError(source_name + ": bad repeat/fold index");
    const auto flat = gr.index(static_cast<int>(c), static_cast<int>(b), rep, fold);
    gr.accuracies[flat] = acc;
    seen[flat] = 1;
  }
  const auto missing = std::count(seen.begin(), seen.end(), 0);
  if (missing > 0)
    throw DataError(source_name + ": incomplete grid (" + std::to_string(missing) +
                    " cells missing)");
  return gr;
}

}  // namespace brf
