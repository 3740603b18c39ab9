#include "brforest/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "brforest/csv.hpp"
#include "brforest/data.hpp"
#include "brforest/experiment.hpp"
#include "brforest/meta.hpp"
#include "brforest/parallel.hpp"
#include "brforest/serialize.hpp"
#include "brforest/stats.hpp"
#include "brforest/svg.hpp"
#include "brforest/synth.hpp"

namespace fs = std::filesystem;

namespace brf {

namespace {

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("BRFOREST_SEED");
  if (!v || !*v) return std::nullopt;
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw DataError("BRFOREST_SEED is not a valid integer");
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string summary_line(const Dataset& ds) {
  int numeric = 0, binary = 0;
  for (auto k : ds.feature_kinds) (k == FeatureKind::Continuous ? numeric : binary)++;
  std::ostringstream os;
  os << ds.name << " " << numeric << " " << binary << " " << ds.n_rows() << " " << ds.n_classes;
  return os.str();
}

void save_named(const Dataset& ds, const std::string& out_dir, std::ostream& out) {
  fs::create_directories(out_dir);
  const std::string manifest = out_dir + "/" + ds.name + ".manifest.json";
  save_dataset(ds, manifest, matrix_path_for(manifest));
  out << summary_line(ds) << "\n";
}

std::vector<ForestConfig> configs_from_names(const std::vector<std::string>& names) {
  if (names.empty()) return named_configs();
  std::vector<ForestConfig> out;
  for (const auto& n : names) out.push_back(named_config(n));
  return out;
}

std::string format_pvalue(double p) {
  if (p < 1e-6) return "<1e-06";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", p);
  return buf;
}

// ---- grid ----------------------------------------------------------------

struct GridArgs {
  std::vector<std::string> manifests;
  std::string run_manifest;
  std::string out_path;
  std::string out_dir = ".";
  std::string configs_csv;
  std::string br_csv;
  int repeats = 20;
  bool paper_scale = false;
  std::uint64_t seed = 0;
  bool force = false;
  int threads = default_threads();
};

void run_one_grid(const Dataset& ds, const GridSpec& spec, const std::string& out_path,
                  bool force, int threads, std::ostream& out, std::ostream& err) {
  for (double br : spec.br_values)
    if (br > 10.0) err << "warning: bootstrap rate " << format_double(br) << " is above 10\n";

  CellMap existing;
  bool file_exists = fs::exists(out_path);
  if (file_exists && force) {
    fs::remove(out_path);
    file_exists = false;
  }
  if (file_exists) {
    std::ifstream in(out_path);
    std::string prior_name;
    existing = read_grid_cells(in, prior_name, out_path);
    if (!existing.empty() && prior_name != ds.name)
      throw DataError(out_path + ": contains results for '" + prior_name + "', not '" + ds.name +
                      "' (use --force to overwrite)");
  }

  std::ofstream sink(out_path, std::ios::app);
  if (!sink) throw DataError("cannot write '" + out_path + "'");
  if (!file_exists) sink << "dataset,config,br,repeat,fold,accuracy\n";

  std::size_t fresh = 0;
  const auto t0 = std::chrono::steady_clock::now();
  run_grid(ds, spec, threads, existing.empty() ? nullptr : &existing, [&](const CellRow& row) {
    if (row.precomputed) return;
    ++fresh;
    sink << join_csv_line({ds.name, spec.configs[static_cast<std::size_t>(row.config)].name,
                           format_double(spec.br_values[static_cast<std::size_t>(row.br)]),
                           std::to_string(row.repeat), std::to_string(row.fold),
                           format_double(row.accuracy)})
         << "\n";
    sink.flush();
  });
  const auto secs =
      std::chrono::duration_cast<std::chrono::seconds>(std::chrono::steady_clock::now() - t0);
  out << ds.name << ": " << fresh << " new cells, "
      << spec.configs.size() * spec.br_values.size() * static_cast<std::size_t>(spec.repeats) * 2
      << " total, " << secs.count() << "s -> " << out_path << "\n";
}

int cmd_grid(const GridArgs& args, std::ostream& out, std::ostream& err) {
  GridSpec spec;
  spec.repeats = args.paper_scale ? 200 : args.repeats;
  spec.seed = env_seed().value_or(args.seed);
  if (!args.configs_csv.empty())
    spec.configs = configs_from_names(split_list(args.configs_csv));
  else
    spec.configs = named_configs();
  if (!args.br_csv.empty()) {
    spec.br_values.clear();
    for (const auto& s : split_list(args.br_csv)) spec.br_values.push_back(parse_double(s));
  }

  std::vector<std::pair<std::string, std::string>> jobs;  // (manifest, out csv)
  if (!args.run_manifest.empty()) {
    std::ifstream in(args.run_manifest);
    if (!in) throw DataError("cannot open '" + args.run_manifest + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DataError("'" + args.run_manifest + "': " + e.what());
    }
    const std::string out_dir = j.value("output_dir", args.out_dir);
    fs::create_directories(out_dir);
    if (j.value("scale", "desk") == "paper") spec.repeats = 200;
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      if (g.contains("configs"))
        spec.configs = configs_from_names(g.at("configs").get<std::vector<std::string>>());
      if (g.contains("br_values")) spec.br_values = g.at("br_values").get<std::vector<double>>();
      if (g.contains("repeats")) spec.repeats = g.at("repeats").get<int>();
      if (g.contains("seed")) spec.seed = env_seed().value_or(g.at("seed").get<std::uint64_t>());
    }
    for (const auto& m : j.at("datasets")) {
      const std::string manifest = m.get<std::string>();
      const Dataset probe = load_dataset(manifest, matrix_path_for(manifest));
      jobs.emplace_back(manifest, out_dir + "/" + probe.name + ".grid.csv");
    }
  } else {
    if (args.manifests.empty())
      throw CLI::ValidationError("grid", "either --manifest or --run is required");
    for (const auto& manifest : args.manifests) {
      std::string dst = args.out_path;
      if (dst.empty() || args.manifests.size() > 1) {
        const Dataset probe = load_dataset(manifest, matrix_path_for(manifest));
        fs::create_directories(args.out_dir);
        dst = args.out_dir + "/" + probe.name + ".grid.csv";
      }
      jobs.emplace_back(manifest, dst);
    }
  }

  for (const auto& [manifest, dst] : jobs) {
    const Dataset ds = load_dataset(manifest, matrix_path_for(manifest));
    run_one_grid(ds, spec, dst, args.force, args.threads, out, err);
  }
  return 0;
}

// ---- report ---------------------------------------------------------------

int cmd_report(const std::vector<std::string>& grid_paths, const std::string& out_dir,
               bool per_config, std::ostream& out) {
  if (grid_paths.empty()) throw CLI::ValidationError("report", "at least one --grid is required");
  fs::create_directories(out_dir);

  std::vector<WinnerReport> winners;
  for (const auto& path : grid_paths) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    const GridResult gr = read_grid_csv(in, path);
    WinnerReport w = select_winner(gr);
    w.max_p_value = significance_analysis(gr, w);
    winners.push_back(w);

    const auto curves = br_curves(gr);
    std::ofstream ccsv(out_dir + "/" + gr.dataset + ".curves.csv");
    ccsv << "dataset,config,br,mean_accuracy\n";
    for (const auto& c : curves)
      for (const auto& [br, acc] : c.points)
        ccsv << join_csv_line({c.dataset, c.config, format_double(br), format_double(acc)}) << "\n";
    std::ofstream csvg(out_dir + "/" + gr.dataset + ".curves.svg");
    write_br_curves_svg(curves, csvg);
  }

  std::ofstream wcsv(out_dir + "/winners.csv");
  wcsv << "dataset,best_config,mean_accuracy,best_br,max_p_value\n";
  for (const auto& w : winners)
    wcsv << join_csv_line({w.dataset, w.best_config, format_double(w.mean_accuracy),
                           format_double(w.best_br), format_double(w.max_p_value)})
         << "\n";

  const BRHistogram hist = winning_br_histogram(winners, per_config);
  std::ofstream hcsv(out_dir + "/histogram.csv");
  hcsv << "config,br,count\n";
  for (const auto& [br, count] : hist.overall)
    hcsv << join_csv_line({"ALL", format_double(br), std::to_string(count)}) << "\n";
  for (const auto& [cfg, counts] : hist.per_config)
    for (const auto& [br, count] : counts)
      hcsv << join_csv_line({cfg, format_double(br), std::to_string(count)}) << "\n";

  out << "dataset                        best model    acc [%]   BR     p-value\n";
  for (const auto& w : winners) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-30s %-12s %8.3f   %-4s   %s", w.dataset.c_str(),
                  w.best_config.c_str(), w.mean_accuracy * 100.0,
                  format_double(w.best_br).c_str(), format_pvalue(w.max_p_value).c_str());
    out << line << "\n";
  }
  return 0;
}

// ---- meta -----------------------------------------------------------------

struct MetaArgs {
  std::vector<std::string> grid_paths;
  std::string data_dir = ".";
  std::string out_dir = ".";
  double p_threshold = -1.0;  // < 0 = no filter
  std::string pool = "base+interactions";
  std::string configs_csv;
  std::string br_csv;
  int max_k = 10;
  std::uint64_t seed = 0;
  int threads = default_threads();
  bool skip_evaluate = false;
};

MetaPool parse_pool(const std::string& s) {
  if (s == "base") return MetaPool::Base;
  if (s == "base+interactions") return MetaPool::BaseInteractions;
  if (s == "base+scaled") return MetaPool::BaseScaled;
  if (s == "all") return MetaPool::All;
  throw DataError("unknown pool '" + s + "'");
}

// data-dir manifests indexed by the dataset name they declare
std::map<std::string, std::string> scan_manifests(const std::string& data_dir) {
  std::map<std::string, std::string> out;
  if (!fs::is_directory(data_dir)) throw DataError("'" + data_dir + "' is not a directory");
  for (const auto& entry : fs::directory_iterator(data_dir)) {
    const std::string p = entry.path().string();
    if (p.size() < 14 || p.compare(p.size() - 14, 14, ".manifest.json") != 0) continue;
    std::ifstream in(p);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception&) {
      continue;
    }
    if (j.contains("name")) out[j.at("name").get<std::string>()] = p;
  }
  return out;
}

int cmd_meta(const MetaArgs& args, std::ostream& out) {
  if (args.grid_paths.empty()) throw CLI::ValidationError("meta", "at least one --grid is required");
  fs::create_directories(args.out_dir);
  const auto manifests = scan_manifests(args.data_dir);

  std::vector<WinnerReport> winners;
  std::vector<GridResult> grids;
  for (const auto& path : args.grid_paths) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    grids.push_back(read_grid_csv(in, path));
    WinnerReport w = select_winner(grids.back());
    w.max_p_value = significance_analysis(grids.back(), w);
    winners.push_back(w);
  }

  // neighborhood statistics per dataset
  std::vector<KLStats> stats;
  for (const auto& gr : grids) {
    const auto it = manifests.find(gr.dataset);
    if (it == manifests.end())
      throw DataError("no manifest for dataset '" + gr.dataset + "' under '" + args.data_dir +
                      "'");
    const Dataset ds = load_dataset(it->second, matrix_path_for(it->second));
    stats.push_back(kl_statistics(neighborhood_scale(ds)));
  }

  std::ofstream kcsv(args.out_dir + "/kl.csv");
  kcsv << "dataset,n_classes";
  for (const auto& n : kl_names()) kcsv << "," << n;
  kcsv << "\n";
  for (const auto& kl : stats) {
    std::vector<std::string> fields = {kl.dataset, std::to_string(kl.n_classes)};
    for (int i = 0; i < kKLCount; ++i) fields.push_back(format_double(kl.values(i)));
    kcsv << join_csv_line(fields) << "\n";
  }

  // correlation targets: overall best BR plus each configuration's best BR
  std::vector<std::string> target_names = {"best"};
  for (const auto& name : grids.front().config_names) target_names.push_back(name);
  Eigen::MatrixXd targets(static_cast<Eigen::Index>(grids.size()),
                          static_cast<Eigen::Index>(target_names.size()));
  for (std::size_t i = 0; i < grids.size(); ++i) {
    targets(static_cast<Eigen::Index>(i), 0) = winners[i].best_br;
    for (std::size_t c = 0; c < grids[i].config_names.size(); ++c) {
      int best_b = 0;
      double best_mean = -1.0;
      for (std::size_t b = 0; b < grids[i].br_values.size(); ++b) {
        const double m = grids[i].cell_mean(static_cast<int>(c), static_cast<int>(b));
        if (m > best_mean) {
          best_mean = m;
          best_b = static_cast<int>(b);
        }
      }
      const auto t = std::find(target_names.begin(), target_names.end(),
                               grids[i].config_names[c]) -
                     target_names.begin();
      targets(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) =
          grids[i].br_values[static_cast<std::size_t>(best_b)];
    }
  }

  const MetaPool pool = parse_pool(args.pool);
  const MetaFeatureMatrix base = build_meta_matrix(stats, MetaPool::Base);
  if (grids.size() >= 3) {
    const CorrelationTable table = correlation_table(base, target_names, targets);
    std::ofstream ccsv(args.out_dir + "/correlations.csv");
    ccsv << "feature";
    for (const auto& t : table.target_names) ccsv << "," << t;
    ccsv << "\n";
    for (std::size_t f = 0; f < table.feature_names.size(); ++f) {
      std::vector<std::string> fields = {table.feature_names[f]};
      for (Eigen::Index t = 0; t < table.rho.cols(); ++t) {
        const double v = table.rho(static_cast<Eigen::Index>(f), t);
        fields.push_back(std::isfinite(v) ? format_double(v) : "NA");
      }
      ccsv << join_csv_line(fields) << "\n";
    }
  } else {
    out << "note: fewer than 3 datasets, skipping the correlation table\n";
  }

  const MetaFeatureMatrix matrix =
      pool == MetaPool::Base ? base : build_meta_matrix(stats, pool);

  if ((pool == MetaPool::BaseInteractions || pool == MetaPool::All) && grids.size() >= 3) {
    // strongest interaction features against the overall best BR
    std::vector<std::pair<double, std::size_t>> ranked;
    std::vector<double> tgt(grids.size());
    for (std::size_t i = 0; i < grids.size(); ++i) tgt[i] = winners[i].best_br;
    const CorrelationTable full = correlation_table(matrix, {"best"},
                                                    targets.col(0));
    for (std::size_t f = 0; f < full.feature_names.size(); ++f) {
      const double v = full.rho(static_cast<Eigen::Index>(f), 0);
      if (std::isfinite(v)) ranked.emplace_back(v, f);
    }
    std::sort(ranked.begin(), ranked.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    std::ofstream icsv(args.out_dir + "/top_interactions.csv");
    icsv << "feature,rho_best\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(20, ranked.size()); ++i)
      icsv << join_csv_line({full.feature_names[ranked[i].second],
                             format_double(ranked[i].first)})
           << "\n";
  }

  const auto labels = regime_labels(
      winners, args.p_threshold >= 0 ? std::optional<double>(args.p_threshold) : std::nullopt);
  int gt1 = 0;
  for (const auto& l : labels) gt1 += l.value == Regime::GT1 ? 1 : 0;
  out << "regime labels: " << labels.size() << " datasets (" << labels.size() - gt1 << " LE1, "
      << gt1 << " GT1)\n";

  if (args.skip_evaluate) return 0;

  std::vector<ForestConfig> configs = args.configs_csv.empty()
                                          ? named_configs()
                                          : configs_from_names(split_list(args.configs_csv));
  std::vector<double> brs = default_br_grid();
  if (!args.br_csv.empty()) {
    brs.clear();
    for (const auto& s : split_list(args.br_csv)) brs.push_back(parse_double(s));
  }

  const auto report = meta_evaluate(matrix, labels, configs, brs, args.max_k,
                                    env_seed().value_or(args.seed), args.threads);

  std::ofstream mcsv(args.out_dir + "/meta_report.csv");
  mcsv << "config,br,k,accuracy\n";
  for (const auto& c : report.cells)
    mcsv << join_csv_line({c.config, format_double(c.br), std::to_string(c.top_k),
                           format_double(c.accuracy)})
         << "\n";

  char line[160];
  std::snprintf(line, sizeof(line), "best meta cell: %s BR=%s k=%d accuracy=%.2f%%",
                report.best.config.c_str(), format_double(report.best.br).c_str(),
                report.best.top_k, report.best.accuracy * 100.0);
  out << line << "\n";
  return 0;
}

// ---- fit / predict ---------------------------------------------------------

int cmd_fit(const std::string& manifest, const std::string& config_name, double br, int trees,
            std::uint64_t seed, const std::string& out_path, int threads, std::ostream& out) {
  const Dataset ds = load_dataset(manifest, matrix_path_for(manifest));
  ForestConfig cfg = named_config(config_name);
  cfg.bootstrap_rate = br;
  if (trees > 0) cfg.n_trees = trees;
  cfg.seed = env_seed().value_or(seed);
  const RandomForest rf = fit_forest(ds, cfg, threads);
  save_forest(rf, out_path);
  out << "fitted " << cfg.name << " BR=" << format_double(cfg.bootstrap_rate) << " trees="
      << cfg.n_trees << " on " << ds.name << " -> " << out_path << "\n";
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::string& vote, const std::string& out_path, int threads,
                std::ostream& out) {
  const RandomForest rf = load_forest(model_path);
  const bool hard = vote == "hard";

  std::ifstream in(data_path);
  if (!in) throw DataError("cannot open '" + data_path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + data_path + "': empty file");
  const auto header = split_csv_line(line);
  const bool has_labels = !header.empty() && header.back() == "label";
  const std::size_t d = header.size() - (has_labels ? 1 : 0);
  if (static_cast<Eigen::Index>(d) != rf.n_features)
    throw DataError("'" + data_path + "': expected " + std::to_string(rf.n_features) +
                    " feature columns");

  std::vector<std::vector<double>> rows;
  std::vector<int> truth;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) throw DataError("'" + data_path + "': ragged row");
    std::vector<double> r(d);
    for (std::size_t j = 0; j < d; ++j) r[j] = parse_double(f[j]);
    rows.push_back(std::move(r));
    if (has_labels) truth.push_back(static_cast<int>(parse_double(f.back())));
  }

  std::vector<Prediction> preds(rows.size());
  parallel_for(static_cast<int>(rows.size()), threads, [&](int i) {
    Eigen::Map<const Eigen::RowVectorXd> x(rows[static_cast<std::size_t>(i)].data(),
                                           static_cast<Eigen::Index>(d));
    preds[static_cast<std::size_t>(i)] = hard ? predict_forest_hard(rf, x) : predict_forest(rf, x);
  });

  std::ofstream sink(out_path);
  if (!sink) throw DataError("cannot write '" + out_path + "'");
  sink << "row,label";
  for (int c = 0; c < rf.n_classes; ++c) sink << ",p" << c;
  sink << "\n";
  for (std::size_t i = 0; i < preds.size(); ++i) {
    sink << i << "," << preds[i].label;
    for (int c = 0; c < rf.n_classes; ++c) sink << "," << format_double(preds[i].proba(c));
    sink << "\n";
  }

  if (has_labels) {
    int correct = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
      if (preds[i].label == truth[i]) ++correct;
    char buf[80];
    std::snprintf(buf, sizeof(buf), "accuracy: %.3f%% (%d/%zu)",
                  100.0 * correct / static_cast<double>(preds.size()), correct, preds.size());
    out << buf << "\n";
  }
  out << preds.size() << " predictions -> " << out_path << "\n";
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"random forests with an unrestricted bootstrap rate"};
  app.require_subcommand(1);
  int threads = default_threads();
  app.add_option("--threads", threads, "worker threads (default: all cores)");

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "encode a raw CSV into a dataset");
  std::string pre_input, pre_target = "class", pre_name, pre_cats, pre_markers, pre_out = ".";
  std::string pre_delim = ",";
  pre->add_option("--input", pre_input, "raw CSV with a header row")->required();
  pre->add_option("--target", pre_target, "class column name");
  pre->add_option("--name", pre_name, "dataset name (default: file stem)");
  pre->add_option("--categorical", pre_cats, "comma-separated columns to force categorical");
  pre->add_option("--missing-markers", pre_markers,
                  "comma-separated missing markers (default: empty,?,NA)");
  pre->add_option("--delimiter", pre_delim, "field delimiter");
  pre->add_option("--out-dir", pre_out, "output directory");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  std::string synth_kind = "classification", synth_name, synth_out = ".";
  int synth_n = 300, synth_features = 2, synth_classes = 2, synth_clusters = 1;
  double synth_sep = 1.0;
  std::uint64_t synth_seed = 0;
  synth->add_option("--kind", synth_kind,
                    "classification|waveform|twonorm|threenorm|ringnorm");
  synth->add_option("--n", synth_n, "sample count");
  synth->add_option("--features", synth_features, "feature count (classification)");
  synth->add_option("--classes", synth_classes, "class count (classification)");
  synth->add_option("--clusters", synth_clusters, "clusters per class (classification)");
  synth->add_option("--class-sep", synth_sep, "cluster separation (classification)");
  synth->add_option("--seed", synth_seed, "random seed");
  synth->add_option("--name", synth_name, "dataset name (default: kind)");
  synth->add_option("--out-dir", synth_out, "output directory");

  // grid
  auto* grid = app.add_subcommand("grid", "run the (config x BR) cross-validation grid");
  GridArgs ga;
  grid->add_option("--manifest", ga.manifests, "dataset manifest(s)");
  grid->add_option("--run", ga.run_manifest, "run manifest JSON (datasets, grid, output_dir, scale)");
  grid->add_option("--out", ga.out_path, "output CSV (single dataset only)");
  grid->add_option("--out-dir", ga.out_dir, "output directory for <dataset>.grid.csv files");
  grid->add_option("--configs", ga.configs_csv, "comma-separated config names (default: all 18)");
  grid->add_option("--br", ga.br_csv, "comma-separated BR values (default: 0.2..5)");
  grid->add_option("--repeats", ga.repeats, "CV repeats (default: 20)");
  grid->add_flag("--paper-scale", ga.paper_scale, "200 repeats");
  grid->add_option("--seed", ga.seed, "experiment seed");
  grid->add_flag("--force", ga.force, "discard any existing results file");

  // report
  auto* report = app.add_subcommand("report", "winners, histograms and BR curves from grid CSVs");
  std::vector<std::string> report_grids;
  std::string report_out = ".";
  bool report_per_config = false;
  report->add_option("--grid", report_grids, "grid result CSV(s)");
  report->add_option("--out-dir", report_out, "output directory");
  report->add_flag("--per-config", report_per_config, "add per-configuration histogram rows");

  // meta
  auto* meta = app.add_subcommand("meta", "neighborhood statistics, correlations, regime classifier");
  MetaArgs ma;
  meta->add_option("--grid", ma.grid_paths, "grid result CSV(s)");
  meta->add_option("--data-dir", ma.data_dir, "directory with dataset manifests");
  meta->add_option("--out-dir", ma.out_dir, "output directory");
  meta->add_option("--p-threshold", ma.p_threshold, "keep only datasets with max p <= threshold");
  meta->add_option("--pool", ma.pool, "base|base+interactions|base+scaled|all");
  meta->add_option("--configs", ma.configs_csv, "meta-classifier config names (default: all 18)");
  meta->add_option("--br", ma.br_csv, "meta-classifier BR values");
  meta->add_option("--k", ma.max_k, "max selected feature count (default: 10)");
  meta->add_option("--seed", ma.seed, "meta experiment seed");
  meta->add_flag("--skip-evaluate", ma.skip_evaluate, "stop after correlations");

  // fit
  auto* fit = app.add_subcommand("fit", "fit one forest and save the model");
  std::string fit_manifest, fit_config = "RF(base)", fit_out = "model.json";
  double fit_br = 1.0;
  int fit_trees = 0;
  std::uint64_t fit_seed = 0;
  fit->add_option("--manifest", fit_manifest, "dataset manifest")->required();
  fit->add_option("--config", fit_config, "configuration name");
  fit->add_option("--br", fit_br, "bootstrap rate");
  fit->add_option("--trees", fit_trees, "override tree count");
  fit->add_option("--seed", fit_seed, "random seed");
  fit->add_option("--out", fit_out, "model JSON path");

  // predict
  auto* predict = app.add_subcommand("predict", "predict with a saved model");
  std::string pred_model, pred_data, pred_vote = "soft", pred_out = "predictions.csv";
  predict->add_option("--model", pred_model, "model JSON")->required();
  predict->add_option("--data", pred_data, "encoded dataset CSV")->required();
  predict->add_option("--vote", pred_vote, "soft|hard");
  predict->add_option("--out", pred_out, "predictions CSV path");

  std::vector<const char*> argv;
  argv.push_back("brforest");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());

    if (pre->parsed()) {
      CsvOptions opt;
      opt.delimiter = pre_delim.empty() ? ',' : pre_delim[0];
      if (!pre_markers.empty()) opt.missing_markers = split_list(pre_markers);
      std::set<std::string> hints;
      if (!pre_cats.empty())
        for (const auto& c : split_list(pre_cats)) hints.insert(c);
      RawTable raw = load_csv(pre_input, pre_target, hints, opt);
      if (!pre_name.empty()) raw.name = pre_name;
      save_named(preprocess(raw), pre_out, out);
      return 0;
    }
    if (synth->parsed()) {
      const std::uint64_t seed = env_seed().value_or(synth_seed);
      Dataset ds;
      if (synth_kind == "classification")
        ds = synth_classification(
            {synth_n, synth_features, synth_classes, synth_clusters, synth_sep, seed});
      else if (synth_kind == "waveform")
        ds = synth_waveform(synth_n, seed);
      else if (synth_kind == "twonorm")
        ds = synth_twonorm(synth_n, seed);
      else if (synth_kind == "threenorm")
        ds = synth_threenorm(synth_n, seed);
      else if (synth_kind == "ringnorm")
        ds = synth_ringnorm(synth_n, seed);
      else
        throw DataError("unknown synth kind '" + synth_kind + "'");
      if (!synth_name.empty()) ds.name = synth_name;
      save_named(ds, synth_out, out);
      return 0;
    }
    if (grid->parsed()) {
      ga.threads = threads;
      return cmd_grid(ga, out, err);
    }
    if (report->parsed()) return cmd_report(report_grids, report_out, report_per_config, out);
    if (meta->parsed()) {
      ma.threads = threads;
      return cmd_meta(ma, out);
    }
    if (fit->parsed())
      return cmd_fit(fit_manifest, fit_config, fit_br, fit_trees, fit_seed, fit_out, threads, out);
    if (predict->parsed())
      return cmd_predict(pred_model, pred_data, pred_vote, pred_out, threads, out);
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace brf
