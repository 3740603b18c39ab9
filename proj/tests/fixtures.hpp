#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "brforest/csv.hpp"
#include "brforest/experiment.hpp"

namespace fixtures {

inline std::string source_dir() { return BRF_SOURCE_DIR; }
inline std::string data_path(const std::string& file) { return source_dir() + "/data/" + file; }

// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() /
           ("brf_test_" + std::to_string(rd()) + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline std::string write_file(const TempDir& dir, const std::string& name,
                              const std::string& content) {
  const std::string p = dir.file(name);
  std::ofstream out(p);
  out << content;
  return p;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// The published per-dataset winner table shipped as a fixture
// (dataset, best_config, accuracy %, best_br, p_value).
inline std::vector<brf::WinnerReport> load_winner_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing fixture: " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<brf::WinnerReport> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = brf::split_csv_line(line);
    brf::WinnerReport w;
    w.dataset = f[0];
    w.best_config = f[1];
    w.mean_accuracy = brf::parse_double(f[2]) / 100.0;
    w.best_br = brf::parse_double(f[3]);
    w.max_p_value = brf::parse_double(f[4]);
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace fixtures
