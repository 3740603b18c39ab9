#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "brforest/cli.hpp"
#include "fixtures.hpp"

using fixtures::TempDir;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = brf::cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
  std::size_t n = 0, pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    ++n;
    pos += needle.size();
  }
  return n;
}

}  // namespace

TEST_CASE("cli preprocess prints the characteristics summary") {
  TempDir dir;
  const auto r = run({"preprocess", "--input", fixtures::data_path("iris.csv"), "--target",
                      "class", "--name", "Iris", "--out-dir", dir.file("ds")});
  CHECK(r.code == 0);
  CHECK(r.out == "Iris 4 0 149 3\n");
  CHECK(fs::exists(dir.file("ds/Iris.manifest.json")));
  CHECK(fs::exists(dir.file("ds/Iris.csv")));
}

TEST_CASE("cli preprocess reports reduced N on duplicate-heavy input") {
  TempDir dir;
  fixtures::write_file(dir, "dup.csv",
                       "a,b,class\n1,2,x\n1,2,x\n1,2,x\n3,4,y\n5,6,y\n7,8,x\n");
  const auto r = run({"preprocess", "--input", dir.file("dup.csv"), "--target", "class",
                      "--out-dir", dir.file("ds")});
  CHECK(r.code == 0);
  CHECK(r.out == "dup 2 0 4 2\n");
}

TEST_CASE("cli exit codes") {
  TempDir dir;
  SUBCASE("usage error is 1") {
    CHECK(run({"preprocess"}).code == 1);              // missing required --input
    CHECK(run({"no-such-command"}).code == 1);
    CHECK(run({}).code == 1);                          // a subcommand is required
  }
  SUBCASE("data error is 2") {
    CHECK(run({"preprocess", "--input", dir.file("absent.csv"), "--target", "class"}).code == 2);
    fixtures::write_file(dir, "bad.csv", "a,class\n1,x\n2,y\n");
    CHECK(run({"preprocess", "--input", dir.file("bad.csv"), "--target", "class", "--out-dir",
               dir.file("ds")})
              .code == 2);  // singleton classes -> degenerate
  }
  SUBCASE("help is 0") { CHECK(run({"--help"}).code == 0); }
}

TEST_CASE("cli synth") {
  TempDir dir;
  const auto r = run({"synth", "--kind", "classification", "--n", "300", "--features", "2",
                      "--classes", "2", "--clusters", "1", "--class-sep", "2", "--seed", "1",
                      "--name", "blob", "--out-dir", dir.file("ds")});
  CHECK(r.code == 0);
  CHECK(r.out == "blob 2 0 300 2\n");
  CHECK(run({"synth", "--kind", "bogus", "--out-dir", dir.file("ds")}).code == 2);
}

namespace {

// a small but non-trivial grid shared by the cli tests
std::vector<std::string> grid_args(const TempDir& dir, const std::string& manifest,
                                   const std::string& out, int threads) {
  return {"--threads", std::to_string(threads),
          "grid",      "--manifest",
          manifest,    "--out",
          dir.file(out), "--configs",
          "RF(base),RF(nf_all)", "--br",
          "0.4,1.0,3.0", "--repeats",
          "3",         "--seed",
          "21"};
}

std::string make_dataset(const TempDir& dir) {
  const auto r = run({"synth", "--kind", "classification", "--n", "48", "--features", "3",
                      "--classes", "2", "--class-sep", "1.2", "--seed", "5", "--name", "blob",
                      "--out-dir", dir.file("ds")});
  REQUIRE(r.code == 0);
  return dir.file("ds/blob.manifest.json");
}

}  // namespace

TEST_CASE("cli grid: resume is a no-op and output is thread-count independent") {
  TempDir dir;
  const auto manifest = make_dataset(dir);

  auto r1 = run(grid_args(dir, manifest, "a.grid.csv", 1));
  CHECK(r1.code == 0);
  CHECK(r1.out.find("36 new cells") != std::string::npos);

  // rerun: everything already present
  auto r2 = run(grid_args(dir, manifest, "a.grid.csv", 1));
  CHECK(r2.code == 0);
  CHECK(r2.out.find("0 new cells") != std::string::npos);

  // fresh run with more threads: byte-identical file
  auto r3 = run(grid_args(dir, manifest, "b.grid.csv", 2));
  CHECK(r3.code == 0);
  CHECK(fixtures::read_file(dir.file("a.grid.csv")) == fixtures::read_file(dir.file("b.grid.csv")));
}

TEST_CASE("cli grid: conflicting results demand --force") {
  TempDir dir;
  const auto manifest = make_dataset(dir);
  REQUIRE(run(grid_args(dir, manifest, "g.grid.csv", 2)).code == 0);

  // corrupt one value; same key now maps to two different accuracies
  auto text = fixtures::read_file(dir.file("g.grid.csv"));
  const auto first_row = text.find('\n') + 1;
  const auto line = text.substr(first_row, text.find('\n', first_row) - first_row);
  fixtures::write_file(dir, "g.grid.csv",
                       text + line.substr(0, line.rfind(',')) + ",0.000001\n");

  const auto blocked = run(grid_args(dir, manifest, "g.grid.csv", 2));
  CHECK(blocked.code == 2);
  CHECK(blocked.err.find("--force") != std::string::npos);

  auto forced = grid_args(dir, manifest, "g.grid.csv", 2);
  forced.push_back("--force");
  CHECK(run(forced).code == 0);
}

TEST_CASE("cli grid: partial file is completed in place") {
  TempDir dir;
  const auto manifest = make_dataset(dir);
  REQUIRE(run(grid_args(dir, manifest, "full.grid.csv", 1)).code == 0);
  const auto full = fixtures::read_file(dir.file("full.grid.csv"));

  // keep the header and first 10 rows, then resume
  std::istringstream in(full);
  std::string line, partial;
  for (int i = 0; i < 11 && std::getline(in, line); ++i) partial += line + "\n";
  fixtures::write_file(dir, "part.grid.csv", partial);

  const auto r = run(grid_args(dir, manifest, "part.grid.csv", 2));
  CHECK(r.code == 0);
  CHECK(r.out.find("26 new cells") != std::string::npos);
  CHECK(fixtures::read_file(dir.file("part.grid.csv")) == full);
}

TEST_CASE("cli grid warns above BR 10") {
  TempDir dir;
  const auto manifest = make_dataset(dir);
  auto args = grid_args(dir, manifest, "w.grid.csv", 2);
  for (auto& a : args)
    if (a == "0.4,1.0,3.0") a = "1.0,12.0";
  const auto r = run(args);
  CHECK(r.code == 0);
  CHECK(r.err.find("above 10") != std::string::npos);
}

TEST_CASE("cli grid respects BRFOREST_SEED") {
  TempDir dir;
  const auto manifest = make_dataset(dir);
  REQUIRE(run(grid_args(dir, manifest, "s21.grid.csv", 2)).code == 0);

  setenv("BRFOREST_SEED", "909", 1);
  const auto r = run(grid_args(dir, manifest, "s909.grid.csv", 2));
  unsetenv("BRFOREST_SEED");
  REQUIRE(r.code == 0);
  CHECK(fixtures::read_file(dir.file("s21.grid.csv")) !=
        fixtures::read_file(dir.file("s909.grid.csv")));
}

TEST_CASE("cli report produces winners, histogram and svg curves") {
  TempDir dir;
  const auto manifest = make_dataset(dir);
  REQUIRE(run(grid_args(dir, manifest, "r.grid.csv", 2)).code == 0);

  const auto r = run({"report", "--grid", dir.file("r.grid.csv"), "--out-dir", dir.file("rep"),
                      "--per-config"});
  CHECK(r.code == 0);

  const auto winners = fixtures::read_file(dir.file("rep/winners.csv"));
  CHECK(count_occurrences(winners, "\n") == 2);  // header + one dataset
  CHECK(winners.find("blob") != std::string::npos);

  const auto hist = fixtures::read_file(dir.file("rep/histogram.csv"));
  CHECK(hist.find("ALL,") != std::string::npos);

  const auto svg = fixtures::read_file(dir.file("rep/blob.curves.svg"));
  CHECK(count_occurrences(svg, "<polyline") == 2);  // one per config
  CHECK(svg.find("bootstrap rate") != std::string::npos);
  CHECK(svg.find("accuracy") != std::string::npos);

  const auto curves = fixtures::read_file(dir.file("rep/blob.curves.csv"));
  CHECK(count_occurrences(curves, "\n") == 1 + 2 * 3);  // header + configs x brs
}

TEST_CASE("cli meta end to end on synthetic datasets") {
  TempDir dir;
  // four separable datasets and four noise datasets give both regimes a
  // plausible chance; what matters here is the plumbing, counts and formats
  std::vector<std::string> grid_files;
  for (int i = 0; i < 4; ++i) {
    const std::string name = "d" + std::to_string(i);
    const double sep = i < 2 ? 8.0 : 0.3;
    REQUIRE(run({"synth", "--kind", "classification", "--n", "40", "--features", "2",
                 "--class-sep", std::to_string(sep), "--seed", std::to_string(100 + i), "--name",
                 name, "--out-dir", dir.file("ds")})
                .code == 0);
    REQUIRE(run({"--threads", "2", "grid", "--manifest", dir.file("ds/" + name + ".manifest.json"),
                 "--out", dir.file(name + ".grid.csv"), "--configs", "RF(base)", "--br",
                 "0.4,1.0,2.0", "--repeats", "2", "--seed", "3"})
                .code == 0);
    grid_files.push_back(dir.file(name + ".grid.csv"));
  }

  std::vector<std::string> args = {"--threads", "2", "meta", "--data-dir", dir.file("ds"),
                                   "--out-dir", dir.file("meta"), "--pool", "base",
                                   "--configs", "RF(base)", "--br", "1.0", "--k", "2",
                                   "--seed", "9"};
  for (const auto& g : grid_files) {
    args.push_back("--grid");
    args.push_back(g);
  }
  const auto r = run(args);
  if (r.code == 0) {
    CHECK(r.out.find("regime labels: 4 datasets") != std::string::npos);
    const auto corr = fixtures::read_file(dir.file("meta/correlations.csv"));
    CHECK(count_occurrences(corr, "\n") == 66);  // header + 65 base features
    const auto kl = fixtures::read_file(dir.file("meta/kl.csv"));
    CHECK(count_occurrences(kl, "\n") == 5);  // header + 4 datasets
    CHECK(fs::exists(dir.file("meta/meta_report.csv")));
    CHECK(r.out.find("best meta cell") != std::string::npos);
  } else {
    // a single-regime outcome is data-dependent and reported as a data error
    CHECK(r.code == 2);
    CHECK(r.err.find("regime") != std::string::npos);
  }
}

TEST_CASE("cli meta with --skip-evaluate writes statistics only") {
  TempDir dir;
  for (int i = 0; i < 3; ++i) {
    const std::string name = "s" + std::to_string(i);
    REQUIRE(run({"synth", "--n", "30", "--class-sep", "1.0", "--seed", std::to_string(i),
                 "--name", name, "--out-dir", dir.file("ds")})
                .code == 0);
    REQUIRE(run({"--threads", "2", "grid", "--manifest", dir.file("ds/" + name + ".manifest.json"),
                 "--out", dir.file(name + ".grid.csv"), "--configs", "RF(base)", "--br",
                 "0.5,2.0", "--repeats", "2", "--seed", "3"})
                .code == 0);
  }
  const auto r = run({"meta", "--grid", dir.file("s0.grid.csv"), "--grid", dir.file("s1.grid.csv"),
                      "--grid", dir.file("s2.grid.csv"), "--data-dir", dir.file("ds"), "--out-dir",
                      dir.file("meta"), "--pool", "base", "--skip-evaluate"});
  CHECK(r.code == 0);
  CHECK(fs::exists(dir.file("meta/kl.csv")));
  CHECK(fs::exists(dir.file("meta/correlations.csv")));
  CHECK_FALSE(fs::exists(dir.file("meta/meta_report.csv")));
}

TEST_CASE("cli fit and predict round trip") {
  TempDir dir;
  const auto manifest = make_dataset(dir);
  const auto fit = run({"--threads", "2", "fit", "--manifest", manifest, "--config", "RF(base)",
                        "--br", "1.2", "--trees", "40", "--seed", "17", "--out",
                        dir.file("model.json")});
  CHECK(fit.code == 0);
  CHECK(fit.out.find("BR=1.2") != std::string::npos);

  const auto pred = run({"predict", "--model", dir.file("model.json"), "--data",
                         dir.file("ds/blob.csv"), "--out", dir.file("pred.csv")});
  CHECK(pred.code == 0);
  CHECK(pred.out.find("accuracy:") != std::string::npos);
  const auto lines = fixtures::read_file(dir.file("pred.csv"));
  CHECK(count_occurrences(lines, "\n") == 49);  // header + 48 rows
  CHECK(lines.find("row,label,p0,p1") == 0);

  const auto hard = run({"predict", "--model", dir.file("model.json"), "--data",
                         dir.file("ds/blob.csv"), "--vote", "hard", "--out",
                         dir.file("pred_hard.csv")});
  CHECK(hard.code == 0);
}

TEST_CASE("cli grid --run manifest drives multiple datasets") {
  TempDir dir;
  make_dataset(dir);
  REQUIRE(run({"synth", "--kind", "waveform", "--n", "60", "--seed", "4", "--name", "wave",
               "--out-dir", dir.file("ds")})
              .code == 0);
  fixtures::write_file(dir, "run.json", std::string("{\n") +
                                            "  \"datasets\": [\"" + dir.file("ds/blob.manifest.json") +
                                            "\", \"" + dir.file("ds/wave.manifest.json") + "\"],\n" +
                                            "  \"output_dir\": \"" + dir.file("grids") + "\",\n" +
                                            "  \"scale\": \"desk\",\n" +
                                            "  \"grid\": {\"configs\": [\"RF(base)\"], " +
                                            "\"br_values\": [0.5, 2.0], \"repeats\": 2, \"seed\": 6}\n" +
                                            "}\n");
  const auto r = run({"--threads", "2", "grid", "--run", dir.file("run.json")});
  CHECK(r.code == 0);
  CHECK(fs::exists(dir.file("grids/blob.grid.csv")));
  CHECK(fs::exists(dir.file("grids/wave.grid.csv")));
}
