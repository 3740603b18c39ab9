#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "brforest/data.hpp"
#include "brforest/forest.hpp"
#include "brforest/synth.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace brf;
using fixtures::TempDir;

TEST_CASE("load_csv typing and missing markers") {
  TempDir dir;
  const auto path = fixtures::write_file(dir, "t.csv",
                                         "a,b,class\n"
                                         "1.5,x,yes\n"
                                         "?,y,no\n"
                                         "2.0,x,yes\n"
                                         "3.5,z,no\n"
                                         "na,y,yes\n");
  const RawTable t = load_csv(path, "class");
  CHECK(t.columns.size() == 3);
  CHECK(t.n_rows() == 5);
  CHECK(t.target_column == 2);
  CHECK_FALSE(t.columns[0].categorical);  // all non-missing cells numeric
  CHECK(t.columns[1].categorical);
  CHECK(t.columns[0].missing == std::vector<std::uint8_t>{0, 1, 0, 0, 1});  // "?" and "na"
}

TEST_CASE("load_csv categorical hint and delimiter") {
  TempDir dir;
  const auto path = fixtures::write_file(dir, "t.csv", "code;v;class\n1;2.0;a\n2;3.0;b\n");
  CsvOptions opt;
  opt.delimiter = ';';
  const RawTable t = load_csv(path, "class", {"code"}, opt);
  CHECK(t.columns[0].categorical);
  CHECK_FALSE(t.columns[1].categorical);
}

TEST_CASE("load_csv error paths") {
  TempDir dir;
  SUBCASE("ragged row") {
    const auto path = fixtures::write_file(dir, "r.csv",
                                           "a,b,class\n1,2,x\n3,4,y\n5,6,x\n7,8\n9,10,y\n");
    CHECK_THROWS_WITH_AS(load_csv(path, "class"), doctest::Contains("ragged row 4"), DataError);
  }
  SUBCASE("missing target column") {
    const auto path = fixtures::write_file(dir, "m.csv", "a,b\n1,2\n");
    CHECK_THROWS_AS(load_csv(path, "class"), DataError);
  }
  SUBCASE("no such file") { CHECK_THROWS_AS(load_csv(dir.file("nope.csv"), "class"), DataError); }
  SUBCASE("rows with missing target are rejected at load") {
    const auto path = fixtures::write_file(dir, "x.csv", "a,class\n1,u\n2,?\n3,u\n4,v\n5,v\n");
    CHECK(load_csv(path, "class").n_rows() == 4);
  }
}

TEST_CASE("preprocess matches the published dataset characteristics") {
  struct Expect {
    const char* file;
    const char* name;
    int numeric, binary, n, c;
  };
  std::vector<Expect> table = {{"iris.csv", "Iris", 4, 0, 149, 3},
                               {"wine.csv", "Wine", 13, 0, 178, 3}};
  if (std::filesystem::exists(fixtures::data_path("sonar.csv")))
    table.push_back({"sonar.csv", "Sonar", 60, 0, 208, 2});

  for (const auto& e : table) {
    RawTable raw = load_csv(fixtures::data_path(e.file), "class");
    raw.name = e.name;
    const Dataset ds = preprocess(raw);
    int numeric = 0, binary = 0;
    for (auto k : ds.feature_kinds) (k == FeatureKind::Continuous ? numeric : binary)++;
    CHECK(numeric == e.numeric);
    CHECK(binary == e.binary);
    CHECK(ds.n_rows() == e.n);
    CHECK(ds.n_classes == e.c);
    // z-scored with population std
    for (Eigen::Index j = 0; j < ds.n_features(); ++j) {
      CHECK(std::fabs(ds.features.col(j).mean()) < 1e-9);
      const double var = ds.features.col(j).array().square().mean();
      CHECK(var == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK_NOTHROW(ds.validate());
  }
}

namespace {

RawColumn column(std::string name, bool categorical, std::vector<std::string> cells,
                 std::vector<std::uint8_t> missing = {}) {
  RawColumn c;
  c.name = std::move(name);
  c.categorical = categorical;
  c.cells = std::move(cells);
  c.missing = missing.empty() ? std::vector<std::uint8_t>(c.cells.size(), 0) : std::move(missing);
  return c;
}

}  // namespace

TEST_CASE("preprocess pipeline steps") {
  SUBCASE("constant column is dropped") {
    RawTable t;
    t.name = "const";
    t.columns = {column("k", true, {"x", "x", "x", "x"}),
                 column("v", false, {"1", "2", "3", "4"}),
                 column("class", true, {"a", "a", "b", "b"})};
    t.target_column = 2;
    const Dataset ds = preprocess(t);
    CHECK(ds.n_features() == 1);
    CHECK(ds.feature_names == std::vector<std::string>{"v"});
  }
  SUBCASE("duplicates removed, then singleton classes") {
    RawTable t;
    t.name = "dups";
    // the two 'c' rows are identical, so class c ends up a singleton and goes
    t.columns = {column("v", false, {"1", "1", "2", "3", "5", "5", "9"}),
                 column("class", true, {"a", "a", "a", "b", "c", "c", "b"})};
    t.target_column = 1;
    const Dataset ds = preprocess(t);
    CHECK(ds.n_rows() == 4);  // {1,a},{2,a},{3,b},{9,b}
    CHECK(ds.n_classes == 2);
  }
  SUBCASE("categorical missing becomes its own category") {
    RawTable t;
    t.name = "cat";
    t.columns = {column("g", true, {"u", "v", "u", "v"}, {0, 1, 0, 0}),
                 column("class", true, {"a", "a", "b", "b"})};
    t.target_column = 1;
    const Dataset ds = preprocess(t);
    // categories: __missing__, u, v -> 3 one-hot binary columns
    CHECK(ds.n_features() == 3);
    CHECK(ds.feature_names ==
          std::vector<std::string>{"g=__missing__", "g=u", "g=v"});
    for (auto k : ds.feature_kinds) CHECK(k == FeatureKind::Binary);
  }
  SUBCASE("numerical missing imputed with the column mean") {
    RawTable t;
    t.name = "imp";
    t.columns = {column("v", false, {"1", "", "2", "9"}, {0, 1, 0, 0}),
                 column("w", false, {"0", "1", "0", "1"}),
                 column("class", true, {"a", "a", "b", "b"})};
    t.target_column = 2;
    const Dataset ds = preprocess(t);
    // mean of {1,2,9} = 4; the imputed cell z-scores to (4-4)/sd = 0
    CHECK(ds.features(1, 0) == doctest::Approx(0.0));
  }
  SUBCASE("labels ordered by sorted original representation") {
    RawTable t;
    t.name = "lbl";
    t.columns = {column("v", false, {"1", "2", "3", "4"}),
                 column("class", true, {"zebra", "ant", "zebra", "ant"})};
    t.target_column = 1;
    const Dataset ds = preprocess(t);
    CHECK(ds.labels == std::vector<int>{1, 0, 1, 0});
  }
  SUBCASE("degenerate after preprocessing") {
    RawTable t;
    t.name = "degen";
    t.columns = {column("v", false, {"1", "2", "3"}),
                 column("class", true, {"a", "b", "c"})};  // all singletons
    t.target_column = 1;
    CHECK_THROWS_WITH_AS(preprocess(t), doctest::Contains("degenerate"), DataError);
  }
}

TEST_CASE("preprocess invariants hold on fuzzed tables") {
  Rng rng(4711);
  int produced = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 4 + static_cast<int>(rng.below(30));
    const int d = 1 + static_cast<int>(rng.below(4));
    RawTable t;
    t.name = "fuzz";
    for (int j = 0; j < d; ++j) {
      const bool cat = rng.below(2) == 0;
      RawColumn col;
      col.name = "c" + std::to_string(j);
      col.categorical = cat;
      for (int i = 0; i < n; ++i) {
        const bool miss = rng.below(8) == 0;
        col.missing.push_back(miss ? 1 : 0);
        col.cells.push_back(miss ? "" : cat ? std::string(1, static_cast<char>('p' + rng.below(3)))
                                            : std::to_string(rng.below(5)));
      }
      t.columns.push_back(std::move(col));
    }
    RawColumn target;
    target.name = "class";
    target.categorical = true;
    for (int i = 0; i < n; ++i) {
      target.missing.push_back(0);
      target.cells.push_back(std::string(1, static_cast<char>('a' + rng.below(3))));
    }
    t.columns.push_back(std::move(target));
    t.target_column = static_cast<std::size_t>(d);

    try {
      const Dataset ds = preprocess(t);
      CHECK_NOTHROW(ds.validate());
      ++produced;
    } catch (const DataError&) {
      // degenerate draws are allowed to fail; invariants only bind on success
    }
  }
  CHECK(produced > 20);
}

TEST_CASE("stratified_two_fold splits classes evenly") {
  SUBCASE("even counts 4 and 6") {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 10; ++i) {
      rows.push_back({static_cast<double>(i)});
      labels.push_back(i < 4 ? 0 : 1);
    }
    const auto ds = oracle::make_dataset(rows, labels, 2);
    const auto fa = stratified_two_fold(ds, 0, 1);
    int c0f0 = 0, c1f0 = 0;
    for (int i = 0; i < 10; ++i)
      if (fa.fold_id[static_cast<std::size_t>(i)] == 0) (i < 4 ? c0f0 : c1f0)++;
    CHECK(c0f0 == 2);
    CHECK(c1f0 == 3);
  }
  SUBCASE("odd counts 5 and 3") {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 8; ++i) {
      rows.push_back({static_cast<double>(i)});
      labels.push_back(i < 5 ? 0 : 1);
    }
    const auto ds = oracle::make_dataset(rows, labels, 2);
    const auto fa = stratified_two_fold(ds, 3, 9);
    int c0[2] = {0, 0}, c1[2] = {0, 0};
    for (int i = 0; i < 8; ++i)
      (i < 5 ? c0 : c1)[fa.fold_id[static_cast<std::size_t>(i)]]++;
    CHECK(std::abs(c0[0] - c0[1]) == 1);
    CHECK(std::abs(c1[0] - c1[1]) == 1);
  }
  SUBCASE("deterministic per (seed, repeat) and varying across repeats") {
    const auto ds = synth_classification({40, 2, 2, 1, 1.0, 5});
    const auto a = stratified_two_fold(ds, 7, 123);
    const auto b = stratified_two_fold(ds, 7, 123);
    CHECK(a.fold_id == b.fold_id);
    const auto c = stratified_two_fold(ds, 8, 123);
    CHECK(a.fold_id != c.fold_id);
  }
  SUBCASE("fuzzed class balance") {
    Rng rng(31);
    for (int trial = 0; trial < 25; ++trial) {
      const int c = 2 + static_cast<int>(rng.below(4));
      std::vector<std::vector<double>> rows;
      std::vector<int> labels;
      for (int cls = 0; cls < c; ++cls) {
        const int m = 2 + static_cast<int>(rng.below(9));
        for (int i = 0; i < m; ++i) {
          rows.push_back({rng.normal()});
          labels.push_back(cls);
        }
      }
      const auto ds = oracle::make_dataset(rows, labels, c);
      const auto fa = stratified_two_fold(ds, trial, 77);
      std::vector<int> per_class_fold0(static_cast<std::size_t>(c), 0),
          per_class(static_cast<std::size_t>(c), 0);
      int fold0 = 0;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        per_class[static_cast<std::size_t>(labels[i])]++;
        if (fa.fold_id[i] == 0) {
          per_class_fold0[static_cast<std::size_t>(labels[i])]++;
          ++fold0;
        }
      }
      CHECK(fold0 > 0);
      CHECK(fold0 < static_cast<int>(labels.size()));
      for (int cls = 0; cls < c; ++cls) {
        const int f0 = per_class_fold0[static_cast<std::size_t>(cls)];
        const int f1 = per_class[static_cast<std::size_t>(cls)] - f0;
        CHECK(std::abs(f0 - f1) <= 1);
      }
    }
  }
}

TEST_CASE("synth_classification") {
  SUBCASE("balanced two-class problem") {
    const auto ds = synth_classification({300, 2, 2, 1, 2.0, 1});
    CHECK(ds.n_rows() == 300);
    CHECK(ds.n_features() == 2);
    const auto counts = ds.class_counts();
    CHECK(counts[0] == 150);
    CHECK(counts[1] == 150);
    CHECK_NOTHROW(ds.validate());
  }
  SUBCASE("huge separation is learned perfectly on resubstitution") {
    const auto ds = synth_classification({60, 2, 2, 1, 100.0, 3});
    ForestConfig cfg;
    cfg.n_trees = 25;
    cfg.seed = 11;
    const auto rf = fit_forest(ds, cfg);
    const auto pred = predict_labels(rf, ds.features);
    CHECK(pred == ds.labels);
  }
  SUBCASE("zero separation is unlearnable") {
    const auto ds = synth_classification({80, 2, 2, 1, 0.0, 3});
    const auto fa = stratified_two_fold(ds, 0, 1);
    std::vector<int> train_rows, test_rows;
    for (std::size_t i = 0; i < fa.fold_id.size(); ++i)
      (fa.fold_id[i] == 0 ? train_rows : test_rows).push_back(static_cast<int>(i));
    Dataset train = ds, test = ds;
    // crude split by row copy
    const auto take = [&](const std::vector<int>& rows) {
      Dataset out = ds;
      out.features.resize(static_cast<Eigen::Index>(rows.size()), ds.n_features());
      out.labels.clear();
      for (std::size_t i = 0; i < rows.size(); ++i) {
        out.features.row(static_cast<Eigen::Index>(i)) = ds.features.row(rows[i]);
        out.labels.push_back(ds.labels[static_cast<std::size_t>(rows[i])]);
      }
      return out;
    };
    train = take(train_rows);
    test = take(test_rows);
    ForestConfig cfg;
    cfg.n_trees = 25;
    cfg.seed = 2;
    const auto rf = fit_forest(train, cfg);
    const auto pred = predict_labels(rf, test.features);
    int correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
      correct += pred[i] == test.labels[i] ? 1 : 0;
    const double acc = static_cast<double>(correct) / static_cast<double>(pred.size());
    CHECK(acc > 0.2);
    CHECK(acc < 0.8);
  }
  SUBCASE("cluster means approach their vertices") {
    const int m = 500;
    const auto ds = synth_classification({2 * m, 3, 2, 1, 2.0, 17});
    // rows are emitted cluster by cluster
    for (int cluster = 0; cluster < 2; ++cluster) {
      const auto block = ds.features.middleRows(cluster * m, m);
      for (Eigen::Index j = 0; j < 3; ++j) {
        const double mean = block.col(j).mean();
        CHECK(std::fabs(std::fabs(mean) - 2.0) < 4.0 / std::sqrt(static_cast<double>(m)));
      }
    }
  }
  SUBCASE("label balance within clusters-per-class") {
    const auto ds = synth_classification({101, 4, 3, 2, 1.0, 9});
    const auto counts = ds.class_counts();
    const int lo = *std::min_element(counts.begin(), counts.end());
    const int hi = *std::max_element(counts.begin(), counts.end());
    CHECK(hi - lo <= 2);
  }
  SUBCASE("too many clusters for the hypercube") {
    CHECK_THROWS_AS(synth_classification({100, 2, 5, 1, 1.0, 0}), DataError);
  }
}

TEST_CASE("breiman-style generators") {
  const auto wf = synth_waveform(300, 1);
  CHECK(wf.n_rows() == 300);
  CHECK(wf.n_features() == 21);
  CHECK(wf.n_classes == 3);
  CHECK(wf.class_counts() == std::vector<int>{100, 100, 100});
  CHECK_NOTHROW(wf.validate());

  CHECK(synth_twonorm(200, 2).n_features() == 20);
  CHECK(synth_threenorm(200, 2).n_features() == 20);
  CHECK(synth_ringnorm(200, 2).n_features() == 20);
}

TEST_CASE("neighborhood_scale") {
  SUBCASE("binary column maps to -1/+1") {
    Dataset ds = oracle::make_dataset({{0, 3}, {1, 5}, {0, 7}, {1, 9}}, {0, 0, 1, 1}, 2);
    ds.feature_kinds[0] = FeatureKind::Binary;
    const Dataset s = neighborhood_scale(ds);
    CHECK(s.features.col(0).minCoeff() == -1.0);
    CHECK(s.features.col(0).maxCoeff() == 1.0);
    CHECK(s.features(0, 0) == -1.0);  // lower original value
    CHECK(s.features(1, 0) == 1.0);
    // continuous column z-scored
    CHECK(std::fabs(s.features.col(1).mean()) < 1e-12);
  }
  SUBCASE("z-score example: mean 10, std 2, value 12 -> 1") {
    // column {12, 12, 8, 8} has mean 10 and population std 2
    Dataset ds = oracle::make_dataset({{12.0}, {12.0}, {8.0}, {8.0}}, {0, 0, 1, 1}, 2);
    ds.feature_kinds[0] = FeatureKind::Continuous;
    const Dataset s = neighborhood_scale(ds);
    CHECK(s.features(0, 0) == doctest::Approx(1.0));
    CHECK(s.features(2, 0) == doctest::Approx(-1.0));
  }
  SUBCASE("idempotent") {
    Dataset ds = oracle::make_dataset({{0, 3.5}, {1, 5.0}, {0, 7.25}, {1, 9.0}}, {0, 0, 1, 1}, 2);
    ds.feature_kinds[0] = FeatureKind::Binary;
    const Dataset once = neighborhood_scale(ds);
    const Dataset twice = neighborhood_scale(once);
    CHECK((once.features - twice.features).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("binary kind with three values errors") {
    Dataset ds = oracle::make_dataset({{0}, {1}, {2}, {1}}, {0, 0, 1, 1}, 2);
    ds.feature_kinds[0] = FeatureKind::Binary;
    CHECK_THROWS_AS(neighborhood_scale(ds), DataError);
  }
}

TEST_CASE("dataset manifest round trip") {
  TempDir dir;
  RawTable raw = load_csv(fixtures::data_path("iris.csv"), "class");
  raw.name = "Iris";
  const Dataset ds = preprocess(raw);
  save_dataset(ds, dir.file("Iris.manifest.json"), dir.file("Iris.csv"));
  const Dataset back = load_dataset(dir.file("Iris.manifest.json"), dir.file("Iris.csv"));
  CHECK(back.name == ds.name);
  CHECK(back.n_classes == ds.n_classes);
  CHECK(back.labels == ds.labels);
  CHECK(back.feature_kinds == ds.feature_kinds);
  CHECK((back.features - ds.features).cwiseAbs().maxCoeff() == 0.0);  // exact round trip
  CHECK(matrix_path_for(dir.file("Iris.manifest.json")) == dir.file("Iris.csv"));
}
