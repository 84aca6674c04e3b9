#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "cgx/data.hpp"
#include "cgx/errors.hpp"
#include "doctest.h"

using namespace cgx;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << body;
  return path.string();
}

}  // namespace

TEST_CASE("csv labels are remapped to 0/1") {
  const auto path = write_temp("cgx_small.csv", "a,b,y\n1,2,no\n3,4,yes\n5,6,no\n");
  const Dataset ds = load_csv(path, "y");
  CHECK(ds.n_samples() == 3);
  CHECK(ds.n_features() == 2);
  CHECK(ds.labels == Labels{0, 1, 0});
  CHECK(ds.class_names == std::vector<std::string>{"no", "yes"});
  CHECK(ds.features(1, 0) == 3.0);
}

TEST_CASE("csv with a NaN cell names the cell") {
  const auto path = write_temp("cgx_nan.csv", "a,b,y\n1,2,no\n3,nan,yes\n");
  try {
    load_csv(path, "y");
    FAIL("expected an ingestion error");
  } catch (const IngestionError& e) {
    CHECK(std::string(e.what()).find("'b'") != std::string::npos);
  }
}

TEST_CASE("csv errors") {
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", "y"), SchemaError);
  const auto three = write_temp("cgx_three.csv", "a,y\n1,x\n2,y\n3,z\n");
  CHECK_THROWS_AS(load_csv(three, "y"), UnsupportedTaskError);
  const auto missing = write_temp("cgx_missing.csv", "a,b\n1,2\n");
  CHECK_THROWS_AS(load_csv(missing, "y"), SchemaError);
}

TEST_CASE("categorical columns get equality literals") {
  const auto path = write_temp("cgx_cat.csv", "c,y\nred,0\nblue,1\nred,1\ngreen,0\n");
  CsvOptions opts;
  opts.schema["c"] = FeatureKind::kCategorical;
  const Dataset ds = load_csv(path, "y", opts);
  REQUIRE(ds.feature_kinds[0] == FeatureKind::kCategorical);
  const BinarizedDataset b = binarize(ds);
  CHECK(b.n_literals() == 3);
  for (const auto& lit : b.catalog.literals) CHECK(lit.op == Op::kEqual);
}

TEST_CASE("xor generator truth table and shape") {
  const Dataset ds = generate_xor(1000, 10, 42);
  CHECK(ds.n_samples() == 1000);
  CHECK(ds.n_features() == 10);
  for (std::size_t i = 0; i < ds.n_samples(); ++i) {
    const int a = ds.features(i, 0) > 0.5 ? 1 : 0;
    const int b = ds.features(i, 1) > 0.5 ? 1 : 0;
    CHECK(ds.labels[i] == (a ^ b));
  }
  CHECK_THROWS_AS(generate_xor(10, 1, 0), ParameterError);
  CHECK_THROWS_AS(generate_xor(10, 2, 0, {0.0, true}), ParameterError);
}

TEST_CASE("xor label noise flips the requested share") {
  const Dataset clean = generate_xor(1000, 3, 5);
  const Dataset noisy = generate_xor(1000, 3, 5, {0.15, false});
  std::size_t flips = 0;
  for (std::size_t i = 0; i < 1000; ++i) flips += clean.labels[i] != noisy.labels[i] ? 1 : 0;
  CHECK(flips == 150);
}

TEST_CASE("ten samples in five folds") {
  Labels y = {0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  const auto splits = split_folds(y, 5, 3);
  REQUIRE(splits.size() == 5);
  std::set<std::size_t> seen;
  for (const auto& s : splits) {
    CHECK(s.test_indices.size() == 2);
    CHECK(s.train_indices.size() == 8);
    for (auto i : s.test_indices) CHECK(seen.insert(i).second);
    std::set<std::size_t> train(s.train_indices.begin(), s.train_indices.end());
    for (auto i : s.test_indices) CHECK(train.count(i) == 0);
  }
  CHECK(seen.size() == 10);
  const auto again = split_folds(y, 5, 3);
  for (std::size_t f = 0; f < 5; ++f) CHECK(again[f].test_indices == splits[f].test_indices);
}

TEST_CASE("folds keep an 80/20 class balance") {
  Labels y(100, 0);
  for (std::size_t i = 0; i < 100; i += 5) y[i] = 1;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (const auto& s : split_folds(y, 5, seed)) {
      std::size_t ones = 0;
      for (auto i : s.test_indices) ones += static_cast<std::size_t>(y[i]);
      CHECK(s.test_indices.size() == 20);
      CHECK(ones >= 3);
      CHECK(ones <= 5);
    }
  }
  // uneven class counts
  Labels z(23, 0);
  for (std::size_t i = 0; i < 7; ++i) z[i] = 1;
  for (const auto& s : split_folds(z, 4, 9)) {
    std::size_t ones = 0;
    for (auto i : s.test_indices) ones += static_cast<std::size_t>(z[i]);
    CHECK(ones >= 1);
    CHECK(ones <= 2);
  }
}

TEST_CASE("median threshold and bits") {
  const std::vector<double> v = {1, 2, 3, 4};
  CHECK(quantile_thresholds(v, 1) == std::vector<double>{2.5});
  Matrix X(4, 1);
  for (std::size_t i = 0; i < 4; ++i) X(i, 0) = v[i];
  const std::vector<FeatureKind> kinds = {FeatureKind::kContinuous};
  const BinarizedDataset b = binarize(X, kinds, 1);
  REQUIRE(b.n_literals() == 2);
  CHECK(b.catalog.literals[0].op == Op::kLessEqual);
  CHECK(b.catalog.literals[1].op == Op::kGreater);
  CHECK(b.bit(2, 0) == false);
  CHECK(b.bit(2, 1) == true);
}

TEST_CASE("constant feature yields no literals") {
  Matrix X(3, 2);
  for (std::size_t i = 0; i < 3; ++i) {
    X(i, 0) = 5.0;
    X(i, 1) = static_cast<double>(i);
  }
  const std::vector<FeatureKind> kinds(2, FeatureKind::kContinuous);
  const BinarizedDataset b = binarize(X, kinds, 3);
  for (const auto& lit : b.catalog.literals) CHECK(lit.feature == 1);
  CHECK(b.catalog.constant_features == std::vector<std::size_t>{0});
}

TEST_CASE("xor deciles") {
  const Dataset ds = generate_xor(1000, 10, 42);
  const auto col = ds.features.column(0);
  const auto t = quantile_thresholds(col, 9);
  REQUIRE(t.size() == 9);
  // Empirical deciles of a U[0,1] sample of 1000 sit within a few hundredths.
  for (std::size_t j = 0; j < 9; ++j) CHECK(std::abs(t[j] - 0.1 * static_cast<double>(j + 1)) < 0.05);
  double nearest = t[0];
  for (double v : t) {
    if (std::abs(v - 0.5) < std::abs(nearest - 0.5)) nearest = v;
  }
  CHECK(std::abs(nearest - 0.5) <= 0.05);
}

TEST_CASE("catalog invariants") {
  const Dataset ds = generate_xor(300, 4, 8);
  const BinarizedDataset b = binarize(ds, 5);
  const auto& lits = b.catalog.literals;
  for (std::size_t j = 1; j < lits.size(); ++j) CHECK(lits[j - 1] < lits[j]);
  // paired literals are complementary
  for (std::size_t j = 0; j < lits.size(); ++j) {
    if (lits[j].op != Op::kLessEqual) continue;
    for (std::size_t k = 0; k < lits.size(); ++k) {
      if (lits[k].op == Op::kGreater && lits[k].feature == lits[j].feature &&
          lits[k].threshold == lits[j].threshold) {
        for (std::size_t i = 0; i < b.n_samples; ++i) CHECK(b.bit(i, j) != b.bit(i, k));
      }
    }
  }
  for (std::size_t i = 0; i < b.n_samples; ++i) {
    for (std::size_t j = 0; j < lits.size(); ++j) {
      CHECK(b.bit(i, j) == lits[j].holds(ds.features(i, lits[j].feature)));
    }
  }
}

TEST_CASE("dataset validation") {
  Dataset ds = generate_xor(10, 2, 1);
  ds.labels[0] = 2;
  CHECK_THROWS_AS(ds.validate(), ParameterError);
  ds = generate_xor(10, 2, 1);
  ds.features(3, 1) = std::nan("");
  CHECK_THROWS_AS(ds.validate(), IngestionError);
}
