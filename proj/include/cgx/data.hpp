#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cgx/bitvector.hpp"
#include "cgx/literal.hpp"

namespace cgx {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::vector<double> column(std::size_t c) const;

  std::span<const double> values() const { return data_; }
  std::span<double> values() { return data_; }

  // Rows picked by index, in the given order.
  Matrix select_rows(std::span<const std::size_t> indices) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class FeatureKind : std::uint8_t { kContinuous, kCategorical };

using Labels = std::vector<int>;

struct Dataset {
  Matrix features;
  Labels labels;
  std::vector<std::string> feature_names;
  std::vector<FeatureKind> feature_kinds;
  // Per categorical feature: category names indexed by category id.
  std::vector<std::vector<std::string>> categories;
  // Original label strings for class 0 and 1 (empty for generated data).
  std::vector<std::string> class_names;

  std::size_t n_samples() const { return features.rows(); }
  std::size_t n_features() const { return features.cols(); }

  Dataset subset(std::span<const std::size_t> indices) const;
  // Throws if labels are not {0,1}, lengths differ, or a value is non-finite.
  void validate() const;
};

struct CsvOptions {
  char delimiter = ',';
  // Columns not listed here are continuous.
  std::map<std::string, FeatureKind> schema;
};

Dataset load_csv(const std::string& path, const std::string& label_column,
                 const CsvOptions& options = {});

struct XorOptions {
  // Fraction of labels flipped after generation.
  double label_noise = 0.0;
  // Also XOR in round(x3); requires dims >= 3.
  bool third_feature = false;
};

// x ~ U[0,1]^dims, y = round(x1) xor round(x2) (xor round(x3) when enabled).
Dataset generate_xor(std::size_t n_samples, std::size_t dims, std::uint64_t seed,
                     const XorOptions& options = {});

struct FoldSplit {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::uint64_t seed = 0;
};

// Stratified k-fold split; fold j's test set is the j-th of k disjoint parts.
std::vector<FoldSplit> split_folds(const Labels& labels, std::size_t k,
                                   std::uint64_t seed);
inline std::vector<FoldSplit> split_folds(const Dataset& ds, std::size_t k,
                                          std::uint64_t seed) {
  return split_folds(ds.labels, k, seed);
}

struct LiteralCatalog {
  std::vector<Literal> literals;
  // Features that produced no literal (constant columns).
  std::vector<std::size_t> constant_features;
  std::size_t n_features = 0;

  std::size_t size() const { return literals.size(); }
};

struct BinarizedDataset {
  LiteralCatalog catalog;
  // One column of sample bits per literal.
  std::vector<BitVector> columns;
  std::size_t n_samples = 0;

  std::size_t n_literals() const { return catalog.size(); }
  bool bit(std::size_t sample, std::size_t literal) const {
    return columns[literal].test(sample);
  }
};

inline constexpr std::size_t kDefaultBins = 9;

// Quantile thresholds per continuous feature.
std::vector<double> quantile_thresholds(std::span<const double> values,
                                        std::size_t bins);

LiteralCatalog build_catalog(const Matrix& features,
                             std::span<const FeatureKind> kinds, std::size_t bins);
// Evaluates every catalog literal on every row of features.
BinarizedDataset apply_catalog(const LiteralCatalog& catalog, const Matrix& features);

BinarizedDataset binarize(const Matrix& features, std::span<const FeatureKind> kinds,
                          std::size_t bins = kDefaultBins);
inline BinarizedDataset binarize(const Dataset& ds, std::size_t bins = kDefaultBins) {
  return binarize(ds.features, ds.feature_kinds, bins);
}

}  // namespace cgx
