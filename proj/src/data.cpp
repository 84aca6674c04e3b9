#include "cgx/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "cgx/errors.hpp"
#include "cgx/random.hpp"

namespace cgx {

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows_) throw ShapeError("row index out of range");
    std::copy_n(row(indices[i]).begin(), cols_, out.row(i).begin());
  }
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out = *this;
  out.features = features.select_rows(indices);
  out.labels.resize(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) out.labels[i] = labels[indices[i]];
  return out;
}

void Dataset::validate() const {
  if (labels.size() != n_samples()) {
    throw ShapeError("label count " + std::to_string(labels.size()) +
                     " does not match sample count " + std::to_string(n_samples()));
  }
  if (feature_kinds.size() != n_features()) {
    throw ShapeError("feature kind count does not match feature count");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw ParameterError("labels must be 0 or 1");
  }
  for (double v : features.values()) {
    if (!std::isfinite(v)) throw IngestionError("non-finite feature value");
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

// Splits one CSV record. Double quotes group a field; "" is an escaped quote.
std::vector<std::string> split_record(std::string_view line, char delimiter) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current.push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        current.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == delimiter) {
      fields.emplace_back(trim(current));
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  fields.emplace_back(trim(current));
  return fields;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column,
                 const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open CSV file '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw SchemaError("CSV file '" + path + "' is empty");
  const auto header = split_record(line, options.delimiter);

  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) {
    throw SchemaError("label column '" + label_column + "' not found in '" + path + "'");
  }
  const auto label_index = static_cast<std::size_t>(label_it - header.begin());
  for (const auto& [name, kind] : options.schema) {
    if (std::find(header.begin(), header.end(), name) == header.end()) {
      throw SchemaError("schema column '" + name + "' not found in '" + path + "'");
    }
  }

  std::vector<std::size_t> feature_columns;
  Dataset ds;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == label_index) continue;
    feature_columns.push_back(c);
    ds.feature_names.push_back(header[c]);
    const auto kind = options.schema.find(header[c]);
    ds.feature_kinds.push_back(kind == options.schema.end() ? FeatureKind::kContinuous
                                                            : kind->second);
  }
  const std::size_t n_features = feature_columns.size();

  std::vector<std::vector<std::string>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_record(line, options.delimiter);
    if (fields.size() != header.size()) {
      throw IngestionError("line " + std::to_string(line_no) + ": expected " +
                           std::to_string(header.size()) + " fields, found " +
                           std::to_string(fields.size()));
    }
    fields.push_back(std::to_string(line_no));
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) throw SchemaError("CSV file '" + path + "' has no data rows");

  // Category ids and label classes are assigned in lexicographic order.
  ds.categories.assign(n_features, {});
  for (std::size_t f = 0; f < n_features; ++f) {
    if (ds.feature_kinds[f] != FeatureKind::kCategorical) continue;
    std::set<std::string> values;
    for (const auto& r : rows) values.insert(r[feature_columns[f]]);
    ds.categories[f].assign(values.begin(), values.end());
  }
  std::set<std::string> classes;
  for (const auto& r : rows) classes.insert(r[label_index]);
  if (classes.size() > 2) {
    throw UnsupportedTaskError("label column '" + label_column + "' has " +
                               std::to_string(classes.size()) +
                               " classes; only binary classification is supported");
  }
  if (classes.size() < 2) {
    throw UnsupportedTaskError("label column '" + label_column +
                               "' has a single class; two are required");
  }
  ds.class_names.assign(classes.begin(), classes.end());

  ds.features = Matrix(rows.size(), n_features);
  ds.labels.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const std::string& where = r.back();
    for (std::size_t f = 0; f < n_features; ++f) {
      const std::string& cell = r[feature_columns[f]];
      if (ds.feature_kinds[f] == FeatureKind::kCategorical) {
        const auto& cats = ds.categories[f];
        ds.features(i, f) = static_cast<double>(
            std::lower_bound(cats.begin(), cats.end(), cell) - cats.begin());
        continue;
      }
      double value = 0.0;
      const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (cell.empty() || ec != std::errc() || end != cell.data() + cell.size()) {
        throw IngestionError("line " + where + ", column '" + ds.feature_names[f] +
                             "': cannot parse '" + cell + "' as a number");
      }
      if (!std::isfinite(value)) {
        throw IngestionError("line " + where + ", column '" + ds.feature_names[f] +
                             "': non-finite value '" + cell + "'");
      }
      ds.features(i, f) = value;
    }
    ds.labels[i] = r[label_index] == ds.class_names[0] ? 0 : 1;
  }
  return ds;
}

Dataset generate_xor(std::size_t n_samples, std::size_t dims, std::uint64_t seed,
                     const XorOptions& options) {
  if (dims < 2) throw ParameterError("XOR generator needs dims >= 2");
  if (n_samples < 1) throw ParameterError("XOR generator needs n_samples >= 1");
  if (options.third_feature && dims < 3) {
    throw ParameterError("third-feature XOR needs dims >= 3");
  }
  if (options.label_noise < 0.0 || options.label_noise > 1.0) {
    throw ParameterError("label_noise must lie in [0, 1]");
  }

  Dataset ds;
  ds.features = Matrix(n_samples, dims);
  ds.labels.resize(n_samples);
  ds.feature_kinds.assign(dims, FeatureKind::kContinuous);
  ds.categories.assign(dims, {});
  for (std::size_t j = 0; j < dims; ++j) ds.feature_names.push_back("x" + std::to_string(j + 1));

  Rng rng(seed);
  Rng noise_rng(mix_seed(seed, 1));
  for (std::size_t i = 0; i < n_samples; ++i) {
    for (std::size_t j = 0; j < dims; ++j) ds.features(i, j) = uniform01(rng);
    int y = static_cast<int>(std::round(ds.features(i, 0))) ^
            static_cast<int>(std::round(ds.features(i, 1)));
    if (options.third_feature) y ^= static_cast<int>(std::round(ds.features(i, 2)));
    if (options.label_noise > 0.0 && uniform01(noise_rng) < options.label_noise) y ^= 1;
    ds.labels[i] = y;
  }
  return ds;
}

std::vector<FoldSplit> split_folds(const Labels& labels, std::size_t k,
                                   std::uint64_t seed) {
  const std::size_t n = labels.size();
  if (k < 2) throw ParameterError("split_folds needs k >= 2");
  if (k > n) {
    throw ParameterError("split_folds: k=" + std::to_string(k) + " exceeds sample count " +
                         std::to_string(n));
  }

  Rng rng(seed);
  std::vector<std::size_t> order;
  order.reserve(n);
  for (int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    shuffle(std::span<std::size_t>(members), rng);
    order.insert(order.end(), members.begin(), members.end());
  }
  if (order.size() != n) throw ParameterError("labels must be 0 or 1");

  // Dealing the class-ordered sequence round-robin keeps every fold within one
  // sample of the per-class share.
  std::vector<std::size_t> fold_of(n);
  for (std::size_t p = 0; p < n; ++p) fold_of[order[p]] = p % k;

  std::vector<FoldSplit> folds(k);
  for (std::size_t j = 0; j < k; ++j) {
    folds[j].seed = seed;
    for (std::size_t i = 0; i < n; ++i) {
      (fold_of[i] == j ? folds[j].test_indices : folds[j].train_indices).push_back(i);
    }
  }
  return folds;
}

std::vector<double> quantile_thresholds(std::span<const double> values,
                                        std::size_t bins) {
  if (bins < 1) throw ParameterError("bins must be >= 1");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> thresholds;
  if (sorted.empty() || sorted.front() == sorted.back()) return thresholds;

  const double last = static_cast<double>(sorted.size() - 1);
  for (std::size_t j = 1; j <= bins; ++j) {
    const double pos = static_cast<double>(j) / static_cast<double>(bins + 1) * last;
    const double lo = sorted[static_cast<std::size_t>(std::floor(pos))];
    const double hi = sorted[static_cast<std::size_t>(std::ceil(pos))];
    if (lo < hi) {
      thresholds.push_back(std::midpoint(lo, hi));
      continue;
    }
    // The quantile sits on a data value: split against the nearest distinct
    // neighbour, above if there is one.
    const auto above = std::upper_bound(sorted.begin(), sorted.end(), lo);
    if (above != sorted.end()) {
      thresholds.push_back(std::midpoint(lo, *above));
    } else {
      const auto below = std::lower_bound(sorted.begin(), sorted.end(), lo);
      thresholds.push_back(std::midpoint(*(below - 1), lo));
    }
  }
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  return thresholds;
}

LiteralCatalog build_catalog(const Matrix& features, std::span<const FeatureKind> kinds,
                             std::size_t bins) {
  if (bins < 1) throw ParameterError("bins must be >= 1");
  if (kinds.size() != features.cols()) {
    throw ShapeError("feature kind count does not match feature count");
  }
  LiteralCatalog catalog;
  catalog.n_features = features.cols();
  for (std::size_t f = 0; f < features.cols(); ++f) {
    const auto column = features.column(f);
    const std::size_t before = catalog.literals.size();
    if (kinds[f] == FeatureKind::kContinuous) {
      const auto thresholds = quantile_thresholds(column, bins);
      for (Op op : {Op::kLessEqual, Op::kGreater}) {
        for (double t : thresholds) catalog.literals.push_back({f, op, t});
      }
    } else {
      std::set<double> ids(column.begin(), column.end());
      if (ids.size() >= 2) {
        for (double id : ids) catalog.literals.push_back({f, Op::kEqual, id});
      }
    }
    if (catalog.literals.size() == before) catalog.constant_features.push_back(f);
  }
  return catalog;
}

BinarizedDataset apply_catalog(const LiteralCatalog& catalog, const Matrix& features) {
  if (features.cols() != catalog.n_features) {
    throw ShapeError("catalog expects " + std::to_string(catalog.n_features) +
                     " features, data has " + std::to_string(features.cols()));
  }
  BinarizedDataset out;
  out.catalog = catalog;
  out.n_samples = features.rows();
  out.columns.assign(catalog.size(), BitVector(features.rows()));
  for (std::size_t j = 0; j < catalog.size(); ++j) {
    const Literal& lit = catalog.literals[j];
    for (std::size_t i = 0; i < features.rows(); ++i) {
      if (lit.holds(features(i, lit.feature))) out.columns[j].set(i);
    }
  }
  return out;
}

BinarizedDataset binarize(const Matrix& features, std::span<const FeatureKind> kinds,
                          std::size_t bins) {
  return apply_catalog(build_catalog(features, kinds, bins), features);
}

}  // namespace cgx
