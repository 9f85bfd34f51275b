#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "genesift/matrix.hpp"

namespace genesift {

// Binary column-inclusion vector over a dataset's features.
struct FeatureMask {
  std::vector<std::uint8_t> bits;  // 0/1 per feature

  FeatureMask() = default;
  explicit FeatureMask(std::size_t d, std::uint8_t fill = 0) : bits(d, fill) {}

  std::size_t size() const { return bits.size(); }
  std::size_t popcount() const;
  std::vector<std::uint32_t> selected_indices() const;

  bool operator==(const FeatureMask&) const = default;
};

// Tabular sample x feature data with contiguous integer class labels.
// Immutable by convention once built; all operations below return copies.
struct Dataset {
  std::string name;
  std::vector<std::string> feature_names;  // length d, unique
  std::vector<std::string> label_names;    // class index -> original label text
  Matrix x;                                // n samples x d features
  std::vector<int> y;                      // length n, values in [0, n_classes)
  int n_classes = 0;

  std::size_t n_samples() const { return x.rows; }
  std::size_t n_features() const { return x.cols; }
};

struct SplitPair {
  Dataset train;
  Dataset test;
};

struct CsvOptions {
  int label_column = -1;                   // -1 = last column
  std::optional<double> nan_replacement;   // unset = reject NaN/missing cells
};

// Comma-separated values, one sample per row, categorical label column.
// A header row is assumed when any feature cell of the first row is
// non-numeric. Labels map to 0..c-1 in first-appearance order; the original
// label text is kept in Dataset::label_names.
Dataset load_csv(const std::string& path, const CsvOptions& options = {});

void write_csv(const Dataset& ds, const std::string& path);

// Per-feature (v - min) / (max - min); constant columns map to 0.0.
Dataset minmax_normalize(const Dataset& ds);

// Per-class random partition: train receives round(train_fraction * count)
// samples of each class, clamped so both sides keep at least one.
SplitPair stratified_split(const Dataset& ds, double train_fraction, std::uint64_t seed);

// Keeps exactly the columns where mask bits are 1, preserving order.
Dataset apply_mask(const Dataset& ds, const FeatureMask& mask);

std::vector<std::size_t> class_counts(const Dataset& ds);

}  // namespace genesift
