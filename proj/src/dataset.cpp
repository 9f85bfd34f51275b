#include "genesift/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <unordered_map>

#include "genesift/errors.hpp"
#include "genesift/kernels.hpp"
#include "genesift/rng.hpp"
#include "genesift/text.hpp"

namespace genesift {

std::size_t FeatureMask::popcount() const {
  std::size_t n = 0;
  for (auto b : bits) n += b != 0;
  return n;
}

std::vector<std::uint32_t> FeatureMask::selected_indices() const {
  std::vector<std::uint32_t> idx;
  for (std::uint32_t i = 0; i < bits.size(); ++i)
    if (bits[i]) idx.push_back(i);
  return idx;
}

namespace {

bool is_missing_cell(const std::string& cell) {
  if (cell.empty()) return true;
  std::string low;
  for (char c : cell) low += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return low == "nan";
}

void validate_dataset(const Dataset& ds) {
  if (ds.n_samples() == 0 || ds.n_features() == 0)
    throw Error(ErrorKind::Data, ds.name + ": empty dataset");
  if (ds.n_classes < 2)
    throw Error(ErrorKind::Data, ds.name + ": fewer than two classes");
}

}  // namespace

std::vector<std::size_t> class_counts(const Dataset& ds) {
  std::vector<std::size_t> counts(ds.n_classes, 0);
  for (int label : ds.y) {
    if (label < 0 || label >= ds.n_classes)
      throw Error(ErrorKind::Data, ds.name + ": label out of range");
    ++counts[label];
  }
  return counts;
}

Dataset load_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);

  std::vector<std::vector<std::string>> records;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    records.push_back(split(line, ','));
  }
  if (records.empty()) throw Error(ErrorKind::Parse, path + ": no rows");

  const std::size_t arity = records[0].size();
  if (arity < 2) throw Error(ErrorKind::Parse, path + ": rows need at least one feature and a label");
  for (std::size_t r = 0; r < records.size(); ++r) {
    if (records[r].size() != arity)
      throw Error(ErrorKind::Parse, path + ": row " + std::to_string(r + 1) + " has " +
                                        std::to_string(records[r].size()) + " fields, expected " +
                                        std::to_string(arity));
  }

  std::size_t label_col;
  if (options.label_column < 0) {
    label_col = arity - 1;
  } else {
    label_col = static_cast<std::size_t>(options.label_column);
    if (label_col >= arity)
      throw Error(ErrorKind::Parse, path + ": label column " + std::to_string(label_col) +
                                        " out of range for arity " + std::to_string(arity));
  }

  // Header detection: any non-numeric, non-missing feature cell in row one.
  bool has_header = false;
  for (std::size_t c = 0; c < arity; ++c) {
    if (c == label_col) continue;
    const std::string cell = trim(records[0][c]);
    if (!is_missing_cell(cell) && !parse_double(cell)) {
      has_header = true;
      break;
    }
  }

  Dataset ds;
  ds.name = std::filesystem::path(path).stem().string();

  const std::size_t d = arity - 1;
  if (has_header) {
    std::size_t c = 0;
    for (std::size_t col = 0; col < arity; ++col) {
      if (col == label_col) continue;
      ds.feature_names.push_back(trim(records[0][col]));
      ++c;
    }
    std::set<std::string> uniq(ds.feature_names.begin(), ds.feature_names.end());
    if (uniq.size() != ds.feature_names.size())
      throw Error(ErrorKind::Data, path + ": duplicate feature names in header");
  } else {
    for (std::size_t col = 0; col < d; ++col) ds.feature_names.push_back("f" + std::to_string(col));
  }

  const std::size_t first_data = has_header ? 1 : 0;
  const std::size_t n = records.size() - first_data;
  if (n == 0) throw Error(ErrorKind::Parse, path + ": header only, no data rows");

  ds.x = Matrix(n, d);
  ds.y.resize(n);
  std::unordered_map<std::string, int> label_ids;

  for (std::size_t r = 0; r < n; ++r) {
    const auto& rec = records[first_data + r];
    const std::size_t row_no = first_data + r + 1;
    std::size_t c = 0;
    for (std::size_t col = 0; col < arity; ++col) {
      const std::string cell = trim(rec[col]);
      if (col == label_col) {
        if (cell.empty())
          throw Error(ErrorKind::Parse, path + ": empty label at row " + std::to_string(row_no));
        auto [it, inserted] = label_ids.try_emplace(cell, static_cast<int>(ds.label_names.size()));
        if (inserted) ds.label_names.push_back(cell);
        ds.y[r] = it->second;
        continue;
      }
      double value;
      if (is_missing_cell(cell)) {
        if (!options.nan_replacement)
          throw Error(ErrorKind::Data, path + ": missing value at row " + std::to_string(row_no) +
                                           ", column " + std::to_string(col + 1) +
                                           " (no replacement configured)");
        value = *options.nan_replacement;
      } else {
        auto parsed = parse_double(cell);
        if (!parsed)
          throw Error(ErrorKind::Parse, path + ": unparseable number '" + cell + "' at row " +
                                            std::to_string(row_no) + ", column " + std::to_string(col + 1));
        value = *parsed;
        if (std::isnan(value)) {
          if (!options.nan_replacement)
            throw Error(ErrorKind::Data, path + ": NaN at row " + std::to_string(row_no) +
                                             ", column " + std::to_string(col + 1) +
                                             " (no replacement configured)");
          value = *options.nan_replacement;
        }
        if (std::isinf(value))
          throw Error(ErrorKind::Parse, path + ": non-finite value at row " + std::to_string(row_no) +
                                            ", column " + std::to_string(col + 1));
      }
      ds.x(r, c) = value;
      ++c;
    }
  }

  ds.n_classes = static_cast<int>(ds.label_names.size());
  validate_dataset(ds);
  return ds;
}

void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  for (std::size_t j = 0; j < ds.n_features(); ++j) out << ds.feature_names[j] << ',';
  out << "label\n";
  for (std::size_t i = 0; i < ds.n_samples(); ++i) {
    for (std::size_t j = 0; j < ds.n_features(); ++j) out << fmt_double(ds.x(i, j)) << ',';
    out << ds.label_names[ds.y[i]] << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path);
}

Dataset minmax_normalize(const Dataset& ds) {
  Dataset out = ds;
  std::vector<double> lo, hi;
  kernels::column_minmax(ds.x, lo, hi);
  for (std::size_t j = 0; j < ds.n_features(); ++j) {
    const double range = hi[j] - lo[j];
    if (range == 0.0) {
      for (std::size_t i = 0; i < ds.n_samples(); ++i) out.x(i, j) = 0.0;
    } else {
      for (std::size_t i = 0; i < ds.n_samples(); ++i) out.x(i, j) = (ds.x(i, j) - lo[j]) / range;
    }
  }
  return out;
}

SplitPair stratified_split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw Error(ErrorKind::Split, "train_fraction must lie in (0,1)");
  const auto counts = class_counts(ds);
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] < 2)
      throw Error(ErrorKind::Split, ds.name + ": class " + std::to_string(k) +
                                        " has a single sample, cannot split");
  }

  std::vector<std::vector<std::size_t>> by_class(ds.n_classes);
  for (std::size_t i = 0; i < ds.n_samples(); ++i) by_class[ds.y[i]].push_back(i);

  std::vector<char> in_train(ds.n_samples(), 0);
  for (int k = 0; k < ds.n_classes; ++k) {
    auto& idx = by_class[k];
    Rng rng(seed, static_cast<std::uint64_t>(k), 0x53);
    for (std::size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[rng.next_index(i)]);
    auto take = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(idx.size())));
    take = std::clamp<std::size_t>(take, 1, idx.size() - 1);
    for (std::size_t i = 0; i < take; ++i) in_train[idx[i]] = 1;
  }

  auto gather = [&](bool want_train, const char* suffix) {
    Dataset part;
    part.name = ds.name + suffix;
    part.feature_names = ds.feature_names;
    part.label_names = ds.label_names;
    part.n_classes = ds.n_classes;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < ds.n_samples(); ++i)
      if (static_cast<bool>(in_train[i]) == want_train) rows.push_back(i);
    part.x = Matrix(rows.size(), ds.n_features());
    part.y.resize(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const double* src = ds.x.row(rows[r]);
      std::copy(src, src + ds.n_features(), part.x.row(r));
      part.y[r] = ds.y[rows[r]];
    }
    return part;
  };

  return SplitPair{gather(true, "/train"), gather(false, "/test")};
}

Dataset apply_mask(const Dataset& ds, const FeatureMask& mask) {
  if (mask.size() != ds.n_features())
    throw Error(ErrorKind::Shape, ds.name + ": mask length " + std::to_string(mask.size()) +
                                      " != feature count " + std::to_string(ds.n_features()));
  const auto sel = mask.selected_indices();
  if (sel.empty()) throw Error(ErrorKind::Mask, ds.name + ": all-zero mask");

  Dataset out;
  out.name = ds.name;
  out.label_names = ds.label_names;
  out.n_classes = ds.n_classes;
  out.y = ds.y;
  out.feature_names.reserve(sel.size());
  for (auto j : sel) out.feature_names.push_back(ds.feature_names[j]);
  out.x = Matrix(ds.n_samples(), sel.size());
  for (std::size_t i = 0; i < ds.n_samples(); ++i) {
    const double* src = ds.x.row(i);
    double* dst = out.x.row(i);
    for (std::size_t j = 0; j < sel.size(); ++j) dst[j] = src[sel[j]];
  }
  return out;
}

}  // namespace genesift
