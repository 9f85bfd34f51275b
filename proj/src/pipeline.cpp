#include "genesift/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "genesift/errors.hpp"
#include "genesift/rng.hpp"
#include "genesift/text.hpp"

namespace genesift {

namespace {

// Re-throws with a stage prefix so failures name the pipeline phase.
template <typename Fn>
auto staged(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(stage) + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorKind::State, std::string(stage) + ": " + e.what());
  }
}

}  // namespace

std::string algorithm_label(SearchAlgorithm alg) {
  return alg == SearchAlgorithm::Firefly ? "firefly+dl" : "elephant+dl";
}

SearchResult select_features(const Dataset& normalized, const PipelineConfig& cfg, double* elapsed_s) {
  Objective objective(normalized, cfg.objective);
  {
    // Warm the evaluation path (thread pool, allocator, memo) before the
    // clock starts; the entry stays in the memo, identically on every run.
    FeatureMask probe(normalized.n_features());
    probe.bits[0] = 1;
    objective(probe);
  }
  const auto t0 = std::chrono::steady_clock::now();
  SearchResult result =
      cfg.algorithm == SearchAlgorithm::Firefly
          ? run_search(cfg.firefly, std::cref(objective), normalized.n_features(), cfg.jobs)
          : run_search(cfg.elephant, std::cref(objective), normalized.n_features(), cfg.jobs);
  const auto t1 = std::chrono::steady_clock::now();
  if (elapsed_s) *elapsed_s = std::chrono::duration<double>(t1 - t0).count();
  return result;
}

EvalReport run_pipeline(const Dataset& ds, const PipelineConfig& cfg) {
  EvalReport report;
  report.dataset = ds.name;
  report.algorithm = algorithm_label(cfg.algorithm);
  report.original_attributes = ds.n_features();
  report.instances = ds.n_samples();
  report.n_classes = ds.n_classes;

  const Dataset normalized = staged("normalize", [&] { return minmax_normalize(ds); });

  double elapsed = 0.0;
  const SearchResult search =
      staged("select", [&] { return select_features(normalized, cfg, &elapsed); });
  report.reduced_attributes = search.best_mask.popcount();
  report.selection_time_s = elapsed;

  const Dataset reduced = staged("select", [&] { return apply_mask(normalized, search.best_mask); });

  const double accuracy = staged("eval", [&] {
    if (cfg.protocol == EvalProtocol::Kfold)
      return kfold_accuracy(reduced.x, reduced.y, reduced.n_classes, cfg.net, cfg.kfold, cfg.eval_seed);
    const SplitPair split = stratified_split(reduced, cfg.holdout_fraction, cfg.eval_seed);
    Network net(layer_chain(reduced.n_features(), reduced.n_classes, cfg.net), cfg.net);
    staged("train", [&] { return train(net, split.train); });
    return evaluate(net, split.test).accuracy;
  });
  report.accuracy_pct = accuracy * 100.0;
  return report;
}

std::pair<Dataset, FeatureMask> gen_synthetic(std::size_t n, std::size_t d, std::size_t k_informative,
                                              int n_classes, double noise, std::uint64_t seed) {
  if (n_classes < 2) throw Error(ErrorKind::Config, "gen_synthetic: need at least 2 classes");
  if (k_informative > d) throw Error(ErrorKind::Config, "gen_synthetic: k_informative > d");
  if (n < static_cast<std::size_t>(n_classes))
    throw Error(ErrorKind::Config, "gen_synthetic: need at least one sample per class");

  Dataset ds;
  ds.name = "synthetic_n" + std::to_string(n) + "_d" + std::to_string(d) + "_k" +
            std::to_string(k_informative) + "_c" + std::to_string(n_classes);
  ds.n_classes = n_classes;
  for (int k = 0; k < n_classes; ++k) ds.label_names.push_back("c" + std::to_string(k));
  for (std::size_t j = 0; j < d; ++j) ds.feature_names.push_back("f" + std::to_string(j));

  Rng label_rng(seed, 0x11);
  ds.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.y[i] = static_cast<int>(label_rng.next_index(n_classes));
  // Guarantee every class is present.
  std::vector<bool> seen(n_classes, false);
  for (int label : ds.y) seen[label] = true;
  for (int k = 0; k < n_classes; ++k)
    if (!seen[k]) ds.y[k] = k;

  FeatureMask truth(d);
  {
    std::vector<std::uint32_t> cols(d);
    for (std::uint32_t j = 0; j < d; ++j) cols[j] = j;
    Rng pick_rng(seed, 0x22);
    for (std::size_t i = 0; i < k_informative; ++i)
      std::swap(cols[i], cols[i + pick_rng.next_index(d - i)]);
    for (std::size_t i = 0; i < k_informative; ++i) truth.bits[cols[i]] = 1;
  }

  Rng value_rng(seed, 0x33);
  ds.x = Matrix(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (truth.bits[j])
        ds.x(i, j) = 2.0 * static_cast<double>(ds.y[i]) + noise * value_rng.next_gaussian();
      else
        ds.x(i, j) = value_rng.next_gaussian();
    }
  }
  return {std::move(ds), std::move(truth)};
}

std::vector<std::pair<std::string, std::string>> parse_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open manifest " + path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line.substr(0, line.find('#')));
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Parse, path + ": line " + std::to_string(line_no) +
                                        " is not a 'name = path' pair");
    const std::string name = trim(stripped.substr(0, eq));
    const std::string file = trim(stripped.substr(eq + 1));
    if (name.empty() || file.empty())
      throw Error(ErrorKind::Parse, path + ": line " + std::to_string(line_no) +
                                        " has an empty name or path");
    entries.emplace_back(name, file);
  }
  return entries;
}

std::vector<EvalReport> bench(const std::vector<std::pair<std::string, std::string>>& manifest,
                              const std::vector<PipelineConfig>& cfgs, int jobs) {
  struct Row {
    std::size_t entry;
    std::size_t cfg;
  };
  std::vector<Row> rows;
  for (std::size_t e = 0; e < manifest.size(); ++e)
    for (std::size_t c = 0; c < cfgs.size(); ++c) rows.push_back({e, c});

  std::vector<EvalReport> reports(rows.size());
  auto run_row = [&](std::size_t r) {
    const auto& [name, path] = manifest[rows[r].entry];
    PipelineConfig cfg = cfgs[rows[r].cfg];
    if (jobs > 1) cfg.jobs = 1;  // row-level parallelism already owns the threads
    EvalReport& report = reports[r];
    report.dataset = name;
    report.algorithm = algorithm_label(cfg.algorithm);
    try {
      CsvOptions options;
      options.nan_replacement = 100.0;
      const Dataset ds = staged("load", [&] {
        Dataset loaded = load_csv(path, options);
        loaded.name = name;
        return loaded;
      });
      report = run_pipeline(ds, cfg);
    } catch (const std::exception& e) {
      report.failed = true;
      report.error = e.what();
    }
  };
  if (jobs > 1) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
#endif
    for (std::size_t r = 0; r < rows.size(); ++r) run_row(r);
  } else {
    for (std::size_t r = 0; r < rows.size(); ++r) run_row(r);
  }
  return reports;
}

std::string report_csv_header() {
  return "dataset,algorithm,original_attributes,instances,classes,reduced_attributes,time_s,accuracy_pct";
}

std::string report_csv_row(const EvalReport& row, int decimals) {
  std::string out = row.dataset + "," + row.algorithm + ",";
  if (row.failed) return out + ",,,,,";
  out += std::to_string(row.original_attributes) + "," + std::to_string(row.instances) + "," +
         std::to_string(row.n_classes) + "," + std::to_string(row.reduced_attributes) + "," +
         fmt_fixed(row.selection_time_s, decimals) + "," + fmt_fixed(row.accuracy_pct, decimals);
  return out;
}

std::string report_table(const std::vector<EvalReport>& rows, int decimals) {
  const std::vector<std::string> headers = {"dataset",    "algorithm", "original", "instances",
                                            "classes",    "reduced",   "time (s)", "accuracy (%)"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& row : rows) {
    if (row.failed) {
      cells.push_back({row.dataset, row.algorithm, "-", "-", "-", "-", "-",
                       "FAILED [" + row.error + "]"});
    } else {
      cells.push_back({row.dataset, row.algorithm, std::to_string(row.original_attributes),
                       std::to_string(row.instances), std::to_string(row.n_classes),
                       std::to_string(row.reduced_attributes), fmt_fixed(row.selection_time_s, decimals),
                       fmt_fixed(row.accuracy_pct, decimals)});
    }
  }
  std::vector<std::size_t> widths(headers.size());
  for (std::size_t c = 0; c < headers.size(); ++c) {
    widths[c] = headers[c].size();
    for (const auto& row : cells) widths[c] = std::max(widths[c], row[c].size());
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << row[c];
      if (c + 1 < row.size()) out << std::string(widths[c] - row[c].size() + 2, ' ');
    }
    out << '\n';
  };
  emit(headers);
  for (std::size_t c = 0; c < headers.size(); ++c)
    out << std::string(widths[c], '-') << (c + 1 < headers.size() ? "  " : "\n");
  for (const auto& row : cells) emit(row);
  return out.str();
}

}  // namespace genesift
