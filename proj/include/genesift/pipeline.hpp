#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "genesift/dataset.hpp"
#include "genesift/fitness.hpp"
#include "genesift/metaheuristics.hpp"
#include "genesift/neural.hpp"

namespace genesift {

enum class EvalProtocol { Kfold, Holdout };

struct PipelineConfig {
  SearchAlgorithm algorithm = SearchAlgorithm::Firefly;
  FireflyParams firefly;
  ElephantParams elephant;
  ObjectiveConfig objective;
  EvalProtocol protocol = EvalProtocol::Kfold;
  std::size_t kfold = 10;
  double holdout_fraction = 0.7;
  NetworkConfig net;
  std::uint64_t eval_seed = 1;  // fold/split seed for the final evaluation
  int jobs = 1;
  int report_decimals = 2;
};

// One result row: attribute reduction, selection wall time, accuracy.
struct EvalReport {
  std::string dataset;
  std::string algorithm;  // "firefly+dl" or "elephant+dl"
  std::size_t original_attributes = 0;
  std::size_t instances = 0;
  int n_classes = 0;
  std::size_t reduced_attributes = 0;
  double selection_time_s = 0.0;
  double accuracy_pct = 0.0;
  bool failed = false;
  std::string error;  // stage-labeled reason when failed
};

std::string algorithm_label(SearchAlgorithm alg);

// Normalize, search for a mask (timed), train/evaluate the classifier on the
// reduced columns under the configured protocol. The mask is selected once
// on the full normalized data; classifier folds stay disjoint.
EvalReport run_pipeline(const Dataset& ds, const PipelineConfig& cfg);

// Search stage only; elapsed_s (when non-null) receives the wall time.
SearchResult select_features(const Dataset& normalized, const PipelineConfig& cfg,
                             double* elapsed_s = nullptr);

// Class-conditioned Gaussian features: k_informative columns get means
// 2*class_index (noise stddev `noise`), the rest are standard normal noise.
// Returns the data plus the ground-truth informative mask.
std::pair<Dataset, FeatureMask> gen_synthetic(std::size_t n, std::size_t d, std::size_t k_informative,
                                              int n_classes, double noise, std::uint64_t seed);

// `name = path` lines, # comments.
std::vector<std::pair<std::string, std::string>> parse_manifest(const std::string& path);

// Every (dataset, config) pair in manifest-major order; a failing row is
// reported in place and does not stop the rest. jobs > 1 runs rows in
// parallel without changing any result.
std::vector<EvalReport> bench(const std::vector<std::pair<std::string, std::string>>& manifest,
                              const std::vector<PipelineConfig>& cfgs, int jobs = 1);

std::string report_csv_header();
std::string report_csv_row(const EvalReport& row, int decimals = 2);
std::string report_table(const std::vector<EvalReport>& rows, int decimals = 2);

}  // namespace genesift
