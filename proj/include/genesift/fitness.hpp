#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "genesift/dataset.hpp"
#include "genesift/neural.hpp"

namespace genesift {

// Sample Pearson correlation in [-1,1]; 0 when either vector is constant.
double pearson(const std::vector<double>& u, const std::vector<double>& v);

// Correlation-based subset merit: k * r_cf / sqrt(k + k(k-1) * r_ff), where
// r_cf is the mean absolute feature-label correlation of the selected
// features and r_ff the mean absolute pairwise correlation among them.
// Labels enter as the class index for binary problems and as the mean over
// per-class one-vs-rest indicators otherwise.
double cfs_merit(const Dataset& ds, const FeatureMask& mask);

// Mean stratified k-fold accuracy of a classifier trained on the masked
// columns. folds == n runs leave-one-out.
double wrapper_accuracy(const Dataset& ds, const FeatureMask& mask, const NetworkConfig& cfg,
                        std::size_t folds, std::uint64_t seed);

enum class ObjectiveKind { Merit, Wrapper, MultiObjective };

struct ObjectiveConfig {
  ObjectiveKind kind = ObjectiveKind::Merit;
  double w_quality = 0.9;    // multi-objective quality weight
  double w_parsimony = 0.1;  // multi-objective small-subset weight
  std::size_t folds = 3;     // wrapper cross-validation folds
  NetworkConfig net;         // wrapper classifier settings
  std::uint64_t seed = 1;    // wrapper fold seed
};

// Subset scorer bound to one dataset; higher is better. Pure per mask, so
// scores are memoized by mask bits; concurrent calls are safe.
class Objective {
 public:
  Objective(const Dataset& ds, ObjectiveConfig cfg);

  double operator()(const FeatureMask& mask) const;
  double score_uncached(const FeatureMask& mask) const;

  const ObjectiveConfig& config() const { return cfg_; }
  std::size_t dimension() const { return ds_->n_features(); }

 private:
  double merit_prepared(const std::vector<std::uint32_t>& sel) const;

  const Dataset* ds_;
  ObjectiveConfig cfg_;
  Matrix feature_z_;             // d x n, zero-mean unit-norm feature rows
  std::vector<double> label_r_;  // per-feature absolute label correlation
  mutable std::unordered_map<std::string, double> memo_;
  mutable std::mutex memo_mutex_;
};

}  // namespace genesift
