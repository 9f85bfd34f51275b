#include "genesift/fitness.hpp"

#include <algorithm>
#include <cmath>

#include "genesift/errors.hpp"
#include "genesift/kernels.hpp"

namespace genesift {

namespace {

// Zero-mean, unit-L2-norm copy of a vector; all zeros when constant, so that
// plain dot products of these rows are exactly Pearson correlations.
void standardize_into(const double* v, std::size_t n, double* out) {
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += v[i];
  mean /= static_cast<double>(n);
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = v[i] - mean;
    sq += out[i] * out[i];
  }
  if (sq == 0.0) {
    for (std::size_t i = 0; i < n; ++i) out[i] = 0.0;
    return;
  }
  const double inv = 1.0 / std::sqrt(sq);
  for (std::size_t i = 0; i < n; ++i) out[i] *= inv;
}

std::vector<double> standardized(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  standardize_into(v.data(), v.size(), out.data());
  return out;
}

double clamp_corr(double r) { return std::clamp(r, -1.0, 1.0); }

// Standardized label targets: the class index for binary problems, one
// one-vs-rest indicator per class otherwise.
std::vector<std::vector<double>> label_targets(const Dataset& ds) {
  const std::size_t n = ds.n_samples();
  std::vector<std::vector<double>> targets;
  if (ds.n_classes == 2) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<double>(ds.y[i]);
    targets.push_back(standardized(y));
  } else {
    for (int k = 0; k < ds.n_classes; ++k) {
      std::vector<double> ind(n);
      for (std::size_t i = 0; i < n; ++i) ind[i] = ds.y[i] == k ? 1.0 : 0.0;
      targets.push_back(standardized(ind));
    }
  }
  return targets;
}

double abs_label_corr(const double* z_feature, const std::vector<std::vector<double>>& targets,
                      std::size_t n) {
  double acc = 0.0;
  for (const auto& t : targets) {
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += z_feature[i] * t[i];
    acc += std::fabs(clamp_corr(dot));
  }
  return acc / static_cast<double>(targets.size());
}

// sum_rcf = k * mean |feature-label corr|; pair_sum = sum over pairs of
// |feature-feature corr|, so k(k-1)*r_ff collapses to 2*pair_sum.
double merit_formula(double sum_rcf, double pair_sum, std::size_t k) {
  return sum_rcf / std::sqrt(static_cast<double>(k) + 2.0 * pair_sum);
}

void check_mask(const Dataset& ds, const FeatureMask& mask) {
  if (mask.size() != ds.n_features())
    throw Error(ErrorKind::Shape, "mask length " + std::to_string(mask.size()) +
                                      " != feature count " + std::to_string(ds.n_features()));
}

}  // namespace

double pearson(const std::vector<double>& u, const std::vector<double>& v) {
  if (u.size() != v.size())
    throw Error(ErrorKind::Shape, "pearson: length mismatch " + std::to_string(u.size()) + " vs " +
                                      std::to_string(v.size()));
  const auto zu = standardized(u);
  const auto zv = standardized(v);
  double dot = 0.0;
  bool u_zero = true, v_zero = true;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += zu[i] * zv[i];
    u_zero = u_zero && zu[i] == 0.0;
    v_zero = v_zero && zv[i] == 0.0;
  }
  if (u_zero || v_zero) return 0.0;
  return clamp_corr(dot);
}

double cfs_merit(const Dataset& ds, const FeatureMask& mask) {
  check_mask(ds, mask);
  const auto sel = mask.selected_indices();
  if (sel.empty()) throw Error(ErrorKind::Mask, "cfs_merit: empty mask");

  const std::size_t n = ds.n_samples();
  const std::size_t k = sel.size();
  const auto targets = label_targets(ds);

  // Standardize only the selected columns; identical per-feature values (and
  // pair accumulation order) to the precomputed path in Objective.
  Matrix z(k, n);
  std::vector<double> col(n);
  double sum_rcf = 0.0;
  for (std::size_t s = 0; s < k; ++s) {
    for (std::size_t i = 0; i < n; ++i) col[i] = ds.x(i, sel[s]);
    standardize_into(col.data(), n, z.row(s));
    sum_rcf += abs_label_corr(z.row(s), targets, n);
  }
  std::vector<std::uint32_t> all(k);
  for (std::size_t s = 0; s < k; ++s) all[s] = static_cast<std::uint32_t>(s);
  const double pair_sum = kernels::pair_abs_dot_sum(z, all);
  return merit_formula(sum_rcf, pair_sum, k);
}

double wrapper_accuracy(const Dataset& ds, const FeatureMask& mask, const NetworkConfig& cfg,
                        std::size_t folds, std::uint64_t seed) {
  check_mask(ds, mask);
  if (mask.popcount() == 0) throw Error(ErrorKind::Mask, "wrapper_accuracy: empty mask");
  const Dataset masked = apply_mask(ds, mask);
  return kfold_accuracy(masked.x, masked.y, masked.n_classes, cfg, folds, seed);
}

Objective::Objective(const Dataset& ds, ObjectiveConfig cfg) : ds_(&ds), cfg_(std::move(cfg)) {
  if (cfg_.w_quality < 0 || cfg_.w_parsimony < 0 ||
      std::fabs(cfg_.w_quality + cfg_.w_parsimony - 1.0) > 1e-9)
    throw Error(ErrorKind::Config, "objective weights must be nonnegative and sum to 1");

  if (cfg_.kind != ObjectiveKind::Wrapper) {
    const std::size_t n = ds.n_samples();
    const std::size_t d = ds.n_features();
    const auto targets = label_targets(ds);
    feature_z_ = Matrix(d, n);
    label_r_.assign(d, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::size_t j = 0; j < d; ++j) {
      std::vector<double> col(n);
      for (std::size_t i = 0; i < n; ++i) col[i] = ds.x(i, j);
      standardize_into(col.data(), n, feature_z_.row(j));
      label_r_[j] = abs_label_corr(feature_z_.row(j), targets, n);
    }
  }
}

double Objective::merit_prepared(const std::vector<std::uint32_t>& sel) const {
  double sum_rcf = 0.0;
  for (auto j : sel) sum_rcf += label_r_[j];
  const double pair_sum = kernels::pair_abs_dot_sum(feature_z_, sel);
  return merit_formula(sum_rcf, pair_sum, sel.size());
}

double Objective::score_uncached(const FeatureMask& mask) const {
  check_mask(*ds_, mask);
  const auto sel = mask.selected_indices();
  if (sel.empty()) throw Error(ErrorKind::Mask, "objective: empty mask");

  switch (cfg_.kind) {
    case ObjectiveKind::Merit:
      return merit_prepared(sel);
    case ObjectiveKind::Wrapper:
      return wrapper_accuracy(*ds_, mask, cfg_.net, cfg_.folds, cfg_.seed);
    case ObjectiveKind::MultiObjective: {
      const double quality = merit_prepared(sel);
      const double parsimony =
          1.0 - static_cast<double>(sel.size()) / static_cast<double>(ds_->n_features());
      return cfg_.w_quality * quality + cfg_.w_parsimony * parsimony;
    }
  }
  throw Error(ErrorKind::State, "unknown objective kind");
}

double Objective::operator()(const FeatureMask& mask) const {
  // Pack the bits; scores are pure, so a racing double-compute is harmless.
  std::string key((mask.size() + 7) / 8, '\0');
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask.bits[i]) key[i / 8] = static_cast<char>(key[i / 8] | (1 << (i % 8)));
  {
    std::lock_guard<std::mutex> lock(memo_mutex_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  const double score = score_uncached(mask);
  {
    std::lock_guard<std::mutex> lock(memo_mutex_);
    memo_.emplace(std::move(key), score);
  }
  return score;
}

}  // namespace genesift
