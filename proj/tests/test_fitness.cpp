#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "genesift/errors.hpp"
#include "genesift/fitness.hpp"
#include "genesift/pipeline.hpp"
#include "genesift/rng.hpp"

using namespace genesift;

namespace {

FeatureMask mask_of(std::size_t d, std::initializer_list<std::size_t> on) {
  FeatureMask mask(d);
  for (auto i : on) mask.bits[i] = 1;
  return mask;
}

// Binary dataset where feature j carries signal strength fading with j.
Dataset signal_dataset(std::size_t n, std::size_t d, std::uint64_t seed) {
  Dataset ds;
  ds.name = "signal";
  ds.n_classes = 2;
  ds.label_names = {"0", "1"};
  for (std::size_t j = 0; j < d; ++j) ds.feature_names.push_back("f" + std::to_string(j));
  ds.x = Matrix(n, d);
  ds.y.resize(n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    ds.y[i] = static_cast<int>(rng.next_index(2));
    for (std::size_t j = 0; j < d; ++j) {
      const double strength = j < 3 ? 1.5 - 0.4 * static_cast<double>(j) : 0.0;
      ds.x(i, j) = strength * ds.y[i] + rng.next_gaussian();
    }
  }
  return ds;
}

}  // namespace

TEST_CASE("pearson basics") {
  std::vector<double> u = {1, 2, 3};
  CHECK(pearson(u, u) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pearson(u, {3, 2, 1}) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(pearson({5, 5, 5}, u) == 0.0);
  CHECK(pearson(u, {7, 7, 7}) == 0.0);
  CHECK_THROWS_AS(pearson(u, {1, 2}), Error);
}

TEST_CASE("cfs_merit of a single feature equals its label correlation") {
  Dataset ds = signal_dataset(300, 5, 3);
  std::vector<double> col(ds.n_samples()), y(ds.n_samples());
  for (std::size_t i = 0; i < ds.n_samples(); ++i) {
    col[i] = ds.x(i, 0);
    y[i] = ds.y[i];
  }
  const double expected = std::fabs(pearson(col, y));
  CHECK(cfs_merit(ds, mask_of(5, {0})) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("duplicating a feature does not raise the merit") {
  // Feature 1 is an exact copy of feature 0.
  Dataset ds = signal_dataset(200, 4, 5);
  for (std::size_t i = 0; i < ds.n_samples(); ++i) ds.x(i, 1) = ds.x(i, 0);

  const double one = cfs_merit(ds, mask_of(4, {0}));
  const double both = cfs_merit(ds, mask_of(4, {0, 1}));
  // r_ff = 1 for the pair, so k r_cf / sqrt(k + k(k-1)) collapses to r_cf.
  CHECK(both == doctest::Approx(one).epsilon(1e-9));
}

TEST_CASE("merit prefers informative sets over informative plus noise") {
  auto [ds, truth] = gen_synthetic(200, 10, 5, 2, 0.5, 11);
  FeatureMask informative = truth;
  FeatureMask everything(10, 1);
  CHECK(cfs_merit(ds, informative) > cfs_merit(ds, everything));
}

TEST_CASE("cfs_merit is permutation-invariant in feature order") {
  Dataset ds = signal_dataset(150, 6, 17);
  Dataset shuffled = ds;
  const std::vector<std::size_t> perm = {4, 0, 5, 2, 1, 3};
  for (std::size_t i = 0; i < ds.n_samples(); ++i)
    for (std::size_t j = 0; j < 6; ++j) shuffled.x(i, j) = ds.x(i, perm[j]);
  for (std::size_t j = 0; j < 6; ++j) shuffled.feature_names[j] = ds.feature_names[perm[j]];

  // {0,2,5} under perm lives at positions {1,3,2}.
  const double direct = cfs_merit(ds, mask_of(6, {0, 2, 5}));
  const double permuted = cfs_merit(shuffled, mask_of(6, {1, 2, 3}));
  CHECK(permuted == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("cfs_merit rejects the empty mask") {
  Dataset ds = signal_dataset(50, 4, 19);
  CHECK_THROWS_AS(cfs_merit(ds, FeatureMask(4)), Error);
  CHECK_THROWS_AS(cfs_merit(ds, FeatureMask(6, 1)), Error);  // wrong length
}

TEST_CASE("multiclass merit uses one-vs-rest correlations") {
  auto [ds, truth] = gen_synthetic(240, 8, 3, 3, 0.5, 23);
  const double informative = cfs_merit(ds, truth);
  FeatureMask noise_mask(8);
  std::size_t taken = 0;
  for (std::size_t j = 0; j < 8 && taken < 3; ++j) {
    if (!truth.bits[j]) {
      noise_mask.bits[j] = 1;
      ++taken;
    }
  }
  CHECK(informative > cfs_merit(ds, noise_mask));
}

TEST_CASE("wrapper_accuracy separates a single decisive feature") {
  auto [ds, truth] = gen_synthetic(90, 6, 1, 2, 0.05, 29);
  Dataset norm = minmax_normalize(ds);
  NetworkConfig cfg;
  cfg.epochs = 20;
  const double acc = wrapper_accuracy(norm, truth, cfg, 3, 1);
  CHECK(acc >= 0.95);
}

TEST_CASE("wrapper_accuracy on pure noise sits near the majority rate") {
  auto [ds, truth] = gen_synthetic(90, 8, 0, 2, 0.5, 31);
  (void)truth;
  Dataset norm = minmax_normalize(ds);
  auto counts = class_counts(norm);
  const double majority =
      static_cast<double>(std::max(counts[0], counts[1])) / static_cast<double>(norm.n_samples());

  NetworkConfig cfg;
  cfg.epochs = 5;
  FeatureMask noise(8, 1);
  double mean = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) mean += wrapper_accuracy(norm, noise, cfg, 3, seed);
  mean /= 10.0;
  CHECK(std::fabs(mean - majority) <= 0.15);
}

TEST_CASE("wrapper_accuracy leave-one-out bounds") {
  auto [ds, truth] = gen_synthetic(6, 3, 1, 2, 0.2, 37);
  (void)truth;
  Dataset norm = minmax_normalize(ds);
  NetworkConfig cfg;
  cfg.epochs = 2;
  FeatureMask all(3, 1);
  const double acc = wrapper_accuracy(norm, all, cfg, 6, 1);
  CHECK(acc >= 0.0);
  CHECK(acc <= 1.0);
}

TEST_CASE("objective dispatch: weights and parsimony") {
  auto [ds, truth] = gen_synthetic(120, 10, 4, 2, 0.5, 41);
  Dataset norm = minmax_normalize(ds);

  ObjectiveConfig pure;
  pure.kind = ObjectiveKind::MultiObjective;
  pure.w_quality = 1.0;
  pure.w_parsimony = 0.0;
  Objective quality_only(norm, pure);
  CHECK(quality_only(truth) == doctest::Approx(cfs_merit(norm, truth)).epsilon(1e-10));

  ObjectiveConfig parsimony_cfg;
  parsimony_cfg.kind = ObjectiveKind::MultiObjective;
  parsimony_cfg.w_quality = 0.0;
  parsimony_cfg.w_parsimony = 1.0;
  Objective parsimony_only(norm, parsimony_cfg);
  CHECK(parsimony_only(mask_of(10, {3})) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(parsimony_only(FeatureMask(10, 1)) == doctest::Approx(0.0).epsilon(1e-12));

  // Equal quality (exact duplicate columns), smaller mask wins by default.
  Dataset dup = norm;
  for (std::size_t i = 0; i < dup.n_samples(); ++i) dup.x(i, 1) = dup.x(i, 0);
  ObjectiveConfig defaults;
  defaults.kind = ObjectiveKind::MultiObjective;
  Objective scorer(dup, defaults);
  CHECK(scorer(mask_of(10, {0})) > scorer(mask_of(10, {0, 1})));
}

TEST_CASE("objective memoization returns identical scores") {
  auto [ds, truth] = gen_synthetic(100, 12, 3, 2, 0.5, 43);
  Dataset norm = minmax_normalize(ds);
  ObjectiveConfig cfg;
  Objective objective(norm, cfg);
  const double a = objective(truth);
  const double b = objective(truth);
  CHECK(a == b);
  CHECK(a == doctest::Approx(objective.score_uncached(truth)).epsilon(1e-12));
  CHECK(a == doctest::Approx(cfs_merit(norm, truth)).epsilon(1e-10));
}

TEST_CASE("objective weight validation") {
  auto [ds, truth] = gen_synthetic(40, 5, 2, 2, 0.5, 47);
  (void)truth;
  ObjectiveConfig bad;
  bad.w_quality = 0.9;
  bad.w_parsimony = 0.4;
  CHECK_THROWS_AS(Objective(ds, bad), Error);
}
