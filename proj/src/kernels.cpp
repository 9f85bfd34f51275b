#include "genesift/kernels.hpp"

#include <cassert>
#include <cmath>
#include <cstddef>

namespace genesift::kernels {

namespace {

// Fork/join is not worth it below roughly this many flops.
constexpr std::size_t kParallelFlopCutoff = 1 << 16;

// Shared by the serial and parallel kernel flavors, so vector reassociation
// here never breaks their bit-for-bit agreement.
inline double dot(const double* a, const double* b, std::size_t k) {
  double s = 0.0;
#ifdef _OPENMP
#pragma omp simd reduction(+ : s)
#endif
  for (std::size_t i = 0; i < k; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

void gemm_nt_serial(const Matrix& a, const Matrix& b, Matrix& c) {
  assert(a.cols == b.cols);
  c = Matrix(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.rows; ++j)
      c(i, j) = dot(a.row(i), b.row(j), a.cols);
}

void gemm_nt_omp(const Matrix& a, const Matrix& b, Matrix& c) {
  assert(a.cols == b.cols);
  c = Matrix(a.rows, b.rows);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.rows; ++j)
      c(i, j) = dot(a.row(i), b.row(j), a.cols);
}

void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c) {
  if (a.rows * b.rows * a.cols >= kParallelFlopCutoff)
    gemm_nt_omp(a, b, c);
  else
    gemm_nt_serial(a, b, c);
}

void gemm_nn_serial(const Matrix& a, const Matrix& b, Matrix& c) {
  assert(a.cols == b.rows);
  c = Matrix(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* crow = c.row(i);
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double av = arow[k];
      const double* brow = b.row(k);
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_nn_omp(const Matrix& a, const Matrix& b, Matrix& c) {
  assert(a.cols == b.rows);
  c = Matrix(a.rows, b.cols);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* crow = c.row(i);
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double av = arow[k];
      const double* brow = b.row(k);
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c) {
  if (a.rows * a.cols * b.cols >= kParallelFlopCutoff)
    gemm_nn_omp(a, b, c);
  else
    gemm_nn_serial(a, b, c);
}

void gemm_tn_serial(const Matrix& a, const Matrix& b, Matrix& c) {
  assert(a.rows == b.rows);
  c = Matrix(a.cols, b.cols);
  for (std::size_t i = 0; i < a.cols; ++i) {
    double* crow = c.row(i);
    for (std::size_t k = 0; k < a.rows; ++k) {
      const double av = a(k, i);
      const double* brow = b.row(k);
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_tn_omp(const Matrix& a, const Matrix& b, Matrix& c) {
  assert(a.rows == b.rows);
  c = Matrix(a.cols, b.cols);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::size_t i = 0; i < a.cols; ++i) {
    double* crow = c.row(i);
    for (std::size_t k = 0; k < a.rows; ++k) {
      const double av = a(k, i);
      const double* brow = b.row(k);
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c) {
  if (a.rows * a.cols * b.cols >= kParallelFlopCutoff)
    gemm_tn_omp(a, b, c);
  else
    gemm_tn_serial(a, b, c);
}

void column_minmax_serial(const Matrix& x, std::vector<double>& out_min, std::vector<double>& out_max) {
  out_min.assign(x.cols, 0.0);
  out_max.assign(x.cols, 0.0);
  for (std::size_t j = 0; j < x.cols; ++j) {
    double lo = x(0, j), hi = x(0, j);
    for (std::size_t i = 1; i < x.rows; ++i) {
      const double v = x(i, j);
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
    out_min[j] = lo;
    out_max[j] = hi;
  }
}

void column_minmax_omp(const Matrix& x, std::vector<double>& out_min, std::vector<double>& out_max) {
  out_min.assign(x.cols, 0.0);
  out_max.assign(x.cols, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::size_t j = 0; j < x.cols; ++j) {
    double lo = x(0, j), hi = x(0, j);
    for (std::size_t i = 1; i < x.rows; ++i) {
      const double v = x(i, j);
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
    out_min[j] = lo;
    out_max[j] = hi;
  }
}

void column_minmax(const Matrix& x, std::vector<double>& out_min, std::vector<double>& out_max) {
  if (x.rows * x.cols >= kParallelFlopCutoff)
    column_minmax_omp(x, out_min, out_max);
  else
    column_minmax_serial(x, out_min, out_max);
}

double pair_abs_dot_sum_serial(const Matrix& rows, const std::vector<std::uint32_t>& sel) {
  const std::size_t k = sel.size();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    const double* ri = rows.row(sel[i]);
    double partial = 0.0;
    for (std::size_t j = i + 1; j < k; ++j)
      partial += std::fabs(dot(ri, rows.row(sel[j]), rows.cols));
    total += partial;
  }
  return total;
}

double pair_abs_dot_sum_omp(const Matrix& rows, const std::vector<std::uint32_t>& sel) {
  const std::size_t k = sel.size();
  if (k < 2) return 0.0;
  std::vector<double> partials(k - 1, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8)
#endif
  for (std::size_t i = 0; i < k - 1; ++i) {
    const double* ri = rows.row(sel[i]);
    double partial = 0.0;
    for (std::size_t j = i + 1; j < k; ++j)
      partial += std::fabs(dot(ri, rows.row(sel[j]), rows.cols));
    partials[i] = partial;
  }
  double total = 0.0;
  for (double p : partials) total += p;
  return total;
}

double pair_abs_dot_sum(const Matrix& rows, const std::vector<std::uint32_t>& sel) {
  const std::size_t k = sel.size();
  if (k < 2) return 0.0;
  if (k * (k - 1) / 2 * rows.cols >= kParallelFlopCutoff)
    return pair_abs_dot_sum_omp(rows, sel);
  return pair_abs_dot_sum_serial(rows, sel);
}

}  // namespace genesift::kernels
