#pragma once

#include <cstdint>
#include <vector>

#include "genesift/matrix.hpp"

namespace genesift::kernels {

// Every kernel comes in a serial reference flavor and an OpenMP flavor. The
// parallel versions assign each output element (or each fixed partial sum) to
// exactly one thread and keep the per-element accumulation order identical to
// the serial code, so the two flavors are bit-identical at any thread count.
// Tests and the bench_kernels tool compare them directly.

// c = a * b^T   (a: n x k, b: m x k, c: n x m)
void gemm_nt_serial(const Matrix& a, const Matrix& b, Matrix& c);
void gemm_nt_omp(const Matrix& a, const Matrix& b, Matrix& c);
void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c);

// c = a * b     (a: n x k, b: k x m, c: n x m)
void gemm_nn_serial(const Matrix& a, const Matrix& b, Matrix& c);
void gemm_nn_omp(const Matrix& a, const Matrix& b, Matrix& c);
void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c);

// c = a^T * b   (a: k x n, b: k x m, c: n x m)
void gemm_tn_serial(const Matrix& a, const Matrix& b, Matrix& c);
void gemm_tn_omp(const Matrix& a, const Matrix& b, Matrix& c);
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c);

// Sum over index pairs i < j of |dot(rows[sel[i]], rows[sel[j]])| where
// `rows` holds one vector per row. Partial sums are grouped per i and
// combined in index order, so the parallel flavor matches the serial one
// bit for bit.
double pair_abs_dot_sum_serial(const Matrix& rows, const std::vector<std::uint32_t>& sel);
double pair_abs_dot_sum_omp(const Matrix& rows, const std::vector<std::uint32_t>& sel);
double pair_abs_dot_sum(const Matrix& rows, const std::vector<std::uint32_t>& sel);

// Column-wise min/max of an n x d matrix, written to out_min/out_max (size d).
void column_minmax_serial(const Matrix& x, std::vector<double>& out_min, std::vector<double>& out_max);
void column_minmax_omp(const Matrix& x, std::vector<double>& out_min, std::vector<double>& out_max);
void column_minmax(const Matrix& x, std::vector<double>& out_min, std::vector<double>& out_max);

}  // namespace genesift::kernels
