// Timing comparison of the serial reference kernels against their OpenMP
// counterparts; the two must agree bit for bit, so this only measures speed.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "genesift/kernels.hpp"
#include "genesift/rng.hpp"

using namespace genesift;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Matrix m(rows, cols);
  Rng rng(seed);
  for (double& v : m.data) v = rng.next_uniform(-1.0, 1.0);
  return m;
}

template <typename Fn>
double time_best_of(int reps, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

void report(const char* name, double flops, double serial_s, double parallel_s) {
  std::printf("%-28s %10.3f ms %10.3f ms %8.2fx %9.2f MFLOP/s\n", name, serial_s * 1e3,
              parallel_s * 1e3, serial_s / parallel_s, flops / parallel_s / 1e6);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (built without OpenMP)\n");
#endif
  std::printf("%-28s %13s %13s %9s %12s\n", "kernel", "serial", "parallel", "speedup", "rate");

  {
    const std::size_t n = 256, k = 512, m = 256;
    const Matrix a = random_matrix(n, k, 1);
    const Matrix b = random_matrix(m, k, 2);
    Matrix c;
    const double serial_s = time_best_of(5, [&] { kernels::gemm_nt_serial(a, b, c); });
    const double parallel_s = time_best_of(5, [&] { kernels::gemm_nt_omp(a, b, c); });
    report("gemm_nt 256x512 * 256x512^T", 2.0 * n * k * m, serial_s, parallel_s);
  }
  {
    const std::size_t n = 256, k = 256, m = 512;
    const Matrix a = random_matrix(n, k, 3);
    const Matrix b = random_matrix(k, m, 4);
    Matrix c;
    const double serial_s = time_best_of(5, [&] { kernels::gemm_nn_serial(a, b, c); });
    const double parallel_s = time_best_of(5, [&] { kernels::gemm_nn_omp(a, b, c); });
    report("gemm_nn 256x256 * 256x512", 2.0 * n * k * m, serial_s, parallel_s);
  }
  {
    const std::size_t k = 512, n = 256, m = 256;
    const Matrix a = random_matrix(k, n, 5);
    const Matrix b = random_matrix(k, m, 6);
    Matrix c;
    const double serial_s = time_best_of(5, [&] { kernels::gemm_tn_serial(a, b, c); });
    const double parallel_s = time_best_of(5, [&] { kernels::gemm_tn_omp(a, b, c); });
    report("gemm_tn 512x256^T * 512x256", 2.0 * n * k * m, serial_s, parallel_s);
  }
  {
    const std::size_t d = 1024, n = 256;
    const Matrix z = random_matrix(d, n, 7);
    std::vector<std::uint32_t> sel(d);
    for (std::uint32_t i = 0; i < d; ++i) sel[i] = i;
    volatile double sink = 0.0;
    const double serial_s = time_best_of(3, [&] { sink = kernels::pair_abs_dot_sum_serial(z, sel); });
    const double parallel_s = time_best_of(3, [&] { sink = kernels::pair_abs_dot_sum_omp(z, sel); });
    (void)sink;
    report("pair_abs_dot_sum d=1024", 2.0 * n * d * (d - 1) / 2.0, serial_s, parallel_s);
  }
  {
    const std::size_t rows = 2048, cols = 4096;
    const Matrix x = random_matrix(rows, cols, 8);
    std::vector<double> lo, hi;
    const double serial_s = time_best_of(5, [&] { kernels::column_minmax_serial(x, lo, hi); });
    const double parallel_s = time_best_of(5, [&] { kernels::column_minmax_omp(x, lo, hi); });
    report("column_minmax 2048x4096", static_cast<double>(rows * cols), serial_s, parallel_s);
  }
  return 0;
}
