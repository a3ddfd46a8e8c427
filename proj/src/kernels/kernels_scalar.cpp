#include "kernels_internal.hpp"

#include <cmath>

namespace tnt::kernels::detail {

namespace {

constexpr int kMr = 4;
constexpr int kNr = 4;

void mk_scalar(std::size_t kc, const double* a, const double* b,
               double* c, std::size_t ldc) {
  double acc[kMr][kNr] = {};
  for (std::size_t kk = 0; kk < kc; ++kk) {
    const double* ak = a + kk * kMr;
    const double* bk = b + kk * kNr;
    for (int i = 0; i < kMr; ++i)
      for (int j = 0; j < kNr; ++j)
        acc[i][j] += ak[i] * bk[j];
  }
  for (int i = 0; i < kMr; ++i)
    for (int j = 0; j < kNr; ++j)
      c[i * ldc + j] += acc[i][j];
}

double dot_scalar(std::size_t n, const double* x, const double* y) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_scalar(std::size_t n, double alpha, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scal_scalar(std::size_t n, double alpha, double* x) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

double max_abs_scalar(std::size_t n, const double* x) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i]));
  return m;
}

}  // namespace

MicroKernel scalar_microkernel() { return {kMr, kNr, mk_scalar}; }

Level1 scalar_level1() {
  return {dot_scalar, axpy_scalar, scal_scalar, max_abs_scalar};
}

}  // namespace tnt::kernels::detail
