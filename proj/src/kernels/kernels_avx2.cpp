// AVX2+FMA variants. This TU is compiled with -mavx2 -mfma; it is only
// entered after the dispatcher has verified CPU support.
#include "kernels_internal.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

namespace tnt::kernels::detail {

namespace {

constexpr int kMr = 6;
constexpr int kNr = 8;

// 6x8 tile: 12 ymm accumulators, classic BLIS shape.
void mk_avx2(std::size_t kc, const double* a, const double* b,
             double* c, std::size_t ldc) {
  __m256d c00 = _mm256_setzero_pd(), c01 = _mm256_setzero_pd();
  __m256d c10 = _mm256_setzero_pd(), c11 = _mm256_setzero_pd();
  __m256d c20 = _mm256_setzero_pd(), c21 = _mm256_setzero_pd();
  __m256d c30 = _mm256_setzero_pd(), c31 = _mm256_setzero_pd();
  __m256d c40 = _mm256_setzero_pd(), c41 = _mm256_setzero_pd();
  __m256d c50 = _mm256_setzero_pd(), c51 = _mm256_setzero_pd();
  for (std::size_t kk = 0; kk < kc; ++kk) {
    const __m256d b0 = _mm256_loadu_pd(b + kk * kNr);
    const __m256d b1 = _mm256_loadu_pd(b + kk * kNr + 4);
    const double* ak = a + kk * kMr;
    __m256d ai;
    ai = _mm256_set1_pd(ak[0]);
    c00 = _mm256_fmadd_pd(ai, b0, c00);
    c01 = _mm256_fmadd_pd(ai, b1, c01);
    ai = _mm256_set1_pd(ak[1]);
    c10 = _mm256_fmadd_pd(ai, b0, c10);
    c11 = _mm256_fmadd_pd(ai, b1, c11);
    ai = _mm256_set1_pd(ak[2]);
    c20 = _mm256_fmadd_pd(ai, b0, c20);
    c21 = _mm256_fmadd_pd(ai, b1, c21);
    ai = _mm256_set1_pd(ak[3]);
    c30 = _mm256_fmadd_pd(ai, b0, c30);
    c31 = _mm256_fmadd_pd(ai, b1, c31);
    ai = _mm256_set1_pd(ak[4]);
    c40 = _mm256_fmadd_pd(ai, b0, c40);
    c41 = _mm256_fmadd_pd(ai, b1, c41);
    ai = _mm256_set1_pd(ak[5]);
    c50 = _mm256_fmadd_pd(ai, b0, c50);
    c51 = _mm256_fmadd_pd(ai, b1, c51);
  }
  const __m256d* acc[kMr][2] = {{&c00, &c01}, {&c10, &c11}, {&c20, &c21},
                                {&c30, &c31}, {&c40, &c41}, {&c50, &c51}};
  for (int i = 0; i < kMr; ++i) {
    double* ci = c + i * ldc;
    _mm256_storeu_pd(ci, _mm256_add_pd(_mm256_loadu_pd(ci), *acc[i][0]));
    _mm256_storeu_pd(ci + 4, _mm256_add_pd(_mm256_loadu_pd(ci + 4), *acc[i][1]));
  }
}

double dot_avx2(std::size_t n, const double* x, const double* y) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), s1);
  }
  __m256d s = _mm256_add_pd(s0, s1);
  alignas(32) double t[4];
  _mm256_store_pd(t, s);
  double r = t[0] + t[1] + t[2] + t[3];
  for (; i < n; ++i) r += x[i] * y[i];
  return r;
}

void axpy_avx2(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scal_avx2(std::size_t n, double alpha, double* x) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

double max_abs_avx2(std::size_t n, const double* x) {
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  __m256d vm = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    vm = _mm256_max_pd(vm, _mm256_and_pd(mask, _mm256_loadu_pd(x + i)));
  alignas(32) double t[4];
  _mm256_store_pd(t, vm);
  double m = std::max(std::max(t[0], t[1]), std::max(t[2], t[3]));
  for (; i < n; ++i) m = std::max(m, std::fabs(x[i]));
  return m;
}

}  // namespace

MicroKernel avx2_microkernel() { return {kMr, kNr, mk_avx2}; }

Level1 avx2_level1() { return {dot_avx2, axpy_avx2, scal_avx2, max_abs_avx2}; }

}  // namespace tnt::kernels::detail

#endif  // x86_64
