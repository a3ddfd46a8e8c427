// AVX-512F variants (zmm FMA only, no subset beyond F required).
#include "kernels_internal.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

namespace tnt::kernels::detail {

namespace {

constexpr int kMr = 8;
constexpr int kNr = 16;

// 8x16 tile: 16 zmm accumulators + 2 B vectors + 1 broadcast.
void mk_avx512(std::size_t kc, const double* a, const double* b,
               double* c, std::size_t ldc) {
  __m512d acc[kMr][2];
  for (int i = 0; i < kMr; ++i) {
    acc[i][0] = _mm512_setzero_pd();
    acc[i][1] = _mm512_setzero_pd();
  }
  for (std::size_t kk = 0; kk < kc; ++kk) {
    const __m512d b0 = _mm512_loadu_pd(b + kk * kNr);
    const __m512d b1 = _mm512_loadu_pd(b + kk * kNr + 8);
    const double* ak = a + kk * kMr;
    for (int i = 0; i < kMr; ++i) {
      const __m512d ai = _mm512_set1_pd(ak[i]);
      acc[i][0] = _mm512_fmadd_pd(ai, b0, acc[i][0]);
      acc[i][1] = _mm512_fmadd_pd(ai, b1, acc[i][1]);
    }
  }
  for (int i = 0; i < kMr; ++i) {
    double* ci = c + i * ldc;
    _mm512_storeu_pd(ci, _mm512_add_pd(_mm512_loadu_pd(ci), acc[i][0]));
    _mm512_storeu_pd(ci + 8, _mm512_add_pd(_mm512_loadu_pd(ci + 8), acc[i][1]));
  }
}

double dot_avx512(std::size_t n, const double* x, const double* y) {
  __m512d s0 = _mm512_setzero_pd(), s1 = _mm512_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    s0 = _mm512_fmadd_pd(_mm512_loadu_pd(x + i), _mm512_loadu_pd(y + i), s0);
    s1 = _mm512_fmadd_pd(_mm512_loadu_pd(x + i + 8), _mm512_loadu_pd(y + i + 8), s1);
  }
  double r = _mm512_reduce_add_pd(_mm512_add_pd(s0, s1));
  for (; i < n; ++i) r += x[i] * y[i];
  return r;
}

void axpy_avx512(std::size_t n, double alpha, const double* x, double* y) {
  const __m512d va = _mm512_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm512_storeu_pd(y + i, _mm512_fmadd_pd(va, _mm512_loadu_pd(x + i),
                                            _mm512_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scal_avx512(std::size_t n, double alpha, double* x) {
  const __m512d va = _mm512_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm512_storeu_pd(x + i, _mm512_mul_pd(va, _mm512_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

double max_abs_avx512(std::size_t n, const double* x) {
  __m512d vm = _mm512_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    vm = _mm512_max_pd(vm, _mm512_abs_pd(_mm512_loadu_pd(x + i)));
  double m = _mm512_reduce_max_pd(vm);
  for (; i < n; ++i) m = std::max(m, std::fabs(x[i]));
  return m;
}

}  // namespace

MicroKernel avx512_microkernel() { return {kMr, kNr, mk_avx512}; }

Level1 avx512_level1() {
  return {dot_avx512, axpy_avx512, scal_avx512, max_abs_avx512};
}

}  // namespace tnt::kernels::detail

#endif  // x86_64
