#pragma once
// Dense double-precision kernels with runtime ISA dispatch.
//
// Every kernel has a scalar reference implementation and AVX2/AVX-512
// variants compiled in separate translation units. The active variant is
// picked once at startup from CPUID, or forced via the TNT_KERNELS
// environment variable ("scalar", "avx2", "avx512") or set_isa().
//
// Numerical contract: variants may differ from the scalar reference only by
// floating-point reassociation (relative deviation <= 1e-13 on normalized
// inputs). Results are bit-deterministic for a fixed variant regardless of
// the thread count: the k-accumulation order of every C element is fixed.

#include <cstddef>

namespace tnt::kernels {

enum class Isa { scalar, avx2, avx512 };

Isa active_isa();
void set_isa(Isa isa);          // throws if unsupported on this CPU
const char* isa_name(Isa isa);
bool isa_supported(Isa isa);

// Number of worker threads large GEMMs may use (default: hardware concurrency,
// capped at 8). Small problems always run single-threaded.
int max_threads();
void set_max_threads(int n);

// C (m x n) = A (m x k) * B (k x n); row-major with leading dimensions.
void gemm(std::size_t m, std::size_t n, std::size_t k,
          const double* a, std::size_t lda,
          const double* b, std::size_t ldb,
          double* c, std::size_t ldc);

// C += A * B
void gemm_acc(std::size_t m, std::size_t n, std::size_t k,
              const double* a, std::size_t lda,
              const double* b, std::size_t ldb,
              double* c, std::size_t ldc);

double dot(std::size_t n, const double* x, const double* y);
void axpy(std::size_t n, double alpha, const double* x, double* y);
void scal(std::size_t n, double alpha, double* x);
double max_abs(std::size_t n, const double* x);

}  // namespace tnt::kernels
