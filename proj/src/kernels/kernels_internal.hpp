#pragma once
// Internal kernel tables shared between the dispatcher and the ISA
// translation units. Microkernels compute Ctile += Apanel * Bpanel on packed
// panels: Apanel is KC-major blocks of MR rows (a[kk*MR + i]), Bpanel is
// KC-major blocks of NR columns (b[kk*NR + j]).

#include <cstddef>

namespace tnt::kernels::detail {

struct MicroKernel {
  int mr;
  int nr;
  // ctile (mr x nr, row stride ldc) += sum_kk a[kk*mr+i] * b[kk*nr+j]
  void (*run)(std::size_t kc, const double* a, const double* b,
              double* c, std::size_t ldc);
};

struct Level1 {
  double (*dot)(std::size_t, const double*, const double*);
  void (*axpy)(std::size_t, double, const double*, double*);
  void (*scal)(std::size_t, double, double*);
  double (*max_abs)(std::size_t, const double*);
};

MicroKernel scalar_microkernel();
Level1 scalar_level1();

#if defined(__x86_64__) || defined(_M_X64)
MicroKernel avx2_microkernel();
Level1 avx2_level1();
MicroKernel avx512_microkernel();
Level1 avx512_level1();
#endif

}  // namespace tnt::kernels::detail
