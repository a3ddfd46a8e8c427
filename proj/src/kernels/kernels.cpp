// Dispatcher and blocked GEMM driver (GotoBLAS-style packing).
#include "tnt/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "kernels_internal.hpp"

namespace tnt::kernels {

namespace {

using detail::Level1;
using detail::MicroKernel;

struct Active {
  Isa isa;
  MicroKernel mk;
  Level1 l1;
};

bool cpu_supports(Isa isa) {
#if defined(__x86_64__) || defined(_M_X64)
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2: return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    case Isa::avx512: return __builtin_cpu_supports("avx512f");
  }
#endif
  return isa == Isa::scalar;
}

Active make_active(Isa isa) {
#if defined(__x86_64__) || defined(_M_X64)
  if (isa == Isa::avx512) return {isa, detail::avx512_microkernel(), detail::avx512_level1()};
  if (isa == Isa::avx2) return {isa, detail::avx2_microkernel(), detail::avx2_level1()};
#endif
  return {Isa::scalar, detail::scalar_microkernel(), detail::scalar_level1()};
}

Isa detect_isa() {
  if (const char* env = std::getenv("TNT_KERNELS")) {
    std::string s(env);
    Isa want = Isa::scalar;
    if (s == "avx2") want = Isa::avx2;
    else if (s == "avx512") want = Isa::avx512;
    else if (s != "scalar") want = Isa::avx512;  // unknown value: fall through to auto
    if (s == "scalar" || s == "avx2" || s == "avx512") {
      if (cpu_supports(want)) return want;
      return Isa::scalar;
    }
  }
  if (cpu_supports(Isa::avx512)) return Isa::avx512;
  if (cpu_supports(Isa::avx2)) return Isa::avx2;
  return Isa::scalar;
}

Active& active() {
  static Active a = make_active(detect_isa());
  return a;
}

std::atomic<int> g_max_threads{
    std::clamp(static_cast<int>(std::thread::hardware_concurrency()), 1, 8)};

// Cache blocking. KC*NR and MR*KC panels stay L1/L2 resident.
constexpr std::size_t kKc = 256;
constexpr std::size_t kMc = 144;

void pack_a(const double* a, std::size_t lda, std::size_t mc, std::size_t kc,
            int mr, double* out) {
  // blocks of mr rows, column-major inside a block, zero-padded rows
  for (std::size_t i0 = 0; i0 < mc; i0 += mr) {
    const std::size_t ib = std::min<std::size_t>(mr, mc - i0);
    for (std::size_t kk = 0; kk < kc; ++kk) {
      for (std::size_t i = 0; i < ib; ++i) out[kk * mr + i] = a[(i0 + i) * lda + kk];
      for (std::size_t i = ib; i < static_cast<std::size_t>(mr); ++i) out[kk * mr + i] = 0.0;
    }
    out += kc * mr;
  }
}

void pack_b(const double* b, std::size_t ldb, std::size_t kc, std::size_t nc,
            int nr, double* out) {
  for (std::size_t j0 = 0; j0 < nc; j0 += nr) {
    const std::size_t jb = std::min<std::size_t>(nr, nc - j0);
    for (std::size_t kk = 0; kk < kc; ++kk) {
      for (std::size_t j = 0; j < jb; ++j) out[kk * nr + j] = b[kk * ldb + j0 + j];
      for (std::size_t j = jb; j < static_cast<std::size_t>(nr); ++j) out[kk * nr + j] = 0.0;
    }
    out += kc * nr;
  }
}

// One MC x NC block of C += packed panels; handles ragged tile edges through
// a stack tile so the microkernel always works on full MR x NR.
void run_block(const MicroKernel& mk, std::size_t mc, std::size_t nc,
               std::size_t kc, const double* ap, const double* bp,
               double* c, std::size_t ldc) {
  const int mr = mk.mr, nr = mk.nr;
  double tile[16 * 16];
  for (std::size_t i0 = 0, pi = 0; i0 < mc; i0 += mr, ++pi) {
    const std::size_t ib = std::min<std::size_t>(mr, mc - i0);
    const double* api = ap + pi * kc * mr;
    for (std::size_t j0 = 0, pj = 0; j0 < nc; j0 += nr, ++pj) {
      const std::size_t jb = std::min<std::size_t>(nr, nc - j0);
      const double* bpj = bp + pj * kc * nr;
      if (ib == static_cast<std::size_t>(mr) && jb == static_cast<std::size_t>(nr)) {
        mk.run(kc, api, bpj, c + i0 * ldc + j0, ldc);
      } else {
        std::memset(tile, 0, sizeof(double) * mr * nr);
        mk.run(kc, api, bpj, tile, nr);
        for (std::size_t i = 0; i < ib; ++i)
          for (std::size_t j = 0; j < jb; ++j)
            c[(i0 + i) * ldc + j0 + j] += tile[i * nr + j];
      }
    }
  }
}

void gemm_impl(std::size_t m, std::size_t n, std::size_t k,
               const double* a, std::size_t lda,
               const double* b, std::size_t ldb,
               double* c, std::size_t ldc, bool accumulate) {
  const Active& act = active();
  const MicroKernel mk = act.mk;
  if (!accumulate)
    for (std::size_t i = 0; i < m; ++i) std::memset(c + i * ldc, 0, sizeof(double) * n);
  if (m == 0 || n == 0 || k == 0) return;

  const int nthreads =
      (m * n * k >= (std::size_t{1} << 22))
          ? std::min(max_threads(), static_cast<int>((m + kMc - 1) / kMc))
          : 1;
  std::vector<double> bpack(kKc * ((n + mk.nr - 1) / mk.nr) * mk.nr);

  for (std::size_t k0 = 0; k0 < k; k0 += kKc) {
    const std::size_t kc = std::min(kKc, k - k0);
    pack_b(b + k0 * ldb, ldb, kc, n, mk.nr, bpack.data());
    auto work = [&](std::size_t ibegin, std::size_t iend) {
      std::vector<double> apack((kMc + mk.mr) * kKc);
      for (std::size_t i0 = ibegin; i0 < iend; i0 += kMc) {
        const std::size_t mc = std::min(kMc, iend - i0);
        pack_a(a + i0 * lda + k0, lda, mc, kc, mk.mr, apack.data());
        run_block(mk, mc, n, kc, apack.data(), bpack.data(), c + i0 * ldc, ldc);
      }
    };
    if (nthreads <= 1) {
      work(0, m);
    } else {
      // split m so that every thread owns whole MC panels; disjoint C rows
      std::vector<std::thread> pool;
      const std::size_t panels = (m + kMc - 1) / kMc;
      const std::size_t per = (panels + nthreads - 1) / nthreads;
      for (int t = 0; t < nthreads; ++t) {
        const std::size_t ibegin = std::min(m, t * per * kMc);
        const std::size_t iend = std::min(m, (t + 1) * per * kMc);
        if (ibegin < iend) pool.emplace_back(work, ibegin, iend);
      }
      for (auto& th : pool) th.join();
    }
  }
}

}  // namespace

Isa active_isa() { return active().isa; }

bool isa_supported(Isa isa) { return cpu_supports(isa); }

void set_isa(Isa isa) {
  if (!cpu_supports(isa)) throw std::runtime_error("requested ISA not supported on this CPU");
  active() = make_active(isa);
}

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::avx512: return "avx512";
  }
  return "?";
}

int max_threads() { return g_max_threads.load(); }

void set_max_threads(int n) { g_max_threads.store(std::clamp(n, 1, 64)); }

void gemm(std::size_t m, std::size_t n, std::size_t k, const double* a,
          std::size_t lda, const double* b, std::size_t ldb, double* c,
          std::size_t ldc) {
  gemm_impl(m, n, k, a, lda, b, ldb, c, ldc, false);
}

void gemm_acc(std::size_t m, std::size_t n, std::size_t k, const double* a,
              std::size_t lda, const double* b, std::size_t ldb, double* c,
              std::size_t ldc) {
  gemm_impl(m, n, k, a, lda, b, ldb, c, ldc, true);
}

double dot(std::size_t n, const double* x, const double* y) {
  return active().l1.dot(n, x, y);
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  active().l1.axpy(n, alpha, x, y);
}

void scal(std::size_t n, double alpha, double* x) { active().l1.scal(n, alpha, x); }

double max_abs(std::size_t n, const double* x) { return active().l1.max_abs(n, x); }

}  // namespace tnt::kernels
