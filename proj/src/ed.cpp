#include "tnt/ed.hpp"

#include <lapacke.h>

#include <algorithm>
#include <bit>
#include <cmath>

#include "tnt/kernels.hpp"

namespace tnt {

DenseTensor embed_two_site(const DenseTensor& g, int n_sites, int a, int b) {
  if (g.rank() != 2 || g.dim(0) != 4 || g.dim(1) != 4) throw Error("embed: need 4x4 gate");
  if (a == b || a < 0 || b < 0 || a >= n_sites || b >= n_sites) throw Error("embed: bad sites");
  const std::size_t dim = std::size_t{1} << n_sites;
  const int sa = n_sites - 1 - a, sb = n_sites - 1 - b;  // bit positions
  DenseTensor out({dim, dim});
  for (std::size_t s = 0; s < dim; ++s) {
    const std::size_t ia = (s >> sa) & 1, ib = (s >> sb) & 1;
    const std::size_t base = s & ~(std::size_t{1} << sa) & ~(std::size_t{1} << sb);
    for (std::size_t oa = 0; oa < 2; ++oa)
      for (std::size_t ob = 0; ob < 2; ++ob) {
        const double v = g.at((oa * 2 + ob) * 4 + ia * 2 + ib);
        if (v == 0.0) continue;
        const std::size_t t = base | (oa << sa) | (ob << sb);
        out.at(t * dim + s) += v;
      }
  }
  return out;
}

DenseChain dense_hamiltonian(const ModelSpec& spec, int n_sites, Boundary boundary) {
  if (n_sites < 2) throw Error("need at least 2 sites");
  if (boundary == Boundary::periodic && n_sites < 3)
    throw Error("periodic chain needs at least 3 sites (bond double counting)");
  if (n_sites > 14) throw Error("dense chain capped at 14 sites");
  const DenseTensor term = hamiltonian_term(spec);
  const std::size_t dim = std::size_t{1} << n_sites;
  DenseTensor h({dim, dim});
  const int nb = boundary == Boundary::periodic ? n_sites : n_sites - 1;
  for (int i = 0; i < nb; ++i) {
    DenseTensor e = embed_two_site(term, n_sites, i, (i + 1) % n_sites);
    kernels::axpy(h.size(), 1.0, e.data(), h.data());
  }
  return {n_sites, boundary, std::move(h), std::nullopt};
}

namespace {

std::vector<double> dsyevd_values(std::vector<double>& a, std::size_t n) {
  std::vector<double> w(n);
  const int info = LAPACKE_dsyevd(LAPACK_ROW_MAJOR, 'N', 'U', static_cast<lapack_int>(n),
                                  a.data(), static_cast<lapack_int>(n), w.data());
  if (info != 0) throw Error("dsyevd failed (info=" + std::to_string(info) + ")");
  return w;
}

// Quantum-number blocking: q(s) = popcount(s) if the sparsity pattern allows,
// else popcount parity, else a single block.
std::vector<double> blocked_spectrum(const DenseTensor& h) {
  const std::size_t n = h.dim(0);
  bool sz_ok = true, parity_ok = true;
  for (std::size_t i = 0; i < n && (sz_ok || parity_ok); ++i) {
    const double* row = h.data() + i * n;
    const int pi = std::popcount(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (row[j] == 0.0) continue;
      const int pj = std::popcount(j);
      if (pi != pj) sz_ok = false;
      if ((pi ^ pj) & 1) parity_ok = false;
      if (!sz_ok && !parity_ok) break;
    }
  }
  auto q = [&](std::size_t s) -> int {
    if (sz_ok) return std::popcount(s);
    if (parity_ok) return std::popcount(s) & 1;
    return 0;
  };
  const int nq = sz_ok ? 65 : (parity_ok ? 2 : 1);
  std::vector<std::vector<std::size_t>> sectors(nq);
  for (std::size_t s = 0; s < n; ++s) sectors[q(s)].push_back(s);
  std::vector<double> w;
  w.reserve(n);
  for (const auto& idx : sectors) {
    if (idx.empty()) continue;
    const std::size_t m = idx.size();
    std::vector<double> block(m * m);
    for (std::size_t i = 0; i < m; ++i) {
      const double* row = h.data() + idx[i] * n;
      for (std::size_t j = 0; j < m; ++j) block[i * m + j] = row[idx[j]];
    }
    auto bw = dsyevd_values(block, m);
    w.insert(w.end(), bw.begin(), bw.end());
  }
  std::sort(w.begin(), w.end());
  return w;
}

}  // namespace

std::vector<double> symmetric_spectrum(const DenseTensor& h) {
  if (h.rank() != 2 || h.dim(0) != h.dim(1)) throw Error("spectrum needs square matrix");
  return blocked_spectrum(h);
}

const std::vector<double>& DenseChain::eigenvalues() const {
  if (!spectrum) spectrum = symmetric_spectrum(hamiltonian);
  return *spectrum;
}

double free_energy_ed(const DenseChain& chain, double T) {
  if (!(T > 0.0)) throw Error("T must be positive");
  const auto& w = chain.eigenvalues();
  const double e0 = w.front();
  double z = 0.0;
  for (double e : w) z += std::exp(-(e - e0) / T);
  const double lnz = -e0 / T + std::log(z);
  return -T * lnz / chain.n_sites;
}

double thermal_energy_ed(const DenseChain& chain, double T) {
  if (!(T > 0.0)) throw Error("T must be positive");
  const auto& w = chain.eigenvalues();
  const double e0 = w.front();
  double z = 0.0, ez = 0.0;
  for (double e : w) {
    const double b = std::exp(-(e - e0) / T);
    z += b;
    ez += e * b;
  }
  return ez / z / chain.n_sites;
}

DenseTensor trotter_layer_dense(const ModelSpec& spec, int n_sites, double tau) {
  if (n_sites % 2 != 0 || n_sites < 2) throw Error("trotter layer needs even n_sites");
  if (n_sites > 12) throw Error("dense trotter layer capped at 12 sites");
  const DenseTensor term = hamiltonian_term(spec);
  const DenseTensor gh = gate(term, tau / 2.0).matrix;
  const DenseTensor gf = gate(term, tau).matrix;
  // A-layer: tensor product of half gates on (0,1)(2,3)...
  DenseTensor ga(std::vector<std::size_t>{1, 1}, std::vector<double>{1.0});
  for (int j = 0; j < n_sites / 2; ++j) ga = kron(ga, gh);
  // B-layer: product of embedded full gates on (1,2)(3,4)...(n-1,0)
  const std::size_t dim = std::size_t{1} << n_sites;
  DenseTensor gb;
  for (int j = 0; j < n_sites / 2; ++j) {
    DenseTensor e = embed_two_site(gf, n_sites, 2 * j + 1, (2 * j + 2) % n_sites);
    gb = (j == 0) ? std::move(e) : matmul(gb, e);
  }
  (void)dim;
  return matmul(matmul(ga, gb), ga);
}

}  // namespace tnt
