#pragma once
// Brute-force exact diagonalization of small chains: dense Hamiltonians,
// partition functions, thermal energies, and dense Trotter layers. Ground
// truth for everything else in the library.
//
// Basis convention: site 0 is the most significant bit of the basis index,
// matching chained kron(site0, site1, ...). Spin-up (Sz=+1/2) is bit 0.

#include <optional>
#include <vector>

#include "tnt/models.hpp"
#include "tnt/tensor.hpp"

namespace tnt {

enum class Boundary { periodic, open };

struct DenseChain {
  int n_sites = 0;
  Boundary boundary = Boundary::periodic;
  DenseTensor hamiltonian;                          // 2^n x 2^n symmetric
  mutable std::optional<std::vector<double>> spectrum;  // ascending, cached

  const std::vector<double>& eigenvalues() const;   // computes and caches
};

// Embed a two-site operator g (d^2 x d^2) acting on sites (a, b) of an
// n-site chain into the full 2^n space.
DenseTensor embed_two_site(const DenseTensor& g, int n_sites, int a, int b);

DenseChain dense_hamiltonian(const ModelSpec& spec, int n_sites, Boundary boundary);

double free_energy_ed(const DenseChain& chain, double T);    // f per site
double thermal_energy_ed(const DenseChain& chain, double T); // E per site

// exp(-tau/2 H_A) exp(-tau H_B) exp(-tau/2 H_A) on a periodic ring, n even;
// A-bonds (2j,2j+1), B-bonds (2j+1,2j+2 mod n).
DenseTensor trotter_layer_dense(const ModelSpec& spec, int n_sites, double tau);

// Full symmetric spectrum, ascending. Exploits exact U(1)/parity block
// structure of the matrix when present (detected from the sparsity pattern);
// the blocks are still diagonalized by dense LAPACK.
std::vector<double> symmetric_spectrum(const DenseTensor& h);

}  // namespace tnt
