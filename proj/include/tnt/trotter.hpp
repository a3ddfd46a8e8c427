#pragma once
// The single inequivalent bulk tensor of the square network built from a
// second-order Trotter step, and its dense-layer validation.
//
// Geometry (one layer, ring of N sites, N even): half gates exp(-tau/2 h)
// act on bonds (2j, 2j+1) first and last; the full gate exp(-tau h) on bonds
// (2j+1, 2j+2 mod N) is split by SVD across the bond. The cell of Theta is
// the site pair (2j, 2j+1):
//
//   Theta[alpha, vin, vout, beta], dims (r, d^2, d^2, r)
//     vin  = (ip, iq) inputs of the bottom half gate (flattened ip*d + iq)
//     vout = (op, oq) outputs of the top half gate
//     alpha = SVD bond of the full gate on the left  (its vR half acts on p)
//     beta  = SVD bond of the full gate on the right (its vL half acts on q)
//
// A periodic row of N/2 Theta tensors contracted over alpha/beta reproduces
// the dense layer exp(-tau/2 H_A) exp(-tau H_B) exp(-tau/2 H_A); this is
// checked by validate_theta_row against the exact-diagonalization oracle and
// frozen by a regression test.

#include "tnt/models.hpp"
#include "tnt/tensor.hpp"

namespace tnt {

struct SplitGate {
  DenseTensor vL;  // (d, d, r): [(out,in), bond] left-site factor, sqrt(S) absorbed
  DenseTensor vR;  // (d, d, r): [(out,in), bond] right-site factor, sqrt(S) absorbed
  std::size_t rank = 0;
};

SplitGate split_gate(const TwoSiteGate& g, double cutoff = 1e-14);

struct ThetaTensor {
  DenseTensor data;  // (r, d^2, d^2, r) as documented above
  double tau = 0.0;
  ModelSpec model;
  std::size_t bond() const { return data.dim(0); }
};

ThetaTensor build_theta(const ModelSpec& model, double tau, double cutoff = 1e-14);

// Contracts a periodic row of n_sites/2 Theta tensors into the dense layer
// operator and returns the max elementwise deviation relative to the dense
// Trotter oracle. n_sites even, <= 6 for the 1e-12 contract (dense cost).
double validate_theta_row(const ThetaTensor& theta, int n_sites);

// Row of n/2 Theta tensors as a dense 2^n x 2^n operator (test utility).
DenseTensor theta_row_dense(const ThetaTensor& theta, int n_sites);

}  // namespace tnt
