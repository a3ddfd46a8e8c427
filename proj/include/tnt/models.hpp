#pragma once
// Spin-1/2 operators, two-site Hamiltonian terms for the benchmark chains,
// and imaginary-time gates exp(-tau*h).
//
// Spin normalization: S operators have eigenvalues +-1/2 (the transverse
// Ising chain is then critical at h = 0.5). All arithmetic is real: S^y is
// never materialized; the XY exchange is built as (S+ S- + S- S+)/2 and the
// imaginary part of S^y is kept only for diagnostics.
//
// Two-site convention: a gate G on sites (p left, q right) is the d^2 x d^2
// matrix G[(op*d+oq),(ip*d+iq)] = <op oq|G|ip iq>; kron(P, Q) places P on
// the left site.

#include <optional>
#include <string>

#include "tnt/tensor.hpp"

namespace tnt {

struct SpinOperators {
  std::size_t d = 2;
  DenseTensor sx, sy_imagpart, sz;  // d x d; S^y = i * sy_imagpart
  static SpinOperators spin_half();
};

DenseTensor kron(const DenseTensor& a, const DenseTensor& b);

struct ModelSpec {
  enum class Kind { TransverseIsing, XY, CustomTwoSite };
  Kind kind = Kind::TransverseIsing;
  double h = 0.5;                       // field (TransverseIsing only)
  std::optional<DenseTensor> custom;    // d^2 x d^2 symmetric (CustomTwoSite)

  static ModelSpec ising(double h) { return {Kind::TransverseIsing, h, std::nullopt}; }
  static ModelSpec xy() { return {Kind::XY, 0.0, std::nullopt}; }
  static ModelSpec custom_two_site(DenseTensor m);
  // "ising:h=0.5" | "xy" | "custom:<path>"
  static ModelSpec parse(const std::string& s);
  std::string to_string() const;
};

// Two-site term h_{n,n+1}; the on-site field is split symmetrically between
// the two bonds touching a site (h/2 each), so a periodic ring of terms
// reproduces -h * sum S^z exactly.
DenseTensor hamiltonian_term(const ModelSpec& spec);

struct TwoSiteGate {
  double tau = 0.0;
  DenseTensor matrix;  // d^2 x d^2, symmetric positive definite
};

TwoSiteGate gate(const DenseTensor& term, double tau);

}  // namespace tnt
