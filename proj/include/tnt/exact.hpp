#pragma once
// Analytic free energies for the benchmark chains via Jordan-Wigner free
// fermions, evaluated by Gauss-Legendre quadrature.
//
// In this spin normalization (S eigenvalues +-1/2) the transverse Ising
// chain H = sum SxSx - h sum Sz maps to a free-fermion band
//   eps(k) = 2 sqrt(1/16 + h^2/4 - (h/4) cos k),  k in [0, pi],
// critical at h = 0.5, and f(T) = -(T/pi) int_0^pi ln(2 cosh(eps/2T)) dk.
// The XY chain maps to free fermions with band cos(k) and the same ln-2cosh
// form with eps(k) = cos k. Both are cross-validated against the ED oracle.

#include <functional>

#include "tnt/models.hpp"

namespace tnt {

struct Quadrature {
  std::vector<double> nodes;    // on [a, b]
  std::vector<double> weights;
};

Quadrature gauss_legendre(int npoints, double a, double b);

// ln(2 cosh x), overflow-safe for |x| up to ~1e308
double ln_2cosh(double x);

// f(T) with quadrature refined (points doubled) until the change is below
// 1e-13; starts from `points` (default 2000).
double ising_free_energy(double h, double T, int points = 2000);
double xy_free_energy(double T, int points = 2000);

double ising_ground_energy(double h, int points = 4000);
double xy_ground_energy(int points = 4000);

// |f - f_exact| / |f_exact|
double delta_f(double f, double f_exact);

struct AnalyticBaseline {
  ModelSpec model;
  int quadrature_points = 2000;
  double e_ground = 0.0;
  std::function<double(double)> f_exact;

  static AnalyticBaseline make(const ModelSpec& model);
};

}  // namespace tnt
