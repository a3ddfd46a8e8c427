#pragma once
// Scissor K layers from the infinite network, stitch them periodically along
// imaginary time, and evaluate lambda, f, and E through log-domain matrix
// powers.
//
// Channel matrix convention: M[row, col] with row = (a_out, v_out, b_out)
// and col = (a_in, v_in, b_in), flattened as (a * d2 + v) * chiB + b. The
// stitched sandwich is <L|T^|R> = Tr M^K; the boundary overlap <L|R> = Tr m^K
// with m[(a_out,b_out),(a_in,b_in)].
//
// Each Theta column covers two lattice sites, so the free energy per site is
//   f = -(ln Tr M^K - ln Tr m^K) / (2 beta),
// and log_lambda = ln Tr M^K - ln Tr m^K is ln(lambda) per column.

#include <cstdint>

#include "tnt/bmps.hpp"
#include "tnt/trotter.hpp"

namespace tnt {

struct TailoredEnsemble {
  UniformMPS A;  // left boundary tensor
  UniformMPS B;  // right boundary tensor
  ThetaTensor theta;
  std::int64_t K = 1;
  double tau = 0.0;
  double beta = 0.0;  // realized: K * tau
};

TailoredEnsemble scissor_and_stitch(const UniformMPS& L, const UniformMPS& R,
                                    const ThetaTensor& theta, double beta_target,
                                    double tau);

// Square matrix with an accumulated log scale; after every rescale the
// max-abs entry is 1 (inside the documented [1/2, 2] band).
struct ScaledMatrix {
  DenseTensor mat;       // (n, n)
  double log_scale = 0.0;

  std::size_t n() const { return mat.dim(0); }
  void rescale();
  static ScaledMatrix multiply(const ScaledMatrix& a, const ScaledMatrix& b);
};

DenseTensor channel_matrix(const TailoredEnsemble& e);  // (chiA*d2*chiB)^2
DenseTensor overlap_matrix(const TailoredEnsemble& e);  // (chiA*chiB)^2

struct LogTrace {
  double log_abs = 0.0;
  int sign = 1;
};

// ln Tr(m^K) by binary exponentiation over ScaledMatrix; fixed multiply
// order, deterministic. Throws on zero trace; the caller decides whether a
// negative sign is physical.
LogTrace log_trace_power(const DenseTensor& m, std::int64_t K);

// m^K as a ScaledMatrix (K >= 0; K = 0 gives the identity).
ScaledMatrix scaled_power(const DenseTensor& m, std::int64_t K);

struct FreeEnergyReport {
  double f = 0.0;           // free energy per site
  double log_lambda = 0.0;  // ln lambda per column (two sites)
  double log_numerator = 0.0;    // (1/2) ln Tr M^K   (per site)
  double log_denominator = 0.0;  // (1/2) ln Tr m^K   (per site)
  double beta = 0.0;
  std::int64_t K = 0;
  double tau = 0.0;
  std::size_t chi = 0;
};

FreeEnergyReport free_energy(const TailoredEnsemble& e);

// E = d(beta f)/d(beta) by a centered difference over K +- delta_layers at
// fixed tau.
double thermal_energy(const TailoredEnsemble& e, std::int64_t delta_layers);

}  // namespace tnt
