#pragma once
// Boundary MPS of the infinite square network: dominant eigen-MPS of the
// column transfer MPO, computed by MPO-application power iteration with
// canonicalization and truncation.
//
// MPS tensor layout: (bond_in, phys, bond_out); the MPS runs along the
// imaginary-time direction, its physical leg carries the horizontal Theta
// bond (dimension r = theta.bond()). Applying the MPO joins Theta's vertical
// leg to the MPS bond: new bond index = v * chi + old (v slower).

#include <cstdint>
#include <optional>

#include "tnt/tensor.hpp"
#include "tnt/trotter.hpp"

namespace tnt {

enum class Side : std::uint8_t { L, R };

struct UniformMPS {
  DenseTensor tensor;  // (chi, phys, chi)
  Side side = Side::R;

  std::size_t chi() const { return tensor.dim(0); }
  std::size_t phys() const { return tensor.dim(1); }
};

struct CanonicalData {
  std::vector<double> schmidt_spectrum;  // nonincreasing, sum of squares = 1
  DenseTensor left_env;                  // identity in the canonical gauge
  DenseTensor right_env;                 // diag(schmidt^2) in the canonical gauge
  double transfer_eigenvalue = 1.0;      // dominant eigenvalue before rescaling
};

// Left/right dominant fixed points of the MPS transfer map, by Arnoldi
// iteration on the D^2-dimensional map. v0 warm-starts the solve.
struct TransferFixedPoint {
  double eigenvalue = 0.0;
  DenseTensor env;      // D x D, symmetric, unit Frobenius norm, trace > 0
  double residual = 0.0;
};
TransferFixedPoint transfer_fixed_point(const DenseTensor& mps3, Side which,
                                        const DenseTensor* v0 = nullptr,
                                        double tol = 1e-13, int max_matvecs = 4000);

struct CanonicalizeOptions {
  const DenseTensor* left0 = nullptr;   // warm starts
  const DenseTensor* right0 = nullptr;
  double fp_tol = 1e-13;
  // Probe the subdominant transfer eigenvalue and reject a (near-)degenerate
  // dominant one (relative gap < 1e-8). A transfer map that is proportional
  // to the identity on random probes is redundant but harmless and passes.
  bool check_gap = true;
};

// Gauge the uniform MPS left-canonical with a diagonal, sorted right
// environment. Throws when the transfer fixed point cannot be resolved
// (degenerate dominant eigenvalue); the error names the estimated gap.
std::pair<UniformMPS, CanonicalData> canonicalize(const UniformMPS& mps,
                                                  const CanonicalizeOptions& opts = {});

// One MPO application; output bond chi * d^2, untruncated.
UniformMPS apply_transfer_mpo(const UniformMPS& mps, const ThetaTensor& theta, Side side);

// Keep the chi_max largest Schmidt directions (input must be in the
// canonical gauge produced by canonicalize). discarded = sum of dropped
// squared Schmidt values.
struct TruncateResult {
  UniformMPS mps;
  double discarded_weight = 0.0;
};
TruncateResult truncate(const UniformMPS& mps, const CanonicalData& canonical,
                        std::size_t chi_max);

struct PowerOptions {
  std::uint64_t seed = 7;
  double fp_tol = 1e-13;
  std::optional<UniformMPS> init;   // default: random positive chi=1, grown
  bool require_convergence = true;  // throw when tol is not reached
};

struct PowerResult {
  UniformMPS left, right;
  int iterations_left = 0, iterations_right = 0;
  double final_delta_left = 0.0, final_delta_right = 0.0;
  std::vector<double> schmidt_left, schmidt_right;
};

// Iterate apply -> canonicalize -> truncate independently for both sides
// until the L2 change of the Schmidt spectrum (zero-padded) drops below tol.
PowerResult power_converge(const ThetaTensor& theta, std::size_t chi, double tol,
                           int max_iters, const PowerOptions& opts = {});

// Single-side driver used by power_converge and by warm-started refinement.
struct SideState {
  UniformMPS mps;
  std::vector<double> schmidt;
  DenseTensor l_env, r_env;  // warm starts for the next canonicalize
  double delta = 1.0;
  int iterations = 0;
};
SideState make_side_state(const ThetaTensor& theta, Side side, std::uint64_t seed,
                          const std::optional<UniformMPS>& init = std::nullopt);
void power_step(SideState& st, const ThetaTensor& theta, std::size_t chi, double fp_tol);

}  // namespace tnt
