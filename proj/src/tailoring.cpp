#include "tnt/tailoring.hpp"

#include <cmath>

#include "tnt/kernels.hpp"

namespace tnt {

TailoredEnsemble scissor_and_stitch(const UniformMPS& L, const UniformMPS& R,
                                    const ThetaTensor& theta, double beta_target,
                                    double tau) {
  if (!(tau > 0.0)) throw Error("tau must be positive");
  if (beta_target < tau) throw Error("beta_target below one Trotter slice");
  if (L.phys() != theta.bond() || R.phys() != theta.bond())
    throw Error("boundary physical dimension does not match Theta bond");
  const std::int64_t K = std::llround(beta_target / tau);
  TailoredEnsemble e{L, R, theta, std::max<std::int64_t>(1, K), tau, 0.0};
  e.beta = static_cast<double>(e.K) * tau;
  return e;
}

void ScaledMatrix::rescale() {
  const double c = mat.max_abs();
  if (c == 0.0) throw Error("zero matrix in scaled power");
  if (c >= 0.5 && c <= 2.0) return;
  kernels::scal(mat.size(), 1.0 / c, mat.data());
  log_scale += std::log(c);
}

ScaledMatrix ScaledMatrix::multiply(const ScaledMatrix& a, const ScaledMatrix& b) {
  ScaledMatrix out{matmul(a.mat, b.mat), a.log_scale + b.log_scale};
  out.rescale();
  return out;
}

DenseTensor channel_matrix(const TailoredEnsemble& e) {
  // M[(ao,vo,bo),(ai,vi,bi)] = sum_{al,be} A[ai,al,ao] Theta[al,vi,vo,be] B[bi,be,bo]
  const std::size_t chiA = e.A.chi(), chiB = e.B.chi(), d2 = e.theta.data.dim(1);
  DenseTensor at = contract(e.A.tensor, e.theta.data, {{1, 0}});  // [ai,ao,vi,vo,be]
  DenseTensor m6 = contract(at, e.B.tensor, {{4, 1}});            // [ai,ao,vi,vo,bi,bo]
  DenseTensor mo = permute(m6, {1, 3, 5, 0, 2, 4});               // [ao,vo,bo,ai,vi,bi]
  const std::size_t n = chiA * d2 * chiB;
  DenseTensor out = reshape(mo, {n, n});
  if (!out.all_finite()) throw Error("non-finite channel matrix");
  return out;
}

DenseTensor overlap_matrix(const TailoredEnsemble& e) {
  const std::size_t chiA = e.A.chi(), chiB = e.B.chi();
  DenseTensor m4 = contract(e.A.tensor, e.B.tensor, {{1, 1}});  // [ai,ao,bi,bo]
  DenseTensor mo = permute(m4, {1, 3, 0, 2});                   // [ao,bo,ai,bi]
  return reshape(mo, {chiA * chiB, chiA * chiB});
}

ScaledMatrix scaled_power(const DenseTensor& m, std::int64_t K) {
  if (m.rank() != 2 || m.dim(0) != m.dim(1)) throw Error("scaled_power needs square matrix");
  if (K < 0) throw Error("negative power");
  const std::size_t n = m.dim(0);
  if (K == 0) {
    DenseTensor eye({n, n});
    for (std::size_t i = 0; i < n; ++i) eye(i, i) = 1.0;
    return {std::move(eye), 0.0};
  }
  ScaledMatrix base{m, 0.0};
  base.rescale();
  ScaledMatrix result;
  bool have = false;
  std::int64_t k = K;
  while (k > 0) {
    if (k & 1) {
      result = have ? ScaledMatrix::multiply(result, base) : base;
      have = true;
    }
    k >>= 1;
    if (k) base = ScaledMatrix::multiply(base, base);
  }
  return result;
}

LogTrace log_trace_power(const DenseTensor& m, std::int64_t K) {
  if (K < 1) throw Error("K must be >= 1");
  const ScaledMatrix p = scaled_power(m, K);
  double tr = 0.0;
  const std::size_t n = p.n();
  for (std::size_t i = 0; i < n; ++i) tr += p.mat.at(i * n + i);
  if (std::fabs(tr) < 1e-300) throw Error("trace vanished in log_trace_power");
  return {std::log(std::fabs(tr)) + p.log_scale, tr > 0.0 ? 1 : -1};
}

FreeEnergyReport free_energy(const TailoredEnsemble& e) {
  const DenseTensor M = channel_matrix(e);
  const DenseTensor m = overlap_matrix(e);
  const LogTrace num = log_trace_power(M, e.K);
  const LogTrace den = log_trace_power(m, e.K);
  if (num.sign <= 0) throw Error("unphysical ensemble: Tr M^K <= 0");
  if (den.sign <= 0) throw Error("unphysical ensemble: Tr m^K <= 0");
  FreeEnergyReport r;
  r.log_numerator = 0.5 * num.log_abs;
  r.log_denominator = 0.5 * den.log_abs;
  r.log_lambda = num.log_abs - den.log_abs;
  r.beta = e.beta;
  r.K = e.K;
  r.tau = e.tau;
  r.chi = std::max(e.A.chi(), e.B.chi());
  r.f = -(r.log_numerator - r.log_denominator) / r.beta;
  return r;
}

double thermal_energy(const TailoredEnsemble& e, std::int64_t delta_layers) {
  if (delta_layers < 1) throw Error("delta_layers must be >= 1");
  if (e.K - delta_layers < 1) throw Error("K too small for the energy stencil");
  const DenseTensor M = channel_matrix(e);
  const DenseTensor m = overlap_matrix(e);
  auto beta_f = [&](std::int64_t K) {
    const LogTrace num = log_trace_power(M, K);
    const LogTrace den = log_trace_power(m, K);
    if (num.sign <= 0 || den.sign <= 0) throw Error("unphysical ensemble in energy stencil");
    return -0.5 * (num.log_abs - den.log_abs);  // beta * f(per site)
  };
  const double bf_p = beta_f(e.K + delta_layers);
  const double bf_m = beta_f(e.K - delta_layers);
  return (bf_p - bf_m) / (2.0 * delta_layers * e.tau);
}

}  // namespace tnt
