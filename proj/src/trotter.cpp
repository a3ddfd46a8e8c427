#include "tnt/trotter.hpp"

#include <cmath>

#include "tnt/ed.hpp"

namespace tnt {

SplitGate split_gate(const TwoSiteGate& g, double cutoff) {
  const std::size_t d = 2;
  if (g.matrix.rank() != 2 || g.matrix.dim(0) != d * d)
    throw Error("split_gate expects a d^2 x d^2 gate");
  // regroup U[(o1 o2),(i1 i2)] -> R[(o1 i1),(o2 i2)]
  DenseTensor u4 = reshape(g.matrix, {d, d, d, d});
  DenseTensor r4 = permute(u4, {0, 2, 1, 3});
  auto svd = svd_truncated(r4, {0, 1}, {2, 3}, d * d, cutoff);
  const std::size_t r = svd.singular_values.size();
  DenseTensor vL = svd.left_factor;  // (d, d, r)
  DenseTensor vR({d, d, r});         // from right factor (r, d, d)
  for (std::size_t a = 0; a < r; ++a) {
    const double sq = std::sqrt(svd.singular_values[a]);
    for (std::size_t o = 0; o < d; ++o)
      for (std::size_t i = 0; i < d; ++i) {
        vL(o, i, a) *= sq;
        vR(o, i, a) = sq * svd.right_factor(a, o, i);
      }
  }
  return {std::move(vL), std::move(vR), r};
}

ThetaTensor build_theta(const ModelSpec& model, double tau, double cutoff) {
  if (!(tau > 0.0)) throw Error("build_theta needs tau > 0");
  const std::size_t d = 2;
  const DenseTensor term = hamiltonian_term(model);
  const TwoSiteGate half = gate(term, tau / 2.0);
  const SplitGate sg = split_gate(gate(term, tau), cutoff);
  const std::size_t r = sg.rank;

  // Gh[o, P, n, N]: half gate reshaped; vRt[a, n, m] = vR[n, m, a];
  // vLt[N, M, b] = vL; Theta = Gh_top * vRt * vLt * Gh_bot (prototype order).
  DenseTensor gh = reshape(half.matrix, {d, d, d, d});
  DenseTensor vRt = permute(sg.vR, {2, 0, 1});
  // T2[o,P,N,a,m] = sum_n Gh[o,P,n,N] vRt[a,n,m]
  DenseTensor t2 = contract(gh, vRt, {{2, 1}});  // [o,P,N,a,m]
  // T3[o,P,a,m,M,b] = sum_N T2[o,P,N,a,m] vL[N,M,b]
  DenseTensor t3 = contract(t2, sg.vL, {{2, 0}});  // [o,P,a,m,M,b]
  // T4[o,P,a,b,i,I] = sum_{m,M} T3 * Gh[m,M,i,I]
  DenseTensor t4 = contract(t3, gh, {{3, 0}, {4, 1}});  // [o,P,a,b,i,I]
  DenseTensor th = permute(t4, {2, 4, 5, 0, 1, 3});     // [a,i,I,o,P,b]
  ThetaTensor out{reshape(th, {r, d * d, d * d, r}), tau, model};
  if (!out.data.all_finite()) throw Error("non-finite Theta entries");
  return out;
}

DenseTensor theta_row_dense(const ThetaTensor& theta, int n_sites) {
  if (n_sites < 2 || n_sites % 2 != 0) throw Error("theta row needs even n_sites >= 2");
  const int ncell = n_sites / 2;
  const std::size_t r = theta.bond();
  DenseTensor strip = permute(theta.data, {0, 2, 1, 3});  // [a, out, in, b]
  for (int c = 1; c < ncell; ++c) {
    DenseTensor next = permute(theta.data, {0, 2, 1, 3});
    DenseTensor big = contract(strip, next, {{3, 0}});  // [a,o,i,p,j,b]
    big = permute(big, {0, 1, 3, 2, 4, 5});             // [a,o,p,i,j,b]
    strip = reshape(big, {r, strip.dim(1) * 4, strip.dim(2) * 4, r});
  }
  // trace the ring bond
  const std::size_t dim = strip.dim(1);
  DenseTensor row({dim, dim});
  for (std::size_t a = 0; a < r; ++a)
    for (std::size_t o = 0; o < dim; ++o)
      for (std::size_t i = 0; i < dim; ++i)
        row(o, i) += strip(a, o, i, a);
  return row;
}

double validate_theta_row(const ThetaTensor& theta, int n_sites) {
  DenseTensor row = theta_row_dense(theta, n_sites);
  DenseTensor dense = trotter_layer_dense(theta.model, n_sites, theta.tau);
  const double scale = dense.max_abs();
  double dev = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i)
    dev = std::max(dev, std::fabs(row.at(i) - dense.at(i)));
  return dev / scale;
}

}  // namespace tnt
