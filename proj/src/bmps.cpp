#include "tnt/bmps.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "tnt/kernels.hpp"

namespace tnt {

namespace {

// y = E_L(x) or E_R(x) for the MPS transfer map; slices of the permuted
// tensors keep every GEMM plain row-major.
struct TransferMaps {
  std::size_t D, p;
  DenseTensor a_s;   // (p, D, D): A^s
  DenseTensor a_sT;  // (p, D, D): (A^s)^T

  explicit TransferMaps(const DenseTensor& t)
      : D(t.dim(0)), p(t.dim(1)), a_s(permute(t, {1, 0, 2})), a_sT(permute(t, {1, 2, 0})) {}

  void left(const double* x, double* y) const {  // y = sum_s (A^s)^T x A^s
    std::vector<double> tmp(D * D);
    std::fill(y, y + D * D, 0.0);
    for (std::size_t s = 0; s < p; ++s) {
      const double* as = a_s.data() + s * D * D;
      const double* asT = a_sT.data() + s * D * D;
      kernels::gemm(D, D, D, x, D, as, D, tmp.data(), D);
      kernels::gemm_acc(D, D, D, asT, D, tmp.data(), D, y, D);
    }
  }

  void right(const double* x, double* y) const {  // y = sum_s A^s x (A^s)^T
    std::vector<double> tmp(D * D);
    std::fill(y, y + D * D, 0.0);
    for (std::size_t s = 0; s < p; ++s) {
      const double* as = a_s.data() + s * D * D;
      const double* asT = a_sT.data() + s * D * D;
      kernels::gemm(D, D, D, x, D, asT, D, tmp.data(), D);
      kernels::gemm_acc(D, D, D, as, D, tmp.data(), D, y, D);
    }
  }
};

// Dominant eigenpair of a general linear map by restarted Arnoldi with a
// small dense Hessenberg eigensolve.
template <class MatVec>
bool arnoldi_dominant(MatVec&& mv, std::size_t n, std::vector<double>& v,
                      double& lambda, double tol, int max_matvecs,
                      double* gap_estimate = nullptr) {
  const int m = static_cast<int>(std::min<std::size_t>(n, 30));
  std::vector<double> V((m + 1) * n), H((m + 1) * m, 0.0), w(n);
  double nrm = std::sqrt(kernels::dot(n, v.data(), v.data()));
  if (!(nrm > 0.0)) {
    std::fill(v.begin(), v.end(), 1.0);
    nrm = std::sqrt(static_cast<double>(n));
  }
  for (std::size_t i = 0; i < n; ++i) V[i] = v[i] / nrm;
  int used = 0;
  while (used < max_matvecs) {
    int k = 0;
    std::fill(H.begin(), H.end(), 0.0);
    for (; k < m && used < max_matvecs; ++k, ++used) {
      mv(V.data() + k * n, w.data());
      for (int j = 0; j <= k; ++j) {
        const double h = kernels::dot(n, V.data() + j * n, w.data());
        H[j * m + k] = h;
        kernels::axpy(n, -h, V.data() + j * n, w.data());
      }
      // one re-orthogonalization pass keeps the basis clean
      for (int j = 0; j <= k; ++j) {
        const double h = kernels::dot(n, V.data() + j * n, w.data());
        H[j * m + k] += h;
        kernels::axpy(n, -h, V.data() + j * n, w.data());
      }
      const double hk = std::sqrt(kernels::dot(n, w.data(), w.data()));
      H[(k + 1) * m + k] = hk;
      if (hk < 1e-300) {
        ++k;
        break;
      }
      for (std::size_t i = 0; i < n; ++i) V[(k + 1) * n + i] = w[i] / hk;
    }
    // dense eigensolve of the k x k Hessenberg block
    std::vector<double> hk(k * k), wr(k), wi(k), vl(k * k), vr(k * k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) hk[i * k + j] = H[i * m + j];
    const int info = LAPACKE_dgeev(LAPACK_ROW_MAJOR, 'N', 'V', k, hk.data(), k,
                                   wr.data(), wi.data(), vl.data(), k, vr.data(), k);
    if (info != 0) throw Error("dgeev failed in Arnoldi");
    int best = 0, second = -1;
    for (int i = 1; i < k; ++i) {
      const double mag = std::hypot(wr[i], wi[i]);
      if (mag > std::hypot(wr[best], wi[best])) {
        second = best;
        best = i;
      } else if (second < 0 || mag > std::hypot(wr[second], wi[second])) {
        second = i;
      }
    }
    lambda = wr[best];
    if (gap_estimate) {
      const double m1 = std::hypot(wr[best], wi[best]);
      const double m2 = second >= 0 ? std::hypot(wr[second], wi[second]) : 0.0;
      *gap_estimate = m1 > 0.0 ? (m1 - m2) / m1 : 0.0;
    }
    // Ritz vector (real part of the best eigenvector)
    std::fill(v.begin(), v.end(), 0.0);
    for (int j = 0; j < k; ++j) kernels::axpy(n, vr[j * k + best], V.data() + j * n, v.data());
    const double vn = std::sqrt(kernels::dot(n, v.data(), v.data()));
    if (!(vn > 0.0)) return false;
    kernels::scal(n, 1.0 / vn, v.data());
    // residual ||F v - lambda v||
    mv(v.data(), w.data());
    kernels::axpy(n, -lambda, v.data(), w.data());
    const double res = std::sqrt(kernels::dot(n, w.data(), w.data()));
    if (res <= tol * std::max(1.0, std::fabs(lambda))) return true;
    for (std::size_t i = 0; i < n; ++i) V[i] = v[i];
  }
  return false;
}

}  // namespace

TransferFixedPoint transfer_fixed_point(const DenseTensor& mps3, Side which,
                                        const DenseTensor* v0, double tol,
                                        int max_matvecs) {
  const TransferMaps maps(mps3);
  const std::size_t D = maps.D;
  std::vector<double> v(D * D);
  if (v0 && v0->size() == D * D) {
    std::copy(v0->data(), v0->data() + D * D, v.begin());
  } else {
    for (std::size_t i = 0; i < D; ++i) v[i * D + i] = 1.0;
  }
  double lambda = 0.0, gap = 0.0;
  auto mv = [&](const double* x, double* y) {
    which == Side::L ? maps.left(x, y) : maps.right(x, y);
  };
  const bool ok = arnoldi_dominant(mv, D * D, v, lambda, tol, max_matvecs, &gap);
  if (!ok)
    throw Error("transfer fixed point did not converge: estimated relative gap " +
                std::to_string(gap) + " (degenerate dominant eigenvalue?)");
  DenseTensor env({D, D}, std::move(v));
  // symmetrize; the dominant eigenvector of a completely positive map is
  // symmetric up to solver noise
  for (std::size_t i = 0; i < D; ++i)
    for (std::size_t j = i + 1; j < D; ++j) {
      const double s = 0.5 * (env(i, j) + env(j, i));
      env(i, j) = env(j, i) = s;
    }
  double tr = 0.0;
  for (std::size_t i = 0; i < D; ++i) tr += env(i, i);
  if (tr < 0.0) kernels::scal(env.size(), -1.0, env.data());
  const double nrm = env.norm();
  if (nrm > 0.0) kernels::scal(env.size(), 1.0 / nrm, env.data());
  // residual after cleanup
  std::vector<double> w(D * D);
  mv(env.data(), w.data());
  kernels::axpy(D * D, -lambda, env.data(), w.data());
  const double res = std::sqrt(kernels::dot(D * D, w.data(), w.data()));
  return {lambda, std::move(env), res};
}

namespace {

// Subdominant-eigenvalue probe via deflated power iteration. Returns the
// estimated relative gap (can be slightly negative from rounding), or
// nullopt when the map acts as lambda*I on random probes (harmless
// redundancy).
std::optional<double> probe_gap(const TransferMaps& maps, Side which, double lambda1,
                                const DenseTensor& v1) {
  const std::size_t n = v1.size();
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> w(n), t(n);
  for (auto& x : w) x = u(rng);
  const double ov = kernels::dot(n, w.data(), v1.data());
  kernels::axpy(n, -ov, v1.data(), w.data());
  double nw = std::sqrt(kernels::dot(n, w.data(), w.data()));
  if (!(nw > 0.0)) return std::nullopt;
  kernels::scal(n, 1.0 / nw, w.data());
  auto mv = [&](const double* x, double* y) {
    which == Side::L ? maps.left(x, y) : maps.right(x, y);
  };
  mv(w.data(), t.data());
  // identity-like map: F w = lambda1 w already for a random probe
  {
    std::vector<double> r = t;
    kernels::axpy(n, -lambda1, w.data(), r.data());
    if (std::sqrt(kernels::dot(n, r.data(), r.data())) <= 1e-10 * std::fabs(lambda1))
      return std::nullopt;
  }
  double rho = 0.0;
  for (int it = 0; it < 40; ++it) {
    // deflate against v1 and renormalize
    const double c = kernels::dot(n, t.data(), v1.data());
    kernels::axpy(n, -c, v1.data(), t.data());
    const double nt = std::sqrt(kernels::dot(n, t.data(), t.data()));
    if (!(nt > 0.0)) return 0.0;  // probe fell entirely into the dominant space
    for (std::size_t i = 0; i < n; ++i) w[i] = t[i] / nt;
    mv(w.data(), t.data());
    rho = kernels::dot(n, w.data(), t.data());
  }
  return (std::fabs(lambda1) - std::fabs(rho)) / std::fabs(lambda1);
}

}  // namespace

std::pair<UniformMPS, CanonicalData> canonicalize(const UniformMPS& mps,
                                                  const CanonicalizeOptions& opts) {
  const std::size_t D = mps.chi(), p = mps.phys();
  const auto lfp = transfer_fixed_point(mps.tensor, Side::L, opts.left0, opts.fp_tol);
  const auto rfp = transfer_fixed_point(mps.tensor, Side::R, opts.right0, opts.fp_tol);
  if (opts.check_gap && D > 1) {
    const TransferMaps maps(mps.tensor);
    const auto gap = probe_gap(maps, Side::R, rfp.eigenvalue, rfp.env);
    if (gap && *gap < 1e-8)
      throw Error("degenerate dominant transfer eigenvalue: relative gap " +
                  std::to_string(*gap));
  }
  const double eta = 0.5 * (lfp.eigenvalue + rfp.eigenvalue);
  if (!(eta > 0.0)) throw Error("nonpositive dominant transfer eigenvalue");

  DenseTensor A = mps.tensor;
  kernels::scal(A.size(), 1.0 / std::sqrt(eta), A.data());

  // l = X^T X (clipped symmetric square root)
  const auto le = sym_eig(lfp.env);
  const double mumax = *std::max_element(le.eigenvalues.begin(), le.eigenvalues.end());
  if (!(mumax > 0.0)) throw Error("left environment is not positive");
  DenseTensor X({D, D}), Xi({D, D});
  for (std::size_t i = 0; i < D; ++i) {
    const double mu = le.eigenvalues[i];
    const double keep = mu > 1e-28 * mumax ? mu : 0.0;
    for (std::size_t j = 0; j < D; ++j) {
      X(i, j) = (keep > 0.0 ? std::sqrt(keep) : 0.0) * le.vectors(j, i);
      Xi(j, i) = keep > 0.0 ? le.vectors(j, i) / std::sqrt(keep) : 0.0;
    }
  }
  // AL[s] = X A^s Xi
  DenseTensor As = permute(A, {1, 0, 2});
  DenseTensor AL({p, D, D});
  {
    std::vector<double> tmp(D * D);
    for (std::size_t s = 0; s < p; ++s) {
      kernels::gemm(D, D, D, X.data(), D, As.data() + s * D * D, D, tmp.data(), D);
      kernels::gemm(D, D, D, tmp.data(), D, Xi.data(), D, AL.data() + s * D * D, D);
    }
  }
  // right environment in the new gauge: r' = X r X^T, diagonalized
  DenseTensor rp({D, D});
  {
    std::vector<double> tmp(D * D);
    DenseTensor Xt = permute(X, {1, 0});
    kernels::gemm(D, D, D, X.data(), D, rfp.env.data(), D, tmp.data(), D);
    kernels::gemm(D, D, D, tmp.data(), D, Xt.data(), D, rp.data(), D);
  }
  for (std::size_t i = 0; i < D; ++i)
    for (std::size_t j = i + 1; j < D; ++j) {
      const double s = 0.5 * (rp(i, j) + rp(j, i));
      rp(i, j) = rp(j, i) = s;
    }
  const auto re = sym_eig(rp);
  // sort descending; W columns reordered
  std::vector<double> sigma(D);
  DenseTensor W({D, D});
  for (std::size_t i = 0; i < D; ++i) {
    sigma[i] = std::max(0.0, re.eigenvalues[D - 1 - i]);
    for (std::size_t j = 0; j < D; ++j) W(j, i) = re.vectors(j, D - 1 - i);
  }
  // AC[s] = W^T AL[s] W
  DenseTensor AC({D, p, D});
  {
    std::vector<double> tmp(D * D);
    DenseTensor Wt = permute(W, {1, 0});
    DenseTensor ACs({p, D, D});
    for (std::size_t s = 0; s < p; ++s) {
      kernels::gemm(D, D, D, Wt.data(), D, AL.data() + s * D * D, D, tmp.data(), D);
      kernels::gemm(D, D, D, tmp.data(), D, W.data(), D, ACs.data() + s * D * D, D);
    }
    AC = permute(ACs, {1, 0, 2});
  }
  double tot = 0.0;
  for (double v : sigma) tot += v;
  if (!(tot > 0.0)) throw Error("vanishing Schmidt spectrum");
  CanonicalData cd;
  cd.transfer_eigenvalue = eta;
  cd.schmidt_spectrum.resize(D);
  cd.right_env = DenseTensor({D, D});
  cd.left_env = DenseTensor({D, D});
  for (std::size_t i = 0; i < D; ++i) {
    cd.schmidt_spectrum[i] = std::sqrt(sigma[i] / tot);
    cd.right_env(i, i) = sigma[i] / tot;
    cd.left_env(i, i) = 1.0;
  }
  return {UniformMPS{std::move(AC), mps.side}, std::move(cd)};
}

UniformMPS apply_transfer_mpo(const UniformMPS& mps, const ThetaTensor& theta, Side side) {
  const std::size_t r = theta.bond(), d2 = theta.data.dim(1);
  if (mps.phys() != r)
    throw Error("MPS physical dimension " + std::to_string(mps.phys()) +
                " does not match Theta bond " + std::to_string(r));
  const std::size_t chi = mps.chi();
  DenseTensor big;
  if (side == Side::R) {
    // T[v,c,a,w,e] = sum_b Theta[a,v,w,b] A[c,b,e]
    DenseTensor t = contract(theta.data, mps.tensor, {{3, 1}});  // [a,v,w,c,e]
    big = permute(t, {1, 3, 0, 2, 4});
  } else {
    // T[v,c,b,w,e] = sum_a Theta[a,v,w,b] A[c,a,e]
    DenseTensor t = contract(theta.data, mps.tensor, {{0, 1}});  // [v,w,b,c,e]
    big = permute(t, {0, 3, 2, 1, 4});
  }
  return {reshape(big, {d2 * chi, r, d2 * chi}), side};
}

TruncateResult truncate(const UniformMPS& mps, const CanonicalData& canonical,
                        std::size_t chi_max) {
  if (chi_max < 1) throw Error("chi_max must be >= 1");
  const std::size_t D = mps.chi(), p = mps.phys();
  if (canonical.schmidt_spectrum.size() != D)
    throw Error("canonical data does not match the MPS bond");
  if (chi_max >= D) return {mps, 0.0};
  double disc = 0.0;
  for (std::size_t i = chi_max; i < D; ++i)
    disc += canonical.schmidt_spectrum[i] * canonical.schmidt_spectrum[i];
  DenseTensor out({chi_max, p, chi_max});
  for (std::size_t a = 0; a < chi_max; ++a)
    for (std::size_t s = 0; s < p; ++s)
      for (std::size_t b = 0; b < chi_max; ++b)
        out(a, s, b) = mps.tensor(a, s, b);
  return {UniformMPS{std::move(out), mps.side}, disc};
}

SideState make_side_state(const ThetaTensor& theta, Side side, std::uint64_t seed,
                          const std::optional<UniformMPS>& init) {
  SideState st;
  if (init) {
    st.mps = *init;
    st.mps.side = side;
  } else {
    std::mt19937_64 rng(seed + (side == Side::L ? 1 : 0));
    std::uniform_real_distribution<double> u(0.1, 1.0);
    DenseTensor t({1, theta.bond(), 1});
    for (std::size_t i = 0; i < t.size(); ++i) t.at(i) = u(rng);
    st.mps = UniformMPS{std::move(t), side};
  }
  st.schmidt = {1.0};
  return st;
}

namespace {
double schmidt_distance(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = std::max(a.size(), b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (i < a.size() ? a[i] : 0.0) - (i < b.size() ? b[i] : 0.0);
    s += x * x;
  }
  return std::sqrt(s);
}
}  // namespace

void power_step(SideState& st, const ThetaTensor& theta, std::size_t chi, double fp_tol) {
  UniformMPS big = apply_transfer_mpo(st.mps, theta, st.mps.side);
  CanonicalizeOptions opts;
  opts.fp_tol = fp_tol;
  opts.check_gap = false;  // the iteration itself tolerates redundancy
  // warm start: embed the previous chi x chi environments into the grown bond
  DenseTensor l0, r0;
  const std::size_t d2 = theta.data.dim(1);
  if (st.l_env.size() > 0 && big.chi() == d2 * st.mps.chi() &&
      st.l_env.dim(0) == st.mps.chi()) {
    const std::size_t c = st.mps.chi();
    l0 = DenseTensor({d2 * c, d2 * c});
    r0 = DenseTensor({d2 * c, d2 * c});
    for (std::size_t v = 0; v < d2; ++v)
      for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = 0; j < c; ++j) {
          l0(v * c + i, v * c + j) = st.l_env(i, j);
          r0(v * c + i, v * c + j) = st.r_env(i, j);
        }
    opts.left0 = &l0;
    opts.right0 = &r0;
  }
  auto [canon, cd] = canonicalize(big, opts);
  if (canon.chi() > chi) {
    auto tr = truncate(canon, cd, chi);
    CanonicalizeOptions o2;
    o2.fp_tol = fp_tol;
    o2.check_gap = false;
    DenseTensor r0s({chi, chi});
    for (std::size_t i = 0; i < chi; ++i)
      r0s(i, i) = cd.right_env(i, i);
    o2.right0 = &r0s;
    auto [canon2, cd2] = canonicalize(tr.mps, o2);
    canon = std::move(canon2);
    cd = std::move(cd2);
  }
  st.delta = schmidt_distance(cd.schmidt_spectrum, st.schmidt);
  st.schmidt = cd.schmidt_spectrum;
  st.l_env = std::move(cd.left_env);
  st.r_env = std::move(cd.right_env);
  st.mps = std::move(canon);
  ++st.iterations;
}

PowerResult power_converge(const ThetaTensor& theta, std::size_t chi, double tol,
                           int max_iters, const PowerOptions& opts) {
  if (chi < 1) throw Error("chi must be >= 1");
  if (!(tol > 0.0)) throw Error("tol must be positive");
  PowerResult res;
  for (const Side side : {Side::L, Side::R}) {
    SideState st = make_side_state(theta, side, opts.seed, opts.init);
    bool done = false;
    for (int it = 0; it < max_iters; ++it) {
      power_step(st, theta, chi, opts.fp_tol);
      if (it >= 1 && st.delta < tol) {
        done = true;
        break;
      }
    }
    if (!done && opts.require_convergence)
      throw Error("boundary power iteration did not converge: final delta " +
                  std::to_string(st.delta) + " after " + std::to_string(st.iterations) +
                  " iterations (side " + (side == Side::L ? std::string("L") : "R") + ")");
    // the returned state must be safe to interpret: run the checked gauge fix
    if (st.mps.chi() > 1) {
      CanonicalizeOptions co;
      co.fp_tol = opts.fp_tol;
      auto [canon, cd] = canonicalize(st.mps, co);
      st.mps = std::move(canon);
      st.schmidt = cd.schmidt_spectrum;
    }
    if (side == Side::L) {
      res.left = st.mps;
      res.iterations_left = st.iterations;
      res.final_delta_left = st.delta;
      res.schmidt_left = st.schmidt;
    } else {
      res.right = st.mps;
      res.iterations_right = st.iterations;
      res.final_delta_right = st.delta;
      res.schmidt_right = st.schmidt;
    }
  }
  return res;
}

}  // namespace tnt
