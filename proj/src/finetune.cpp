#include "tnt/finetune.hpp"

#include <chrono>
#include <cmath>

#include "tnt/kernels.hpp"

namespace tnt {

namespace {

double trace_product(const DenseTensor& p, const DenseTensor& m) {
  // Tr(P M) = sum_{u,v} P[u,v] M[v,u]
  const std::size_t n = p.dim(0);
  double s = 0.0;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v) s += p.at(u * n + v) * m.at(v * n + u);
  return s;
}

Gradient analytic_gradient(const TailoredEnsemble& e) {
  const std::size_t chiA = e.A.chi(), chiB = e.B.chi(), d2 = e.theta.data.dim(1);
  const double Kd = static_cast<double>(e.K);
  const DenseTensor M = channel_matrix(e);
  const DenseTensor m = overlap_matrix(e);
  const ScaledMatrix P = scaled_power(M, e.K - 1);
  const ScaledMatrix Q = scaled_power(m, e.K - 1);
  const double trM = trace_product(P.mat, M);  // Tr M^K up to exp(P.log_scale)
  const double trm = trace_product(Q.mat, m);
  if (trM <= 0.0 || trm <= 0.0) throw Error("nonpositive trace in gradient");

  // P[(x,vi,bi),(y,vo,bo)] row = in-type index of the channel
  const DenseTensor P6 = reshape(P.mat, {chiA, d2, chiB, chiA, d2, chiB});
  const DenseTensor Q4 = reshape(Q.mat, {chiA, chiB, chiA, chiB});
  const DenseTensor ThB = contract(e.theta.data, e.B.tensor, {{3, 1}});  // [al,vi,vo,bi,bo]
  const DenseTensor ATh = contract(e.A.tensor, e.theta.data, {{1, 0}});  // [ai,ao,vi,vo,be]

  // dlnN/dA[x,al,y] = K/trM * sum_{vi,bi,vo,bo} P6[x,vi,bi,y,vo,bo] ThB[al,vi,vo,bi,bo]
  DenseTensor dN_dA =
      contract(P6, ThB, {{1, 1}, {2, 3}, {4, 2}, {5, 4}});  // [x,y,al]
  DenseTensor dN_dB =
      contract(P6, ATh, {{0, 0}, {1, 2}, {3, 1}, {4, 3}});  // [bi,bo,be]
  DenseTensor dD_dA = contract(Q4, e.B.tensor, {{1, 0}, {3, 2}});  // [x,y,al]
  DenseTensor dD_dB = contract(Q4, e.A.tensor, {{0, 0}, {2, 2}});  // [bi,bo,al]

  const double cN = Kd / trM, cD = Kd / trm;
  const double pref = -1.0 / (2.0 * e.beta);
  DenseTensor dA({chiA, e.A.phys(), chiA});
  DenseTensor dB({chiB, e.B.phys(), chiB});
  const std::size_t rA = e.A.phys(), rB = e.B.phys();
  for (std::size_t x = 0; x < chiA; ++x)
    for (std::size_t y = 0; y < chiA; ++y)
      for (std::size_t al = 0; al < rA; ++al)
        dA(x, al, y) = pref * (cN * dN_dA(x, y, al) - cD * dD_dA(x, y, al));
  for (std::size_t x = 0; x < chiB; ++x)
    for (std::size_t y = 0; y < chiB; ++y)
      for (std::size_t al = 0; al < rB; ++al)
        dB(x, al, y) = pref * (cN * dN_dB(x, y, al) - cD * dD_dB(x, y, al));

  Gradient g{std::move(dA), std::move(dB), 0.0};
  // ln Tr M^K = ln(trM) + P.log_scale when P = M^(K-1) carries the scale
  const double lnN = std::log(trM) + P.log_scale;
  const double lnD = std::log(trm) + Q.log_scale;
  g.f = -(lnN - lnD) / (2.0 * e.beta);
  return g;
}

Gradient fd_gradient(const TailoredEnsemble& e, double h) {
  TailoredEnsemble w = e;
  auto eval = [&]() { return free_energy(w).f; };
  Gradient g{DenseTensor(e.A.tensor.shape()), DenseTensor(e.B.tensor.shape()), 0.0};
  g.f = free_energy(e).f;
  for (std::size_t i = 0; i < e.A.tensor.size(); ++i) {
    const double v = e.A.tensor.at(i);
    w.A.tensor.at(i) = v + h;
    const double fp = eval();
    w.A.tensor.at(i) = v - h;
    const double fm = eval();
    w.A.tensor.at(i) = v;
    g.dA.at(i) = (fp - fm) / (2.0 * h);
  }
  for (std::size_t i = 0; i < e.B.tensor.size(); ++i) {
    const double v = e.B.tensor.at(i);
    w.B.tensor.at(i) = v + h;
    const double fp = eval();
    w.B.tensor.at(i) = v - h;
    const double fm = eval();
    w.B.tensor.at(i) = v;
    g.dB.at(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace

Gradient gradient(const TailoredEnsemble& e, FineTuneConfig::GradMode mode, double fd_step) {
  return mode == FineTuneConfig::GradMode::analytic ? analytic_gradient(e)
                                                    : fd_gradient(e, fd_step);
}

TailoredEnsemble gd_step(const TailoredEnsemble& e, const DenseTensor& dA,
                         const DenseTensor& dB, const FineTuneConfig& config) {
  if (dA.shape() != e.A.tensor.shape() || dB.shape() != e.B.tensor.shape())
    throw Error("gradient shape mismatch");
  double scaleA = config.eta, scaleB = config.eta;
  if (config.step_mode == FineTuneConfig::StepMode::gradient_normalized) {
    const double gmax = std::max(dA.max_abs(), dB.max_abs());
    const double s = gmax > 0.0 ? config.eta / (gmax * static_cast<double>(e.K)) : 0.0;
    scaleA = scaleB = s;
  }
  TailoredEnsemble out = e;
  kernels::axpy(dA.size(), scaleA, dA.data(), out.A.tensor.data());
  kernels::axpy(dB.size(), scaleB, dB.data(), out.B.tensor.data());
  if (!out.A.tensor.all_finite() || !out.B.tensor.all_finite())
    throw Error("non-finite tensors after gradient step");
  return out;
}

std::pair<TailoredEnsemble, FineTuneTrace> finetune_loop(const TailoredEnsemble& e0,
                                                         const FineTuneConfig& config) {
  if (!(config.eta > 0.0) || !(config.f_tol > 0.0)) throw Error("bad fine-tune config");
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto secs = [&]() {
    return std::chrono::duration<double>(clock::now() - t0).count();
  };
  FineTuneTrace trace;
  TailoredEnsemble cur = e0;
  TailoredEnsemble best = e0;
  double f_best = 0.0, f_prev = 0.0;
  int small_change = 0, since_best = 0;
  const double dir = config.ascend_lambda ? -1.0 : 1.0;  // descend f <=> ascend lambda

  for (int step = 0; step <= config.max_steps; ++step) {
    Gradient g = gradient(cur, config.grad_mode, config.fd_step);
    if (config.alternate) {
      // zero the tensor that is not updated this step
      DenseTensor& off = (step % 2 == 0) ? g.dB : g.dA;
      kernels::scal(off.size(), 0.0, off.data());
    }
    trace.steps.push_back({step, g.f, std::max(g.dA.max_abs(), g.dB.max_abs()), secs()});
    if (step == 0) {
      trace.f_initial = g.f;
      f_best = g.f;
      f_prev = g.f;
    }
    if (std::fabs(g.f) > 10.0 * std::fabs(trace.f_initial) + 1e-300)
      throw Error("fine-tuning diverged: |f| grew past 10x its initial value");
    if (g.f < f_best) {
      f_best = g.f;
      best = cur;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (step > 0 && std::fabs(g.f - f_prev) < config.f_tol) {
      if (++small_change >= 10) {
        trace.status = FineTuneTrace::Status::converged;
        break;
      }
    } else {
      small_change = 0;
    }
    if (since_best >= 25) {
      trace.status = FineTuneTrace::Status::stalled;
      break;
    }
    f_prev = g.f;
    if (step == config.max_steps) {
      trace.status = FineTuneTrace::Status::max_steps_reached;
      break;
    }
    DenseTensor sA = g.dA, sB = g.dB;
    kernels::scal(sA.size(), dir, sA.data());
    kernels::scal(sB.size(), dir, sB.data());
    cur = gd_step(cur, sA, sB, config);
  }
  trace.f_final = f_best;
  return {std::move(best), std::move(trace)};
}

}  // namespace tnt
