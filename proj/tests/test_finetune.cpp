#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "tnt/exact.hpp"
#include "tnt/finetune.hpp"

using namespace tnt;

namespace {

UniformMPS random_boundary(std::size_t chi, std::size_t p, Side side, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  DenseTensor t({chi, p, chi});
  for (std::size_t i = 0; i < t.size(); ++i) t.at(i) = u(rng);
  return {std::move(t), side};
}

TailoredEnsemble random_ensemble(const ThetaTensor& th, std::size_t chi, double beta,
                                 std::uint64_t seed) {
  auto L = random_boundary(chi, th.bond(), Side::L, seed);
  auto R = random_boundary(chi, th.bond(), Side::R, seed + 1);
  return scissor_and_stitch(L, R, th, beta, th.tau);
}

}  // namespace

TEST_CASE("analytic gradient matches central finite differences") {
  auto th = build_theta(ModelSpec::ising(0.5), 0.05);
  auto e = random_ensemble(th, 3, 7 * 0.05, 60);
  auto ga = gradient(e, FineTuneConfig::GradMode::analytic);
  auto gf = gradient(e, FineTuneConfig::GradMode::finite_difference_debug, 1e-6);
  double rel = 0.0;
  for (std::size_t i = 0; i < ga.dA.size(); ++i)
    if (std::fabs(gf.dA.at(i)) > 1e-10)
      rel = std::max(rel, std::fabs(ga.dA.at(i) - gf.dA.at(i)) / std::fabs(gf.dA.at(i)));
  for (std::size_t i = 0; i < ga.dB.size(); ++i)
    if (std::fabs(gf.dB.at(i)) > 1e-10)
      rel = std::max(rel, std::fabs(ga.dB.at(i) - gf.dB.at(i)) / std::fabs(gf.dB.at(i)));
  CHECK(rel <= 1e-6);
}

TEST_CASE("gradient of log-lambda scales linearly in K for fixed tensors") {
  auto th = build_theta(ModelSpec::ising(0.5), 0.05);
  auto L = random_boundary(3, th.bond(), Side::L, 70);
  auto R = random_boundary(3, th.bond(), Side::R, 71);
  auto e100 = scissor_and_stitch(L, R, th, 100 * 0.05, 0.05);
  auto e200 = scissor_and_stitch(L, R, th, 200 * 0.05, 0.05);
  // d(ln lambda)/dA = -2 beta * df/dA
  const double n100 = 2.0 * e100.beta * gradient(e100).dA.max_abs();
  const double n200 = 2.0 * e200.beta * gradient(e200).dA.max_abs();
  CHECK(n200 / n100 == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("gradient vanishes at the saturated zero-Hamiltonian point") {
  ModelSpec zero = ModelSpec::custom_two_site(DenseTensor({4, 4}));
  auto th = build_theta(zero, 0.01);
  UniformMPS L{DenseTensor({1, 1, 1}, {1.0}), Side::L};
  UniformMPS R{DenseTensor({1, 1, 1}, {1.0}), Side::R};
  auto e = scissor_and_stitch(L, R, th, 1.0, 0.01);
  auto g = gradient(e);
  CHECK(g.dA.max_abs() <= 1e-12);
  CHECK(g.dB.max_abs() <= 1e-12);
}

TEST_CASE("gd_step: eta = 0 leaves the ensemble unchanged") {
  auto th = build_theta(ModelSpec::ising(0.5), 0.05);
  auto e = random_ensemble(th, 2, 0.25, 80);
  auto g = gradient(e);
  FineTuneConfig cfg;
  cfg.eta = 0.0;
  cfg.step_mode = FineTuneConfig::StepMode::raw;
  auto e2 = gd_step(e, g.dA, g.dB, cfg);
  for (std::size_t i = 0; i < e.A.tensor.size(); ++i)
    CHECK(e2.A.tensor.at(i) == e.A.tensor.at(i));
}

TEST_CASE("a raw step changes f by eta * ||grad||^2 to leading order") {
  auto th = build_theta(ModelSpec::ising(0.5), 0.05);
  auto e = random_ensemble(th, 2, 0.5, 90);
  auto g = gradient(e);
  double g2 = 0.0;
  for (std::size_t i = 0; i < g.dA.size(); ++i) g2 += g.dA.at(i) * g.dA.at(i);
  for (std::size_t i = 0; i < g.dB.size(); ++i) g2 += g.dB.at(i) * g.dB.at(i);
  FineTuneConfig cfg;
  cfg.step_mode = FineTuneConfig::StepMode::raw;
  cfg.eta = 1e-7 / std::sqrt(g2);
  auto e2 = gd_step(e, g.dA, g.dB, cfg);  // step along +grad ascends f
  const double df = free_energy(e2).f - g.f;
  CHECK(df == doctest::Approx(cfg.eta * g2).epsilon(1e-3));
}

TEST_CASE("paper-style raw step with eta = 1e-9 is finite and tiny") {
  auto th = build_theta(ModelSpec::ising(0.5), 0.05);
  auto e = random_ensemble(th, 2, 5.0, 95);
  auto g = gradient(e);
  FineTuneConfig cfg;
  cfg.step_mode = FineTuneConfig::StepMode::raw;
  cfg.eta = 1e-9;
  auto e2 = gd_step(e, g.dA, g.dB, cfg);
  CHECK(e2.A.tensor.all_finite());
  double move = 0.0;
  for (std::size_t i = 0; i < e.A.tensor.size(); ++i)
    move = std::max(move, std::fabs(e2.A.tensor.at(i) - e.A.tensor.at(i)));
  CHECK(move <= 1e-9 * g.dA.max_abs() + 1e-18);
}

TEST_CASE("degenerate config f_tol = inf returns immediately unchanged") {
  auto th = build_theta(ModelSpec::ising(0.5), 0.05);
  auto e = random_ensemble(th, 2, 0.5, 100);
  FineTuneConfig cfg;
  cfg.f_tol = std::numeric_limits<double>::infinity();
  auto [opt, trace] = finetune_loop(e, cfg);
  CHECK(trace.status == FineTuneTrace::Status::converged);
  CHECK(trace.f_final == trace.f_initial);
  for (std::size_t i = 0; i < e.A.tensor.size(); ++i)
    CHECK(opt.A.tensor.at(i) == e.A.tensor.at(i));
}

TEST_CASE("fine-tuning the classical Ising chain recovers the exact free energy") {
  // chi = 1 boundaries suffice for h = 0: the column transfer factorizes over
  // layers, so gradient ascent on log-lambda can reach the exact value
  const double tau = 0.05, beta = 10.0;
  auto th = build_theta(ModelSpec::ising(0.0), tau);
  auto e = random_ensemble(th, 1, beta, 123);
  const double fex = -std::log(2.0 * std::cosh(beta / 4.0)) / beta;
  FineTuneConfig cfg;
  cfg.eta = 0.3;
  cfg.max_steps = 800;
  cfg.f_tol = 1e-15;
  auto [opt, trace] = finetune_loop(e, cfg);
  const double f = free_energy(opt).f;
  // classical Trotter factorization is exact, so only optimization error remains
  CHECK(delta_f(f, fex) <= 1e-8);
  CHECK(trace.f_final <= trace.f_initial);
}

TEST_CASE("fine-tuning improves a perturbed ensemble and the trace records it") {
  const double tau = 0.02, beta = 2.0;
  auto th = build_theta(ModelSpec::ising(0.5), tau);
  auto e = random_ensemble(th, 3, beta, 140);
  FineTuneConfig cfg;
  cfg.eta = 0.2;
  cfg.max_steps = 60;
  auto [opt, trace] = finetune_loop(e, cfg);
  CHECK(trace.f_final <= trace.f_initial);
  REQUIRE(trace.steps.size() >= 2);
  CHECK(trace.steps.front().step == 0);
  for (std::size_t i = 1; i < trace.steps.size(); ++i)
    CHECK(trace.steps[i].step == trace.steps[i - 1].step + 1);
}

TEST_CASE("divergence detection aborts with a diagnostic") {
  auto th = build_theta(ModelSpec::ising(0.5), 0.05);
  auto e = random_ensemble(th, 2, 0.5, 150);
  FineTuneConfig cfg;
  cfg.step_mode = FineTuneConfig::StepMode::raw;
  cfg.eta = 1e6;  // absurd step
  cfg.max_steps = 50;
  CHECK_THROWS_AS(finetune_loop(e, cfg), Error);
}
