#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tnt/ed.hpp"
#include "tnt/exact.hpp"

using namespace tnt;

TEST_CASE("Ising h=0.5, N=2 open: brute-force 4x4 spectrum") {
  auto chain = dense_hamiltonian(ModelSpec::ising(0.5), 2, Boundary::open);
  const auto& w = chain.eigenvalues();
  // eigenvalues of SxSx - (1/4)(Sz I + I Sz): {-1/(2 sqrt 2), -1/4, 1/4, 1/(2 sqrt 2)}
  CHECK(w[0] == doctest::Approx(-0.5 / std::sqrt(2.0)).epsilon(1e-13));
  CHECK(w[1] == doctest::Approx(-0.25).epsilon(1e-13));
  CHECK(w[2] == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(w[3] == doctest::Approx(0.5 / std::sqrt(2.0)).epsilon(1e-13));
}

TEST_CASE("XY chain commutes with total Sz") {
  auto chain = dense_hamiltonian(ModelSpec::xy(), 3, Boundary::periodic);
  const std::size_t dim = 8;
  DenseTensor sz({dim, dim});
  for (std::size_t s = 0; s < dim; ++s) {
    double v = 0.0;
    for (int b = 0; b < 3; ++b) v += ((s >> b) & 1) ? 0.5 : -0.5;
    sz(s, s) = v;
  }
  DenseTensor c1 = matmul(chain.hamiltonian, sz);
  DenseTensor c2 = matmul(sz, chain.hamiltonian);
  double dev = 0.0;
  for (std::size_t i = 0; i < c1.size(); ++i)
    dev = std::max(dev, std::fabs(c1.at(i) - c2.at(i)));
  CHECK(dev <= 1e-12);
}

TEST_CASE("zero Hamiltonian gives the zero matrix and f = -T ln 2") {
  ModelSpec zero = ModelSpec::custom_two_site(DenseTensor({4, 4}));
  auto chain = dense_hamiltonian(zero, 4, Boundary::periodic);
  CHECK(chain.hamiltonian.max_abs() == 0.0);
  CHECK(free_energy_ed(chain, 0.7) == doctest::Approx(-0.7 * std::log(2.0)).epsilon(1e-14));
  CHECK(thermal_energy_ed(chain, 0.7) == doctest::Approx(0.0));
}

TEST_CASE("classical Ising ring matches the two-eigenvalue transfer formula") {
  const double beta = 2.0;
  for (int n : {8, 10}) {
    auto chain = dense_hamiltonian(ModelSpec::ising(0.0), n, Boundary::periodic);
    const double lp = 2.0 * std::cosh(beta / 4.0), lm = 2.0 * std::sinh(beta / 4.0);
    const double fcl =
        -(1.0 / beta) * std::log(std::pow(lp, n) + std::pow(lm, n)) / n;
    CHECK(free_energy_ed(chain, 1.0 / beta) == doctest::Approx(fcl).epsilon(1e-13));
    // energy from the same closed form
    const double num = std::pow(lp, n - 1) * lm + std::pow(lm, n - 1) * lp;
    const double ecl = -0.25 * num / (std::pow(lp, n) + std::pow(lm, n));
    CHECK(thermal_energy_ed(chain, 1.0 / beta) == doctest::Approx(ecl).epsilon(1e-12));
  }
}

TEST_CASE("thermal energy approaches Tr(H)/2^N/N at high temperature") {
  auto chain = dense_hamiltonian(ModelSpec::ising(0.5), 6, Boundary::periodic);
  double tr = 0.0;
  for (std::size_t i = 0; i < 64; ++i) tr += chain.hamiltonian(i, i);
  const double target = tr / 64.0 / 6.0;  // = 0 for these traceless models
  const double e6 = thermal_energy_ed(chain, 1e6);
  CHECK(std::fabs(e6 - target) <= 1e-5);
  // the residual is the O(1/T) Boltzmann correction: halving it with 2T
  const double e12 = thermal_energy_ed(chain, 2e6);
  CHECK(std::fabs(e12 - target) <= 0.6 * std::fabs(e6 - target));
}

TEST_CASE("periodic chains are translation invariant") {
  auto chain = dense_hamiltonian(ModelSpec::ising(0.5), 6, Boundary::periodic);
  const std::size_t dim = 64;
  // one-site cyclic relabeling permutation
  DenseTensor rotated({dim, dim});
  auto rot = [&](std::size_t s) {
    const std::size_t top = (s >> 5) & 1;
    return ((s << 1) & 63) | top;
  };
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) rotated(rot(i), rot(j)) = chain.hamiltonian(i, j);
  double dev = 0.0;
  for (std::size_t i = 0; i < rotated.size(); ++i)
    dev = std::max(dev, std::fabs(rotated.at(i) - chain.hamiltonian.at(i)));
  CHECK(dev <= 1e-12);
}

TEST_CASE("blocked spectrum equals the plain dense spectrum") {
  // quantum-number blocking must be exactly the same spectrum
  auto chain = dense_hamiltonian(ModelSpec::ising(0.3), 8, Boundary::periodic);
  auto blocked = symmetric_spectrum(chain.hamiltonian);
  auto full = sym_eig(chain.hamiltonian).eigenvalues;
  REQUIRE(blocked.size() == full.size());
  for (std::size_t i = 0; i < blocked.size(); ++i)
    CHECK(blocked[i] == doctest::Approx(full[i]).epsilon(1e-11));
}

TEST_CASE("trotter layer: identity at tau=0 is excluded, errors on odd sites") {
  CHECK_THROWS_AS(trotter_layer_dense(ModelSpec::ising(0.5), 5, 0.1), Error);
}

TEST_CASE("trotter layer deviates from exp(-tau H) at third order") {
  const ModelSpec spec = ModelSpec::ising(0.5);
  auto chain = dense_hamiltonian(spec, 4, Boundary::periodic);
  auto eig = sym_eig(chain.hamiltonian);
  auto expm = [&](double tau) {
    DenseTensor g({16, 16});
    for (std::size_t i = 0; i < 16; ++i)
      for (std::size_t j = 0; j < 16; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < 16; ++k)
          s += eig.vectors(i, k) * std::exp(-tau * eig.eigenvalues[k]) * eig.vectors(j, k);
        g(i, j) = s;
      }
    return g;
  };
  auto dev_at = [&](double tau) {
    DenseTensor layer = trotter_layer_dense(spec, 4, tau);
    DenseTensor ex = expm(tau);
    double dev = 0.0;
    for (std::size_t i = 0; i < layer.size(); ++i)
      dev = std::max(dev, std::fabs(layer.at(i) - ex.at(i)));
    return dev;
  };
  const double ratio = dev_at(0.04) / dev_at(0.02);
  CHECK(ratio >= 6.0);
  CHECK(ratio <= 10.0);
}

TEST_CASE("layer powers converge to the exact Boltzmann trace quadratically") {
  const ModelSpec spec = ModelSpec::ising(0.5);
  const int n = 6;
  auto chain = dense_hamiltonian(spec, n, Boundary::periodic);
  const double beta = 1.0;
  const double f_ed = free_energy_ed(chain, 1.0 / beta);
  auto f_from_layer = [&](double tau) {
    const int K = static_cast<int>(std::lround(beta / tau));
    DenseTensor layer = trotter_layer_dense(spec, n, tau);
    DenseTensor p = layer;
    for (int k = 1; k < K; ++k) p = matmul(p, layer);
    double tr = 0.0;
    for (std::size_t i = 0; i < p.dim(0); ++i) tr += p(i, i);
    return -std::log(tr) / beta / n;
  };
  const double e1 = std::fabs(f_from_layer(0.1) - f_ed);
  const double e2 = std::fabs(f_from_layer(0.05) - f_ed);
  CHECK(e1 / e2 >= 3.0);
  CHECK(e1 / e2 <= 5.0);
}

TEST_CASE("size and precondition guards") {
  CHECK_THROWS_AS(dense_hamiltonian(ModelSpec::xy(), 1, Boundary::open), Error);
  CHECK_THROWS_AS(dense_hamiltonian(ModelSpec::xy(), 2, Boundary::periodic), Error);
  auto chain = dense_hamiltonian(ModelSpec::xy(), 4, Boundary::periodic);
  CHECK_THROWS_AS(free_energy_ed(chain, 0.0), Error);
  CHECK_THROWS_AS(free_energy_ed(chain, -1.0), Error);
}
