#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "tnt/tensor.hpp"

using namespace tnt;

namespace {
DenseTensor random_tensor(std::vector<std::size_t> shape, std::uint64_t seed) {
  DenseTensor t(std::move(shape));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t i = 0; i < t.size(); ++i) t.at(i) = u(rng);
  return t;
}
}  // namespace

TEST_CASE("identity contracted with a vector returns the vector") {
  DenseTensor eye({2, 2}, {1.0, 0.0, 0.0, 1.0});
  DenseTensor v({2}, {1.0, 2.0});
  DenseTensor r = contract(eye, v, {{1, 0}});
  CHECK(r.shape() == std::vector<std::size_t>{2});
  CHECK(r.at(0) == 1.0);
  CHECK(r.at(1) == 2.0);
}

TEST_CASE("matrix contraction matches the three-loop reference") {
  const DenseTensor a = random_tensor({2, 3}, 1);
  const DenseTensor b = random_tensor({3, 2}, 2);
  const DenseTensor c = contract(a, b, {{1, 0}});
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
      CHECK(c(i, j) == doctest::Approx(s).epsilon(1e-14));
    }
}

TEST_CASE("full self-contraction gives the squared Frobenius norm") {
  const DenseTensor t = random_tensor({3, 4, 2}, 3);
  const DenseTensor s = contract(t, t, {{0, 0}, {1, 1}, {2, 2}});
  CHECK(s.size() == 1);
  CHECK(s.at(0) == doctest::Approx(t.norm() * t.norm()).epsilon(1e-13));
}

TEST_CASE("contract is bilinear") {
  std::mt19937_64 rng(5);
  DenseTensor a = random_tensor({4, 3}, 6), b = random_tensor({3, 5}, 7);
  DenseTensor ab = contract(a, b, {{1, 0}});
  DenseTensor a2 = a;
  const double alpha = 0.731;
  for (std::size_t i = 0; i < a2.size(); ++i) a2.at(i) *= alpha;
  DenseTensor ab2 = contract(a2, b, {{1, 0}});
  for (std::size_t i = 0; i < ab.size(); ++i)
    CHECK(ab2.at(i) == doctest::Approx(alpha * ab.at(i)).epsilon(1e-12));
}

TEST_CASE("contract by leg labels and its error paths") {
  DenseTensor a({2, 3}, std::vector<std::string>{"i", "k"});
  DenseTensor b({3, 4}, std::vector<std::string>{"k", "j"});
  for (std::size_t i = 0; i < a.size(); ++i) a.at(i) = static_cast<double>(i);
  for (std::size_t i = 0; i < b.size(); ++i) b.at(i) = 1.0;
  DenseTensor c = contract(a, b, std::vector<std::pair<std::string, std::string>>{{"k", "k"}});
  CHECK(c.legs() == std::vector<std::string>{"i", "j"});
  CHECK_THROWS_AS(contract(a, b, std::vector<std::pair<std::string, std::string>>{{"x", "k"}}),
                  Error);
  DenseTensor bad({2, 4});
  CHECK_THROWS_AS(contract(a, bad, {{1, 0}}), Error);  // dimension mismatch
  CHECK_THROWS_AS(DenseTensor({2, 2}, std::vector<std::string>{"a", "a"}), Error);
}

TEST_CASE("svd of the identity and of a rank-1 outer product") {
  DenseTensor eye({2, 2}, {1.0, 0.0, 0.0, 1.0});
  auto s = svd_truncated(eye, {0}, {1}, 2, 0.0);
  REQUIRE(s.singular_values.size() == 2);
  CHECK(s.singular_values[0] == doctest::Approx(1.0));
  CHECK(s.singular_values[1] == doctest::Approx(1.0));
  CHECK(s.truncation_error == 0.0);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DenseTensor outer({5, 4});
  std::vector<double> x(5), y(4);
  for (auto& v : x) v = u(rng);
  for (auto& v : y) v = u(rng);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 4; ++j) outer(i, j) = x[i] * y[j];
  auto so = svd_truncated(outer, {0}, {1}, 4, 1e-13);
  CHECK(so.singular_values.size() == 1);
}

TEST_CASE("svd factors are orthonormal and reconstruct the input") {
  const DenseTensor t = random_tensor({4, 3, 5}, 9);
  auto s = svd_truncated(t, {0, 1}, {2}, 100, 0.0);
  const std::size_t k = s.singular_values.size();
  // Gram of the left factor columns
  for (std::size_t c1 = 0; c1 < k; ++c1)
    for (std::size_t c2 = 0; c2 < k; ++c2) {
      double g = 0.0;
      for (std::size_t i = 0; i < 12; ++i)
        g += s.left_factor.at(i * k + c1) * s.left_factor.at(i * k + c2);
      CHECK(std::fabs(g - (c1 == c2 ? 1.0 : 0.0)) <= 1e-12);
    }
  // reconstruction
  double dev = 0.0;
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      double v = 0.0;
      for (std::size_t c = 0; c < k; ++c)
        v += s.left_factor.at(i * k + c) * s.singular_values[c] * s.right_factor.at(c * 5 + j);
      dev = std::max(dev, std::fabs(v - t.at(i * 5 + j)));
    }
  CHECK(dev <= 1e-12 * t.max_abs() * 10);
}

TEST_CASE("truncated svd reports the discarded weight it creates") {
  const DenseTensor t = random_tensor({6, 6}, 10);
  auto s = svd_truncated(t, {0}, {1}, 3, 0.0);
  auto full = svd_truncated(t, {0}, {1}, 6, 0.0);
  double tot = 0.0, disc = 0.0;
  for (std::size_t i = 0; i < full.singular_values.size(); ++i) {
    const double sq = full.singular_values[i] * full.singular_values[i];
    tot += sq;
    if (i >= 3) disc += sq;
  }
  CHECK(s.truncation_error == doctest::Approx(disc / tot).epsilon(1e-10));
  // reconstruction error equals the truncation error (relative, squared norm)
  double err2 = 0.0;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      double v = 0.0;
      for (std::size_t c = 0; c < 3; ++c)
        v += s.left_factor.at(i * 3 + c) * s.singular_values[c] * s.right_factor.at(c * 6 + j);
      err2 += (v - t(i, j)) * (v - t(i, j));
    }
  CHECK(err2 / (t.norm() * t.norm()) == doctest::Approx(s.truncation_error).epsilon(1e-10));
}

TEST_CASE("svd error paths") {
  DenseTensor t({2, 2});
  CHECK_THROWS_AS(svd_truncated(t, {}, {0, 1}, 2, 0.0), Error);
  t.at(0) = std::nan("");
  CHECK_THROWS_AS(svd_truncated(t, {0}, {1}, 2, 0.0), Error);
}

TEST_CASE("sym_eig on frozen 2x2 cases") {
  DenseTensor d31({2, 2}, {3.0, 0.0, 0.0, 1.0});
  auto e = sym_eig(d31);
  CHECK(e.eigenvalues[0] == doctest::Approx(1.0));
  CHECK(e.eigenvalues[1] == doctest::Approx(3.0));

  DenseTensor px({2, 2}, {0.0, 1.0, 1.0, 0.0});
  auto ex = sym_eig(px);
  CHECK(ex.eigenvalues[0] == doctest::Approx(-1.0));
  CHECK(ex.eigenvalues[1] == doctest::Approx(1.0));
}

TEST_CASE("sym_eig reconstructs a random symmetric matrix") {
  DenseTensor m = random_tensor({8, 8}, 11);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = i + 1; j < 8; ++j) m(i, j) = m(j, i);
  auto e = sym_eig(m);
  double dev = 0.0;
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) {
      double v = 0.0;
      for (std::size_t k = 0; k < 8; ++k)
        v += e.vectors(i, k) * e.eigenvalues[k] * e.vectors(j, k);
      dev = std::max(dev, std::fabs(v - m(i, j)));
    }
  CHECK(dev <= 1e-12 * std::max(1.0, m.max_abs()) * 8);
}

TEST_CASE("sym_eig rejects asymmetric input") {
  DenseTensor m({2, 2}, {0.0, 1.0, 0.0, 0.0});
  CHECK_THROWS_AS(sym_eig(m), Error);
}

TEST_CASE("serialization round-trips bit-exactly") {
  DenseTensor t = random_tensor({3, 1, 4}, 12);
  t.set_legs({"up", "mid", "dn"});
  std::stringstream ss;
  t.save(ss);
  DenseTensor u = DenseTensor::load(ss);
  CHECK(u.shape() == t.shape());
  CHECK(u.legs() == t.legs());
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(u.at(i) == t.at(i));
}

TEST_CASE("permute moves data where it says") {
  DenseTensor t = random_tensor({2, 3, 4}, 13);
  DenseTensor p = permute(t, {2, 0, 1});
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 4; ++k) CHECK(p(k, i, j) == t(i, j, k));
}
