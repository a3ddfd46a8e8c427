#include "tnt/exact.hpp"

#include <cmath>
#include <numbers>

namespace tnt {

Quadrature gauss_legendre(int n, double a, double b) {
  if (n < 2) throw Error("quadrature needs >= 2 points");
  std::vector<double> x(n), w(n);
  // Newton on Legendre polynomials, nodes symmetric around 0
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2 * j - 1) * t * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / pp;
      t -= dt;
      if (std::fabs(dt) < 1e-15) break;
    }
    x[i] = -t;
    x[n - 1 - i] = t;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - t * t) * pp * pp);
  }
  Quadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    q.nodes[i] = mid + half * x[i];
    q.weights[i] = half * w[i];
  }
  return q;
}

double ln_2cosh(double x) {
  const double ax = std::fabs(x);
  return ax + std::log1p(std::exp(-2.0 * ax));
}

namespace {

template <class Band>
double fermion_free_energy(double T, Band eps, int points) {
  if (!(T > 0.0)) throw Error("T must be positive");
  const double beta = 1.0 / T;
  auto eval = [&](int n) {
    const Quadrature q = gauss_legendre(n, 0.0, std::numbers::pi);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += q.weights[i] * ln_2cosh(0.5 * beta * eps(q.nodes[i]));
    return -T * s / std::numbers::pi;
  };
  double f = eval(points);
  for (int n = 2 * points; n <= 512000; n *= 2) {
    const double f2 = eval(n);
    const double df = std::fabs(f2 - f);
    f = f2;
    if (df < 1e-13) break;
  }
  return f;
}

template <class Band>
double fermion_ground_energy(Band eps, int points) {
  auto eval = [&](int n) {
    const Quadrature q = gauss_legendre(n, 0.0, std::numbers::pi);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += q.weights[i] * 0.5 * std::fabs(eps(q.nodes[i]));
    return -s / std::numbers::pi;
  };
  double e = eval(points);
  for (int n = 2 * points; n <= 512000; n *= 2) {
    const double e2 = eval(n);
    const double de = std::fabs(e2 - e);
    e = e2;
    if (de < 1e-14) break;
  }
  return e;
}

}  // namespace

double ising_free_energy(double h, double T, int points) {
  auto eps = [h](double k) {
    return 2.0 * std::sqrt(1.0 / 16.0 + 0.25 * h * h - 0.25 * h * std::cos(k));
  };
  return fermion_free_energy(T, eps, points);
}

double xy_free_energy(double T, int points) {
  return fermion_free_energy(T, [](double k) { return std::cos(k); }, points);
}

double ising_ground_energy(double h, int points) {
  auto eps = [h](double k) {
    return 2.0 * std::sqrt(1.0 / 16.0 + 0.25 * h * h - 0.25 * h * std::cos(k));
  };
  return fermion_ground_energy(eps, points);
}

double xy_ground_energy(int points) {
  return fermion_ground_energy([](double k) { return std::cos(k); }, points);
}

double delta_f(double f, double f_exact) {
  if (f_exact == 0.0) throw Error("delta_f undefined for f_exact = 0");
  return std::fabs(f - f_exact) / std::fabs(f_exact);
}

AnalyticBaseline AnalyticBaseline::make(const ModelSpec& model) {
  AnalyticBaseline b;
  b.model = model;
  switch (model.kind) {
    case ModelSpec::Kind::TransverseIsing: {
      const double h = model.h;
      b.e_ground = ising_ground_energy(h);
      b.f_exact = [h](double T) { return ising_free_energy(h, T); };
      break;
    }
    case ModelSpec::Kind::XY:
      b.e_ground = xy_ground_energy();
      b.f_exact = [](double T) { return xy_free_energy(T); };
      break;
    case ModelSpec::Kind::CustomTwoSite:
      throw Error("no analytic baseline for custom models");
  }
  return b;
}

}  // namespace tnt
