#include "tnt/models.hpp"

#include <cmath>
#include <fstream>

namespace tnt {

SpinOperators SpinOperators::spin_half() {
  SpinOperators s;
  s.sx = DenseTensor({2, 2}, {0.0, 0.5, 0.5, 0.0});
  s.sy_imagpart = DenseTensor({2, 2}, {0.0, -0.5, 0.5, 0.0});  // S^y = i * this
  s.sz = DenseTensor({2, 2}, {0.5, 0.0, 0.0, -0.5});
  return s;
}

DenseTensor kron(const DenseTensor& a, const DenseTensor& b) {
  if (a.rank() != 2 || b.rank() != 2) throw Error("kron needs matrices");
  const std::size_t am = a.dim(0), an = a.dim(1), bm = b.dim(0), bn = b.dim(1);
  DenseTensor out({am * bm, an * bn});
  for (std::size_t i = 0; i < am; ++i)
    for (std::size_t j = 0; j < an; ++j) {
      const double av = a.at(i * an + j);
      if (av == 0.0) continue;
      for (std::size_t k = 0; k < bm; ++k)
        for (std::size_t l = 0; l < bn; ++l)
          out.at((i * bm + k) * (an * bn) + j * bn + l) = av * b.at(k * bn + l);
    }
  return out;
}

ModelSpec ModelSpec::custom_two_site(DenseTensor m) {
  ModelSpec s;
  s.kind = Kind::CustomTwoSite;
  s.custom = std::move(m);
  return s;
}

ModelSpec ModelSpec::parse(const std::string& str) {
  if (str == "xy") return xy();
  if (str.rfind("ising", 0) == 0) {
    double h = 0.5;
    const auto pos = str.find(":h=");
    if (pos != std::string::npos) h = std::stod(str.substr(pos + 3));
    else if (str != "ising") throw Error("cannot parse model spec: " + str);
    return ising(h);
  }
  if (str.rfind("custom:", 0) == 0) {
    const std::string path = str.substr(7);
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open custom term file: " + path);
    return custom_two_site(DenseTensor::load(f));
  }
  throw Error("cannot parse model spec: " + str);
}

std::string ModelSpec::to_string() const {
  switch (kind) {
    case Kind::TransverseIsing: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "ising:h=%.17g", h);
      return buf;
    }
    case Kind::XY: return "xy";
    case Kind::CustomTwoSite: return "custom";
  }
  return "?";
}

DenseTensor hamiltonian_term(const ModelSpec& spec) {
  const auto S = SpinOperators::spin_half();
  DenseTensor eye({2, 2}, {1.0, 0.0, 0.0, 1.0});
  switch (spec.kind) {
    case ModelSpec::Kind::TransverseIsing: {
      DenseTensor term = kron(S.sx, S.sx);
      const DenseTensor zl = kron(S.sz, eye), zr = kron(eye, S.sz);
      for (std::size_t i = 0; i < term.size(); ++i)
        term.at(i) -= 0.5 * spec.h * (zl.at(i) + zr.at(i));
      return term;
    }
    case ModelSpec::Kind::XY: {
      // (S+ S- + S- S+)/2 = SxSx + SySy as a real matrix
      DenseTensor sp({2, 2}, {0.0, 1.0, 0.0, 0.0});
      DenseTensor sm({2, 2}, {0.0, 0.0, 1.0, 0.0});
      DenseTensor a = kron(sp, sm), b = kron(sm, sp);
      for (std::size_t i = 0; i < a.size(); ++i) a.at(i) = 0.5 * (a.at(i) + b.at(i));
      return a;
    }
    case ModelSpec::Kind::CustomTwoSite: {
      if (!spec.custom) throw Error("custom model without matrix");
      const DenseTensor& m = *spec.custom;
      if (m.rank() != 2 || m.dim(0) != m.dim(1)) throw Error("custom term must be square");
      const std::size_t n = m.dim(0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (std::fabs(m.at(i * n + j) - m.at(j * n + i)) >
              1e-12 * std::max(1.0, m.max_abs()))
            throw Error("custom two-site term is not symmetric");
      return m;
    }
  }
  throw Error("bad model kind");
}

TwoSiteGate gate(const DenseTensor& term, double tau) {
  if (tau < 0.0) throw Error("negative tau");
  const auto eig = sym_eig(term);
  const std::size_t n = term.dim(0);
  DenseTensor g({n, n});
  // g = V exp(-tau w) V^T
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        s += eig.vectors.at(i * n + k) * std::exp(-tau * eig.eigenvalues[k]) *
             eig.vectors.at(j * n + k);
      g.at(i * n + j) = s;
    }
  // symmetrize away the last-bit asymmetry from the triple product
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * (g.at(i * n + j) + g.at(j * n + i));
      g.at(i * n + j) = g.at(j * n + i) = v;
    }
  return {tau, std::move(g)};
}

}  // namespace tnt
