#include "tnt/tensor.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>

#include "tnt/kernels.hpp"

namespace tnt {

namespace {

std::size_t product(const std::vector<std::size_t>& v) {
  std::size_t p = 1;
  for (auto d : v) p *= d;
  return p;
}

void check_legs_unique(const std::vector<std::string>& legs) {
  std::set<std::string> seen;
  for (const auto& l : legs)
    if (!seen.insert(l).second) throw Error("duplicate leg label: " + l);
}

std::vector<std::size_t> strides_of(const std::vector<std::size_t>& shape) {
  std::vector<std::size_t> s(shape.size(), 1);
  for (std::size_t i = shape.size(); i-- > 1;) s[i - 1] = s[i] * shape[i];
  return s;
}

}  // namespace

DenseTensor::DenseTensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(product(shape_), 0.0) {
  for (auto d : shape_)
    if (d == 0) throw Error("zero leg dimension");
}

DenseTensor::DenseTensor(std::vector<std::size_t> shape, std::vector<std::string> legs)
    : DenseTensor(std::move(shape)) {
  set_legs(std::move(legs));
}

DenseTensor::DenseTensor(std::vector<std::size_t> shape, std::vector<double> data,
                         std::vector<std::string> legs)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (product(shape_) != data_.size()) throw Error("shape does not match data size");
  if (!legs.empty()) set_legs(std::move(legs));
}

DenseTensor& DenseTensor::set_legs(std::vector<std::string> legs) {
  if (!legs.empty() && legs.size() != shape_.size())
    throw Error("leg label count does not match rank");
  check_legs_unique(legs);
  legs_ = std::move(legs);
  return *this;
}

std::size_t DenseTensor::leg_index(const std::string& name) const {
  for (std::size_t i = 0; i < legs_.size(); ++i)
    if (legs_[i] == name) return i;
  throw Error("unknown leg label: " + name);
}

std::size_t DenseTensor::offset(std::initializer_list<std::size_t> ix) const {
  if (ix.size() != shape_.size()) throw Error("index rank mismatch");
  std::size_t off = 0, axis = 0;
  for (auto i : ix) {
    if (i >= shape_[axis]) throw Error("index out of range");
    off = off * shape_[axis] + i;
    ++axis;
  }
  return off;
}

double DenseTensor::norm() const {
  return std::sqrt(kernels::dot(data_.size(), data_.data(), data_.data()));
}

double DenseTensor::max_abs() const {
  return kernels::max_abs(data_.size(), data_.data());
}

bool DenseTensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

DenseTensor permute(const DenseTensor& t, const std::vector<std::size_t>& perm) {
  const std::size_t r = t.rank();
  if (perm.size() != r) throw Error("permutation rank mismatch");
  std::vector<bool> used(r, false);
  for (auto p : perm) {
    if (p >= r || used[p]) throw Error("invalid permutation");
    used[p] = true;
  }
  std::vector<std::size_t> oshape(r);
  std::vector<std::string> olegs;
  if (t.has_legs()) olegs.resize(r);
  for (std::size_t i = 0; i < r; ++i) {
    oshape[i] = t.shape()[perm[i]];
    if (t.has_legs()) olegs[i] = t.legs()[perm[i]];
  }
  DenseTensor out(oshape, std::move(olegs));
  if (r == 0) {
    out.at(0) = t.at(0);
    return out;
  }
  const auto istr = strides_of(t.shape());
  // stride of the output walk through the input buffer
  std::vector<std::size_t> wstr(r);
  for (std::size_t i = 0; i < r; ++i) wstr[i] = istr[perm[i]];
  std::vector<std::size_t> cnt(r, 0);
  const double* src = t.data();
  double* dst = out.data();
  const std::size_t n = t.size();
  std::size_t ioff = 0;
  const std::size_t inner = oshape[r - 1];
  const std::size_t instr = wstr[r - 1];
  for (std::size_t o = 0; o < n;) {
    if (instr == 1) {
      std::memcpy(dst + o, src + ioff, inner * sizeof(double));
    } else {
      for (std::size_t j = 0; j < inner; ++j) dst[o + j] = src[ioff + j * instr];
    }
    o += inner;
    // advance the outer counter
    std::size_t axis = r - 1;
    while (axis-- > 0) {
      ioff += wstr[axis];
      if (++cnt[axis] < oshape[axis]) break;
      ioff -= wstr[axis] * oshape[axis];
      cnt[axis] = 0;
    }
    if (axis == static_cast<std::size_t>(-1)) break;
  }
  return out;
}

DenseTensor reshape(const DenseTensor& t, std::vector<std::size_t> shape,
                    std::vector<std::string> legs) {
  if (product(shape) != t.size()) throw Error("reshape size mismatch");
  return DenseTensor(std::move(shape), std::vector<double>(t.data(), t.data() + t.size()),
                     std::move(legs));
}

DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  const std::size_t ra = a.rank(), rb = b.rank();
  std::vector<bool> pa(ra, false), pb(rb, false);
  std::size_t kdim = 1;
  for (const auto& [la, lb] : pairs) {
    if (la >= ra || lb >= rb) throw Error("contraction leg out of range");
    if (pa[la] || pb[lb]) throw Error("leg paired twice");
    if (a.shape()[la] != b.shape()[lb])
      throw Error("contraction dimension mismatch (" + std::to_string(a.shape()[la]) +
                  " vs " + std::to_string(b.shape()[lb]) + ")");
    pa[la] = pb[lb] = true;
    kdim *= a.shape()[la];
  }
  std::vector<std::size_t> aperm, bperm;
  std::vector<std::size_t> oshape;
  std::vector<std::string> olegs;
  bool label = a.has_legs() && b.has_legs();
  for (std::size_t i = 0; i < ra; ++i)
    if (!pa[i]) {
      aperm.push_back(i);
      oshape.push_back(a.shape()[i]);
      if (label) olegs.push_back(a.legs()[i]);
    }
  const std::size_t m = product(oshape);
  for (const auto& [la, lb] : pairs) aperm.push_back(la);
  for (const auto& [la, lb] : pairs) bperm.push_back(lb);
  std::size_t n = 1;
  for (std::size_t i = 0; i < rb; ++i)
    if (!pb[i]) {
      bperm.push_back(i);
      oshape.push_back(b.shape()[i]);
      if (label) olegs.push_back(b.legs()[i]);
      n *= b.shape()[i];
    }
  DenseTensor am = permute(a, aperm);
  DenseTensor bm = permute(b, bperm);
  if (label) {
    // a leg name surviving on both sides would collide; drop labels then
    std::set<std::string> seen;
    for (const auto& l : olegs)
      if (!seen.insert(l).second) {
        label = false;
        break;
      }
  }
  DenseTensor out(oshape.empty() ? std::vector<std::size_t>{1} : oshape,
                  label ? olegs : std::vector<std::string>{});
  kernels::gemm(m, n, kdim, am.data(), kdim, bm.data(), n, out.data(), n);
  return out;
}

DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::vector<std::pair<std::size_t, std::size_t>> ip;
  ip.reserve(pairs.size());
  for (const auto& [la, lb] : pairs) ip.emplace_back(a.leg_index(la), b.leg_index(lb));
  return contract(a, b, ip);
}

DenseTensor matmul(const DenseTensor& a, const DenseTensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
    throw Error("matmul shape mismatch");
  DenseTensor c({a.dim(0), b.dim(1)});
  kernels::gemm(a.dim(0), b.dim(1), a.dim(1), a.data(), a.dim(1), b.data(), b.dim(1),
                c.data(), b.dim(1));
  return c;
}

SvdResult svd_truncated(const DenseTensor& t, const std::vector<std::size_t>& row_legs,
                        const std::vector<std::size_t>& col_legs,
                        std::size_t max_rank, double cutoff) {
  if (row_legs.empty() || col_legs.empty()) throw Error("empty leg partition in SVD");
  if (row_legs.size() + col_legs.size() != t.rank())
    throw Error("SVD leg partition must cover all legs");
  if (!t.all_finite()) throw Error("non-finite values in SVD input");
  if (max_rank == 0) throw Error("max_rank must be positive");
  std::vector<std::size_t> perm(row_legs);
  perm.insert(perm.end(), col_legs.begin(), col_legs.end());
  DenseTensor tm = permute(t, perm);
  std::size_t m = 1, n = 1;
  std::vector<std::size_t> rshape, cshape;
  for (auto l : row_legs) {
    m *= t.shape()[l];
    rshape.push_back(t.shape()[l]);
  }
  for (auto l : col_legs) {
    n *= t.shape()[l];
    cshape.push_back(t.shape()[l]);
  }
  const std::size_t k = std::min(m, n);
  std::vector<double> u(m * k), s(k), vt(k * n);
  const int info = LAPACKE_dgesdd(LAPACK_ROW_MAJOR, 'S', static_cast<lapack_int>(m),
                                  static_cast<lapack_int>(n), tm.data(),
                                  static_cast<lapack_int>(n), s.data(), u.data(),
                                  static_cast<lapack_int>(k), vt.data(),
                                  static_cast<lapack_int>(n));
  if (info != 0) throw Error("SVD failed to converge (dgesdd info=" + std::to_string(info) + ")");
  std::size_t keep = 0;
  for (std::size_t i = 0; i < k; ++i)
    if (s[i] > cutoff * s[0]) ++keep;
  keep = std::max<std::size_t>(1, std::min(keep, max_rank));
  double tot = 0.0, disc = 0.0;
  for (std::size_t i = 0; i < k; ++i) tot += s[i] * s[i];
  for (std::size_t i = keep; i < k; ++i) disc += s[i] * s[i];

  rshape.push_back(keep);
  DenseTensor left(rshape);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < keep; ++j) left.at(i * keep + j) = u[i * k + j];
  cshape.insert(cshape.begin(), keep);
  DenseTensor right(cshape);
  for (std::size_t i = 0; i < keep; ++i)
    std::memcpy(right.data() + i * n, vt.data() + i * n, n * sizeof(double));
  s.resize(keep);
  return {std::move(left), std::move(s), std::move(right), tot > 0.0 ? disc / tot : 0.0};
}

SymEigResult sym_eig(const DenseTensor& m) {
  if (m.rank() != 2 || m.dim(0) != m.dim(1)) throw Error("sym_eig needs a square matrix");
  const std::size_t n = m.dim(0);
  double dev = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      dev = std::max(dev, std::fabs(m.at(i * n + j) - m.at(j * n + i)));
  const double scale = m.max_abs();
  if (dev > 1e-10 * std::max(scale, 1e-300))
    throw Error("matrix not symmetric: max asymmetry " + std::to_string(dev));
  DenseTensor v = m;
  std::vector<double> w(n);
  const int info = LAPACKE_dsyevd(LAPACK_ROW_MAJOR, 'V', 'U', static_cast<lapack_int>(n),
                                  v.data(), static_cast<lapack_int>(n), w.data());
  if (info != 0) throw Error("dsyevd failed (info=" + std::to_string(info) + ")");
  return {std::move(w), std::move(v)};
}

namespace {
constexpr char kMagic[4] = {'T', 'N', 'T', 'T'};

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error("truncated tensor stream");
  return v;
}
}  // namespace

void DenseTensor::save(std::ostream& os) const {
  os.write(kMagic, 4);
  put<std::uint32_t>(os, 1);  // version
  put<std::uint32_t>(os, static_cast<std::uint32_t>(rank()));
  for (auto d : shape_) put<std::uint64_t>(os, d);
  put<std::uint8_t>(os, legs_.empty() ? 0 : 1);
  if (!legs_.empty())
    for (const auto& l : legs_) {
      put<std::uint32_t>(os, static_cast<std::uint32_t>(l.size()));
      os.write(l.data(), static_cast<std::streamsize>(l.size()));
    }
  os.write(reinterpret_cast<const char*>(data_.data()),
           static_cast<std::streamsize>(data_.size() * sizeof(double)));
}

DenseTensor DenseTensor::load(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw Error("bad tensor magic");
  if (get<std::uint32_t>(is) != 1) throw Error("unsupported tensor version");
  const auto rank = get<std::uint32_t>(is);
  std::vector<std::size_t> shape(rank);
  for (auto& d : shape) d = static_cast<std::size_t>(get<std::uint64_t>(is));
  std::vector<std::string> legs;
  if (get<std::uint8_t>(is)) {
    legs.resize(rank);
    for (auto& l : legs) {
      const auto len = get<std::uint32_t>(is);
      l.resize(len);
      is.read(l.data(), len);
    }
  }
  DenseTensor t(shape, std::move(legs));
  is.read(reinterpret_cast<char*>(t.data()),
          static_cast<std::streamsize>(t.size() * sizeof(double)));
  if (!is) throw Error("truncated tensor stream");
  return t;
}

}  // namespace tnt
