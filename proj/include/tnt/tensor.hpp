#pragma once
// Dense real tensor algebra: contraction, permutation, reshape, truncated SVD,
// symmetric eigendecomposition, binary serialization.
//
// Element ordering is row-major over the legs in listed order; this ordering
// is part of the serialization format and is relied on for bit-reproducible
// checkpoints.

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tnt {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(std::vector<std::size_t> shape);
  DenseTensor(std::vector<std::size_t> shape, std::vector<std::string> legs);
  DenseTensor(std::vector<std::size_t> shape, std::vector<double> data,
              std::vector<std::string> legs = {});
  DenseTensor(std::vector<std::size_t> shape, std::initializer_list<double> data)
      : DenseTensor(std::move(shape), std::vector<double>(data)) {}

  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  const std::vector<std::size_t>& shape() const { return shape_; }
  const std::vector<std::string>& legs() const { return legs_; }
  bool has_legs() const { return !legs_.empty(); }
  std::size_t leg_index(const std::string& name) const;

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& at(std::size_t flat) { return data_[flat]; }
  double at(std::size_t flat) const { return data_[flat]; }

  template <class... Ix>
  double& operator()(Ix... ix) {
    return data_[offset({static_cast<std::size_t>(ix)...})];
  }
  template <class... Ix>
  double operator()(Ix... ix) const {
    return data_[offset({static_cast<std::size_t>(ix)...})];
  }

  DenseTensor& set_legs(std::vector<std::string> legs);

  double norm() const;      // Frobenius
  double max_abs() const;
  bool all_finite() const;

  void save(std::ostream& os) const;
  static DenseTensor load(std::istream& is);

 private:
  std::size_t offset(std::initializer_list<std::size_t> ix) const;

  std::vector<std::size_t> shape_;
  std::vector<std::string> legs_;
  std::vector<double> data_;
};

// out legs follow perm (perm[i] = input axis placed at output axis i)
DenseTensor permute(const DenseTensor& t, const std::vector<std::size_t>& perm);

// same data, new shape (product must match); legs dropped unless provided
DenseTensor reshape(const DenseTensor& t, std::vector<std::size_t> shape,
                    std::vector<std::string> legs = {});

// Pairwise contraction. Result legs: unpaired legs of a (in order), then
// unpaired legs of b (in order).
DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     const std::vector<std::pair<std::size_t, std::size_t>>& pairs);
DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     const std::vector<std::pair<std::string, std::string>>& pairs);

struct SvdResult {
  DenseTensor left_factor;                  // row legs + new bond (last axis)
  std::vector<double> singular_values;      // nonincreasing, >= 0
  DenseTensor right_factor;                 // new bond (first axis) + col legs
  double truncation_error = 0.0;            // sum sq discarded / sum sq all
};

SvdResult svd_truncated(const DenseTensor& t, const std::vector<std::size_t>& row_legs,
                        const std::vector<std::size_t>& col_legs,
                        std::size_t max_rank, double cutoff = 1e-14);

struct SymEigResult {
  std::vector<double> eigenvalues;  // ascending
  DenseTensor vectors;              // column j = eigenvector j
};

// m: square rank-2 tensor, symmetric within 1e-10 * max|m|
SymEigResult sym_eig(const DenseTensor& m);

// Dense m x n row-major helpers used by the hot paths (matrix = rank-2 tensor).
DenseTensor matmul(const DenseTensor& a, const DenseTensor& b);

}  // namespace tnt
