#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace bmp {

using Dims = std::vector<std::size_t>;

/// Dense L-mode real tensor. Storage layout is fixed: the earliest mode
/// index varies fastest (mode-1 stride is 1).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Dims dims);                            // zero-filled
  Tensor(Dims dims, std::vector<double> data);

  const Dims& dims() const { return dims_; }
  std::size_t mode_count() const { return dims_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t extent(std::size_t mode_1based) const { return dims_[mode_1based - 1]; }

  double operator[](std::size_t linear) const { return data_[linear]; }
  double& operator[](std::size_t linear) { return data_[linear]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  Eigen::Map<const Eigen::VectorXd> as_vector() const {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
  }
  Eigen::Map<Eigen::VectorXd> as_vector() {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
  }

  bool same_dims(const Tensor& other) const { return dims_ == other.dims_; }

 private:
  Dims dims_;
  std::vector<double> data_;
};

/// Strictly increasing list of 1-based mode indices. Both the subset and its
/// complement must be nonempty for any unfolding, which is checked against
/// the tensor dims at the point of use.
class ModeSubset {
 public:
  ModeSubset() = default;
  explicit ModeSubset(std::vector<int> modes_1based);

  const std::vector<int>& modes() const { return modes_; }
  std::size_t size() const { return modes_.size(); }
  bool contains(int mode) const;

  // Throws unless every index is within [1, L] and the complement is nonempty.
  void validate_for(std::size_t mode_count) const;
  std::vector<int> complement(std::size_t mode_count) const;

  bool operator==(const ModeSubset& other) const { return modes_ == other.modes_; }

 private:
  std::vector<int> modes_;
};

/// Binary observation indicator with Tensor extents; 1 = observed.
class MaskTensor {
 public:
  MaskTensor() = default;
  explicit MaskTensor(Tensor indicator);               // values must be 0.0/1.0

  const Tensor& tensor() const { return indicator_; }
  const Dims& dims() const { return indicator_.dims(); }
  std::size_t size() const { return indicator_.size(); }
  bool observed(std::size_t linear) const { return indicator_[linear] != 0.0; }
  std::size_t observed_count() const;

 private:
  Tensor indicator_;
};

// Row-major multi-index strides for the fixed layout (mode 1 fastest).
std::vector<std::size_t> layout_strides(const Dims& dims);

// Generalized unfolding: rows enumerate the multi-index over modes of S
// (ascending mode order, earliest listed mode fastest), columns likewise
// over the complement.
Eigen::MatrixXd unfold(const Tensor& x, const ModeSubset& subset);

// Exact inverse of unfold for the given subset and dims.
Tensor refold(const Eigen::MatrixXd& m, const ModeSubset& subset, const Dims& dims);

double inner(const Tensor& x, const Tensor& y);
double frobenius_norm(const Tensor& x);

// Entry-wise x .* mask.
Tensor apply_mask(const Tensor& x, const MaskTensor& mask);

// y + a*x.
Tensor axpy(double a, const Tensor& x, const Tensor& y);

}  // namespace bmp
