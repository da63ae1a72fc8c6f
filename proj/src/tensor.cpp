#include "bmp/tensor.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace bmp {

namespace {

std::size_t checked_volume(const Dims& dims) {
  if (dims.empty()) throw std::invalid_argument("tensor needs at least one mode");
  std::size_t n = 1;
  for (std::size_t e : dims) {
    if (e == 0) throw std::invalid_argument("tensor extent must be >= 1");
    n *= e;
  }
  return n;
}

}  // namespace

Tensor::Tensor(Dims dims) : dims_(std::move(dims)), data_(checked_volume(dims_), 0.0) {}

Tensor::Tensor(Dims dims, std::vector<double> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  if (checked_volume(dims_) != data_.size())
    throw std::invalid_argument("tensor data length does not match extents");
}

ModeSubset::ModeSubset(std::vector<int> modes_1based) : modes_(std::move(modes_1based)) {
  if (modes_.empty()) throw std::invalid_argument("mode subset must be nonempty");
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    if (modes_[i] < 1) throw std::invalid_argument("mode indices are 1-based");
    if (i > 0 && modes_[i] <= modes_[i - 1])
      throw std::invalid_argument("mode subset must be strictly increasing");
  }
}

bool ModeSubset::contains(int mode) const {
  return std::binary_search(modes_.begin(), modes_.end(), mode);
}

void ModeSubset::validate_for(std::size_t mode_count) const {
  if (modes_.empty()) throw std::invalid_argument("mode subset must be nonempty");
  if (modes_.back() > static_cast<int>(mode_count))
    throw std::invalid_argument("mode index " + std::to_string(modes_.back()) +
                                " out of range for " + std::to_string(mode_count) +
                                "-mode tensor");
  if (modes_.size() >= mode_count)
    throw std::invalid_argument("mode subset complement must be nonempty");
}

std::vector<int> ModeSubset::complement(std::size_t mode_count) const {
  std::vector<int> rest;
  rest.reserve(mode_count - modes_.size());
  for (int m = 1; m <= static_cast<int>(mode_count); ++m)
    if (!contains(m)) rest.push_back(m);
  return rest;
}

MaskTensor::MaskTensor(Tensor indicator) : indicator_(std::move(indicator)) {
  for (std::size_t i = 0; i < indicator_.size(); ++i) {
    double v = indicator_[i];
    if (v != 0.0 && v != 1.0)
      throw std::invalid_argument("mask entries must be exactly 0 or 1");
  }
}

std::size_t MaskTensor::observed_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < indicator_.size(); ++i)
    if (indicator_[i] != 0.0) ++n;
  return n;
}

std::vector<std::size_t> layout_strides(const Dims& dims) {
  std::vector<std::size_t> strides(dims.size());
  std::size_t s = 1;
  for (std::size_t l = 0; l < dims.size(); ++l) {
    strides[l] = s;
    s *= dims[l];
  }
  return strides;
}

namespace {

// Linear-index maps for the two sides of an unfolding: side_index[lin] is the
// row (or column) of tensor entry lin. Built once per call; unfold/refold are
// then a single pass over the data.
struct UnfoldPlan {
  std::vector<std::size_t> row_of;
  std::vector<std::size_t> col_of;
  std::size_t rows = 1;
  std::size_t cols = 1;
};

UnfoldPlan make_plan(const Dims& dims, const ModeSubset& subset) {
  subset.validate_for(dims.size());
  const std::size_t mode_count = dims.size();
  const auto strides = layout_strides(dims);

  // Per-mode stride within the row (subset side) or column (complement side).
  std::vector<std::size_t> side_stride(mode_count, 0);
  std::vector<bool> in_subset(mode_count, false);
  UnfoldPlan plan;
  for (int m : subset.modes()) {
    in_subset[m - 1] = true;
    side_stride[m - 1] = plan.rows;
    plan.rows *= dims[m - 1];
  }
  for (int m : subset.complement(mode_count)) {
    side_stride[m - 1] = plan.cols;
    plan.cols *= dims[m - 1];
  }

  const std::size_t n = plan.rows * plan.cols;
  plan.row_of.resize(n);
  plan.col_of.resize(n);
  std::vector<std::size_t> idx(mode_count, 0);
  std::size_t row = 0, col = 0;
  for (std::size_t lin = 0; lin < n; ++lin) {
    plan.row_of[lin] = row;
    plan.col_of[lin] = col;
    // Odometer increment over the fixed layout (mode 1 fastest).
    for (std::size_t l = 0; l < mode_count; ++l) {
      std::size_t& coord = idx[l];
      const std::size_t step = side_stride[l];
      if (++coord < dims[l]) {
        (in_subset[l] ? row : col) += step;
        break;
      }
      coord = 0;
      (in_subset[l] ? row : col) -= step * (dims[l] - 1);
    }
  }
  return plan;
}

void require_same_dims(const Tensor& x, const Tensor& y, const char* op) {
  if (!x.same_dims(y))
    throw std::invalid_argument(std::string(op) + ": tensor extents differ");
}

}  // namespace

Eigen::MatrixXd unfold(const Tensor& x, const ModeSubset& subset) {
  const UnfoldPlan plan = make_plan(x.dims(), subset);
  Eigen::MatrixXd m(plan.rows, plan.cols);
  for (std::size_t lin = 0; lin < x.size(); ++lin)
    m(static_cast<Eigen::Index>(plan.row_of[lin]),
      static_cast<Eigen::Index>(plan.col_of[lin])) = x[lin];
  return m;
}

Tensor refold(const Eigen::MatrixXd& m, const ModeSubset& subset, const Dims& dims) {
  const UnfoldPlan plan = make_plan(dims, subset);
  if (static_cast<std::size_t>(m.rows()) != plan.rows ||
      static_cast<std::size_t>(m.cols()) != plan.cols)
    throw std::invalid_argument("refold: matrix extents inconsistent with subset and dims");
  Tensor x(dims);
  for (std::size_t lin = 0; lin < x.size(); ++lin)
    x[lin] = m(static_cast<Eigen::Index>(plan.row_of[lin]),
               static_cast<Eigen::Index>(plan.col_of[lin]));
  return x;
}

double inner(const Tensor& x, const Tensor& y) {
  require_same_dims(x, y, "inner");
  return x.as_vector().dot(y.as_vector());
}

double frobenius_norm(const Tensor& x) { return x.as_vector().norm(); }

Tensor apply_mask(const Tensor& x, const MaskTensor& mask) {
  require_same_dims(x, mask.tensor(), "apply_mask");
  Tensor out(x.dims());
  out.as_vector() = x.as_vector().cwiseProduct(mask.tensor().as_vector());
  return out;
}

Tensor axpy(double a, const Tensor& x, const Tensor& y) {
  require_same_dims(x, y, "axpy");
  Tensor out(y.dims());
  out.as_vector() = y.as_vector() + a * x.as_vector();
  return out;
}

}  // namespace bmp
