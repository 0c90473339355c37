#pragma once

// Dense row-major real tensors with mode products. Index order is
// party-1-major: the last mode varies fastest.

#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bellineq/errors.hpp"

namespace bellineq {

class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(std::vector<std::size_t> dims)
      : dims_(std::move(dims)), data_(element_count(dims_), 0.0) {}
  DenseTensor(std::vector<std::size_t> dims, std::vector<double> data)
      : dims_(std::move(dims)), data_(std::move(data)) {
    require(data_.size() == element_count(dims_), "tensor data size mismatch");
  }

  static std::size_t element_count(const std::vector<std::size_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                           std::multiplies<>());
  }

  std::size_t order() const { return dims_.size(); }
  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t size() const { return data_.size(); }
  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  double operator[](std::size_t flat) const { return data_[flat]; }
  double& operator[](std::size_t flat) { return data_[flat]; }

  std::size_t flat_index(std::span<const std::size_t> idx) const {
    std::size_t flat = 0;
    for (std::size_t m = 0; m < dims_.size(); ++m) flat = flat * dims_[m] + idx[m];
    return flat;
  }
  double at(std::span<const std::size_t> idx) const { return data_[flat_index(idx)]; }

  /// Contracts mode `mode` with `matrix` (rows x dims[mode]); the mode's
  /// extent becomes matrix.rows().
  DenseTensor mode_product(std::size_t mode, const Eigen::MatrixXd& matrix) const {
    require(mode < dims_.size(), "mode out of range");
    require(static_cast<std::size_t>(matrix.cols()) == dims_[mode],
            "mode product dimension mismatch");
    std::size_t outer = 1, inner = 1;
    for (std::size_t m = 0; m < mode; ++m) outer *= dims_[m];
    for (std::size_t m = mode + 1; m < dims_.size(); ++m) inner *= dims_[m];
    const std::size_t in_dim = dims_[mode];
    const std::size_t out_dim = static_cast<std::size_t>(matrix.rows());
    std::vector<std::size_t> new_dims = dims_;
    new_dims[mode] = out_dim;
    DenseTensor out(std::move(new_dims));
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t r = 0; r < out_dim; ++r) {
        double* dst = &out.data_[(o * out_dim + r) * inner];
        for (std::size_t c = 0; c < in_dim; ++c) {
          const double w = matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
          if (w == 0.0) continue;
          const double* src = &data_[(o * in_dim + c) * inner];
          for (std::size_t i = 0; i < inner; ++i) dst[i] += w * src[i];
        }
      }
    }
    return out;
  }

  /// Contracts mode `mode` with a vector, keeping the mode with extent 1.
  DenseTensor contract(std::size_t mode, const Eigen::VectorXd& v) const {
    return mode_product(mode, v.transpose());
  }

  double dot(const DenseTensor& other) const {
    require(dims_ == other.dims_, "tensor dot shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) acc += data_[i] * other.data_[i];
    return acc;
  }

  double squared_norm() const { return dot(*this); }

 private:
  std::vector<std::size_t> dims_;
  std::vector<double> data_;
};

}  // namespace bellineq
