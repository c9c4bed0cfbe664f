#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "higen/errors.hpp"

namespace higen {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

// Dense tensor of 64-bit floats, row-major. Rank 1 and 2 dominate; rank 3/4
// appear in the conv stack. Eigen maps provide the matrix/vector views.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);
  Tensor(std::vector<int> shape, std::vector<double> values);

  static Tensor scalar(double v);
  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int> shape, double v);

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  int numel() const { return static_cast<int>(values_.size()); }
  bool empty() const { return values_.empty(); }
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool is_scalar() const { return numel() == 1; }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  double& operator[](int i) { return values_[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }

  // Rank-2 element access.
  double& at(int i, int j) { return values_[static_cast<std::size_t>(i) * dim(1) + j]; }
  double at(int i, int j) const { return values_[static_cast<std::size_t>(i) * dim(1) + j]; }

  // Rank-2 view. Throws DimensionError on other ranks.
  MatrixMap matrix();
  ConstMatrixMap matrix() const;

  // Arbitrary [rows x cols] view over the flat storage; rows*cols must equal numel().
  MatrixMap matrix(int rows, int cols);
  ConstMatrixMap matrix(int rows, int cols) const;

  VectorMap flat() { return VectorMap(values_.data(), numel()); }
  ConstVectorMap flat() const { return ConstVectorMap(values_.data(), numel()); }

  bool all_finite() const;
  std::string shape_str() const;

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.values_ == b.values_;
  }

 private:
  std::vector<int> shape_;
  std::vector<double> values_;
};

std::string shape_str(const std::vector<int>& shape);
int shape_numel(const std::vector<int>& shape);

// "HGT1" tensor serialization: magic, u32 rank, u32 dims, f32 values, all
// little-endian. Values are narrowed to 32 bits on write and widened on read.
void write_tensor(std::ostream& out, const Tensor& t);
Tensor read_tensor(std::istream& in, const std::string& context = {});

void write_tensor_file(const std::string& path, const Tensor& t);
Tensor read_tensor_file(const std::string& path);

}  // namespace higen
