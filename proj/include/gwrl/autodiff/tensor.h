#ifndef GWRL_AUTODIFF_TENSOR_H_
#define GWRL_AUTODIFF_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gwrl::ad {

using Shape = std::vector<std::size_t>;

/// Raised when tensor extents do not line up. The message names the operand
/// (or parameter path) at fault.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string ShapeToString(const Shape& shape);

/// Dense row-major buffer of 64-bit reals. Every extent is >= 1 and the
/// element count always equals the product of the extents.
class Tensor {
 public:
  /// Scalar zero, shape [1].
  Tensor();
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor Vector(std::vector<double> values);
  static Tensor Scalar(double value);
  static Tensor Matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return values_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& buffer() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double at(std::size_t row, std::size_t col) const {
    return values_[row * shape_.back() + col];
  }
  double& at(std::size_t row, std::size_t col) {
    return values_[row * shape_.back() + col];
  }

  void Fill(double value);
  /// this += other, shapes must match.
  void AddInPlace(const Tensor& other, double scale = 1.0);

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<double> values_;
};

std::size_t NumElements(const Shape& shape);

}  // namespace gwrl::ad

#endif  // GWRL_AUTODIFF_TENSOR_H_
