#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace deeplift {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);
std::string to_string(const Shape& shape);

// Dense row-major array of doubles tagged with its shape.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor filled(Shape shape, double value);
  static Tensor from_vector(std::vector<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  const std::vector<double>& storage() const { return values_; }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  // Rank-2 element access, row-major.
  double at(std::size_t row, std::size_t col) const { return values_[row * shape_[1] + col]; }
  double& at(std::size_t row, std::size_t col) { return values_[row * shape_[1] + col]; }

  bool all_finite() const;
  void fill(double value);

  Tensor& operator+=(const Tensor& other);

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<double> values_;
};

Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator+(const Tensor& a, const Tensor& b);

// Elementwise product; shapes must match.
Tensor hadamard(const Tensor& a, const Tensor& b);

double sum(const Tensor& t);
double max_abs(const Tensor& t);

}  // namespace deeplift
