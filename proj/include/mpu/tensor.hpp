#pragma once

#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "mpu/errors.hpp"

namespace mpu {

// Dense row-major array of doubles. Rank 1 or 2 is all the backbone needs.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;

  Tensor() = default;
  Tensor(std::vector<std::size_t> s, double fill = 0.0)
      : shape(std::move(s)), values(numel_of(shape), fill) {}
  Tensor(std::vector<std::size_t> s, std::vector<double> v)
      : shape(std::move(s)), values(std::move(v)) {
    if (values.size() != numel_of(shape)) {
      throw ShapeError("tensor values do not match shape " + shape_string());
    }
  }

  static std::size_t numel_of(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
  }

  static Tensor scalar(double v) { return Tensor({1}, std::vector<double>{v}); }

  std::size_t numel() const { return values.size(); }
  bool is_scalar() const { return numel() == 1; }

  std::size_t rows() const { return shape.empty() ? 1 : shape[0]; }
  std::size_t cols() const {
    if (shape.size() <= 1) return shape.empty() ? 1 : shape[0];
    return shape[1];
  }

  double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }

  std::string shape_string() const;
  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

std::string shape_string(const std::vector<std::size_t>& shape);

// Throws ShapeError naming both shapes unless they match.
void check_same_shape(const Tensor& a, const Tensor& b, const char* op);

}  // namespace mpu
