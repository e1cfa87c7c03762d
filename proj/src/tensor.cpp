#include "mpu/tensor.hpp"

#include <sstream>

namespace mpu {

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ")";
  return os.str();
}

std::string Tensor::shape_string() const { return mpu::shape_string(shape); }

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_string() +
                     " vs " + b.shape_string());
  }
}

}  // namespace mpu
