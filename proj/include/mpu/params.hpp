#pragma once

#include <functional>
#include <map>
#include <string>

#include "mpu/tensor.hpp"

namespace mpu {

// Flat, named collection of trainable tensors. Iteration order is the
// lexicographic name order, which keeps flatten/axpy deterministic.
class ParameterSet {
 public:
  ParameterSet() = default;

  void insert(const std::string& name, Tensor t);
  bool contains(const std::string& name) const { return entries_.count(name) > 0; }
  const Tensor& at(const std::string& name) const;
  Tensor& at(const std::string& name);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t scalar_count() const;

  // true when names and shapes agree entry by entry
  bool same_schema(const ParameterSet& o) const;

  std::vector<double> flatten() const;
  // rebuilds a set with this set's schema from a flat vector
  ParameterSet unflatten(const std::vector<double>& flat) const;

  // all-zero set with the same schema
  ParameterSet zeros_like() const;

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }

 private:
  std::map<std::string, Tensor> entries_;
};

// Elementwise a*x + y over matching schemas. Throws ContractError on
// schema mismatch.
ParameterSet axpy(double a, const ParameterSet& x, const ParameterSet& y);

double max_abs(const ParameterSet& p);
double l2_norm(const ParameterSet& p);
double dot(const ParameterSet& a, const ParameterSet& b);

// Returns the name of the first parameter holding a NaN, or empty.
std::string find_nan(const ParameterSet& p);

// Maps parameters to the gradient of some scalar loss at those parameters.
using GradFn = std::function<ParameterSet(const ParameterSet&)>;

// Hessian-vector product by central finite differences of gradients:
// (grad(theta + eps v) - grad(theta - eps v)) / (2 eps),
// eps = 1e-4 * (1 + max_abs(theta)). Exact for quadratic losses up to
// roundoff. Throws ContractError when the vector schema mismatches.
ParameterSet hvp(const GradFn& grad_fn, const ParameterSet& params,
                 const ParameterSet& vector);

}  // namespace mpu
