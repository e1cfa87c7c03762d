#include "mpu/params.hpp"

#include <cmath>

namespace mpu {

void ParameterSet::insert(const std::string& name, Tensor t) {
  auto [it, fresh] = entries_.emplace(name, std::move(t));
  if (!fresh) throw ContractError("ParameterSet: duplicate name '" + name + "'");
}

const Tensor& ParameterSet::at(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw ContractError("ParameterSet: no parameter named '" + name + "'");
  }
  return it->second;
}

Tensor& ParameterSet::at(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw ContractError("ParameterSet: no parameter named '" + name + "'");
  }
  return it->second;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : entries_) n += t.numel();
  return n;
}

bool ParameterSet::same_schema(const ParameterSet& o) const {
  if (entries_.size() != o.entries_.size()) return false;
  auto a = entries_.begin();
  auto b = o.entries_.begin();
  for (; a != entries_.end(); ++a, ++b) {
    if (a->first != b->first || a->second.shape != b->second.shape) return false;
  }
  return true;
}

std::vector<double> ParameterSet::flatten() const {
  std::vector<double> flat;
  flat.reserve(scalar_count());
  for (const auto& [name, t] : entries_) {
    flat.insert(flat.end(), t.values.begin(), t.values.end());
  }
  return flat;
}

ParameterSet ParameterSet::unflatten(const std::vector<double>& flat) const {
  if (flat.size() != scalar_count()) {
    throw ContractError("unflatten: flat size does not match schema");
  }
  ParameterSet out;
  std::size_t pos = 0;
  for (const auto& [name, t] : entries_) {
    Tensor copy(t.shape);
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(pos),
              flat.begin() + static_cast<std::ptrdiff_t>(pos + t.numel()),
              copy.values.begin());
    pos += t.numel();
    out.insert(name, std::move(copy));
  }
  return out;
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet out;
  for (const auto& [name, t] : entries_) out.insert(name, Tensor(t.shape));
  return out;
}

ParameterSet axpy(double a, const ParameterSet& x, const ParameterSet& y) {
  if (!x.same_schema(y)) throw ContractError("axpy: parameter schemas differ");
  ParameterSet out = y;
  for (auto& [name, t] : out) {
    const Tensor& xt = x.at(name);
    for (std::size_t i = 0; i < t.numel(); ++i) t.values[i] += a * xt.values[i];
  }
  return out;
}

double max_abs(const ParameterSet& p) {
  double m = 0.0;
  for (const auto& [name, t] : p) {
    for (double v : t.values) m = std::max(m, std::abs(v));
  }
  return m;
}

double l2_norm(const ParameterSet& p) {
  double s = 0.0;
  for (const auto& [name, t] : p) {
    for (double v : t.values) s += v * v;
  }
  return std::sqrt(s);
}

double dot(const ParameterSet& a, const ParameterSet& b) {
  if (!a.same_schema(b)) throw ContractError("dot: parameter schemas differ");
  double s = 0.0;
  auto ib = b.begin();
  for (auto ia = a.begin(); ia != a.end(); ++ia, ++ib) {
    for (std::size_t i = 0; i < ia->second.numel(); ++i) {
      s += ia->second.values[i] * ib->second.values[i];
    }
  }
  return s;
}

std::string find_nan(const ParameterSet& p) {
  for (const auto& [name, t] : p) {
    for (double v : t.values) {
      if (std::isnan(v)) return name;
    }
  }
  return {};
}

ParameterSet hvp(const GradFn& grad_fn, const ParameterSet& params,
                 const ParameterSet& vector) {
  if (!params.same_schema(vector)) {
    throw ContractError("hvp: vector schema does not match params");
  }
  double eps = 1e-4 * (1.0 + max_abs(params));
  ParameterSet plus = grad_fn(axpy(eps, vector, params));
  ParameterSet minus = grad_fn(axpy(-eps, vector, params));
  // (plus - minus) / (2 eps)
  ParameterSet out = plus.zeros_like();
  for (auto& [name, t] : out) {
    const Tensor& gp = plus.at(name);
    const Tensor& gm = minus.at(name);
    for (std::size_t i = 0; i < t.numel(); ++i) {
      t.values[i] = (gp.values[i] - gm.values[i]) / (2.0 * eps);
    }
  }
  return out;
}

}  // namespace mpu
