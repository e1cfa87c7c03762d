#include "mpu/graph.hpp"

#include <cmath>

namespace mpu {

NodeId Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return NodeId{nodes_.size() - 1};
}

void Graph::check_id(NodeId id, const char* op) const {
  if (id.index >= nodes_.size()) {
    throw ContractError(std::string(op) + ": node id out of range");
  }
}

NodeId Graph::leaf(Tensor value) {
  return push(Node{Op::kLeaf, {}, std::move(value)});
}

NodeId Graph::param(const std::string& name, Tensor value) {
  for (const Node& n : nodes_) {
    if (n.op == Op::kParam && n.name == name) {
      throw ContractError("graph already holds a param named '" + name + "'");
    }
  }
  Node n{Op::kParam, {}, std::move(value)};
  n.name = name;
  return push(std::move(n));
}

NodeId Graph::linear(NodeId x, NodeId w, NodeId b) {
  check_id(x, "linear");
  check_id(w, "linear");
  check_id(b, "linear");
  const Tensor& xv = node(x).value;
  const Tensor& wv = node(w).value;
  const Tensor& bv = node(b).value;
  if (xv.shape.size() != 2 || wv.shape.size() != 2 || bv.shape.size() != 1 ||
      xv.shape[1] != wv.shape[0] || wv.shape[1] != bv.shape[0]) {
    throw ShapeError("linear: incompatible shapes x" + xv.shape_string() + " W" +
                     wv.shape_string() + " b" + bv.shape_string());
  }
  std::size_t n = xv.shape[0], in = xv.shape[1], out = wv.shape[1];
  Tensor y({n, out});
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < out; ++c) {
      double acc = bv.values[c];
      for (std::size_t k = 0; k < in; ++k) acc += xv.at(r, k) * wv.at(k, c);
      y.at(r, c) = acc;
    }
  }
  return push(Node{Op::kLinear, {x.index, w.index, b.index}, std::move(y)});
}

NodeId Graph::relu(NodeId x) {
  check_id(x, "relu");
  Tensor y = node(x).value;
  for (double& v : y.values) v = v > 0.0 ? v : 0.0;
  return push(Node{Op::kRelu, {x.index}, std::move(y)});
}

NodeId Graph::tanh(NodeId x) {
  check_id(x, "tanh");
  Tensor y = node(x).value;
  for (double& v : y.values) v = std::tanh(v);
  return push(Node{Op::kTanh, {x.index}, std::move(y)});
}

NodeId Graph::add(NodeId a, NodeId b) {
  check_id(a, "add");
  check_id(b, "add");
  check_same_shape(node(a).value, node(b).value, "add");
  Tensor y = node(a).value;
  const Tensor& bv = node(b).value;
  for (std::size_t i = 0; i < y.numel(); ++i) y.values[i] += bv.values[i];
  return push(Node{Op::kAdd, {a.index, b.index}, std::move(y)});
}

NodeId Graph::scale(NodeId x, double factor) {
  check_id(x, "scale");
  Tensor y = node(x).value;
  for (double& v : y.values) v *= factor;
  Node n{Op::kScale, {x.index}, std::move(y)};
  n.factor = factor;
  return push(std::move(n));
}

NodeId Graph::concat(NodeId a, NodeId b) {
  check_id(a, "concat");
  check_id(b, "concat");
  const Tensor& av = node(a).value;
  const Tensor& bv = node(b).value;
  if (av.shape.size() != 2 || bv.shape.size() != 2 || av.shape[0] != bv.shape[0]) {
    throw ShapeError("concat: incompatible shapes " + av.shape_string() + " vs " +
                     bv.shape_string());
  }
  std::size_t n = av.shape[0], ca = av.shape[1], cb = bv.shape[1];
  Tensor y({n, ca + cb});
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < ca; ++c) y.at(r, c) = av.at(r, c);
    for (std::size_t c = 0; c < cb; ++c) y.at(r, ca + c) = bv.at(r, c);
  }
  return push(Node{Op::kConcat, {a.index, b.index}, std::move(y)});
}

NodeId Graph::replicate(NodeId x, std::size_t r) {
  check_id(x, "replicate");
  if (r < 1) throw ContractError("replicate: r must be >= 1");
  const Tensor& xv = node(x).value;
  if (xv.shape.size() != 2) {
    throw ShapeError("replicate: rank-2 tensor required, got " + xv.shape_string());
  }
  std::size_t n = xv.shape[0], c = xv.shape[1];
  Tensor y({n * r, c});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      for (std::size_t k = 0; k < c; ++k) y.at(i * r + j, k) = xv.at(i, k);
    }
  }
  Node node{Op::kReplicate, {x.index}, std::move(y)};
  node.factor = static_cast<double>(r);
  return push(std::move(node));
}

NodeId Graph::tile(NodeId x, std::size_t n) {
  check_id(x, "tile");
  if (n < 1) throw ContractError("tile: n must be >= 1");
  const Tensor& xv = node(x).value;
  if (xv.shape.size() != 2) {
    throw ShapeError("tile: rank-2 tensor required, got " + xv.shape_string());
  }
  std::size_t rows = xv.shape[0], c = xv.shape[1];
  Tensor y({rows * n, c});
  for (std::size_t rep = 0; rep < n; ++rep) {
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t k = 0; k < c; ++k) y.at(rep * rows + i, k) = xv.at(i, k);
    }
  }
  Node node{Op::kTile, {x.index}, std::move(y)};
  node.factor = static_cast<double>(n);
  return push(std::move(node));
}

NodeId Graph::reduce_mean(NodeId x) {
  check_id(x, "reduce_mean");
  const Tensor& xv = node(x).value;
  double acc = 0.0;
  for (double v : xv.values) acc += v;
  return push(Node{Op::kReduceMean, {x.index},
                   Tensor::scalar(acc / static_cast<double>(xv.numel()))});
}

NodeId Graph::custom_scalar(NodeId input, double value, Tensor grad_wrt_input) {
  check_id(input, "custom_scalar");
  check_same_shape(node(input).value, grad_wrt_input, "custom_scalar");
  Node n{Op::kCustomScalar, {input.index}, Tensor::scalar(value)};
  n.custom_grad = std::move(grad_wrt_input);
  return push(std::move(n));
}

ParameterSet Graph::backward(NodeId loss) const {
  check_id(loss, "backward");
  if (!node(loss).value.is_scalar()) {
    throw ContractError("backward: loss node must be scalar, got shape " +
                        node(loss).value.shape_string());
  }

  std::vector<Tensor> adjoint(nodes_.size());
  std::vector<bool> live(nodes_.size(), false);
  auto touch = [&](std::size_t i) -> Tensor& {
    if (!live[i]) {
      adjoint[i] = Tensor(nodes_[i].value.shape);
      live[i] = true;
    }
    return adjoint[i];
  };
  touch(loss.index).values[0] = 1.0;

  for (std::size_t idx = loss.index + 1; idx-- > 0;) {
    if (!live[idx]) continue;
    const Node& n = nodes_[idx];
    const Tensor& g = adjoint[idx];
    switch (n.op) {
      case Op::kLeaf:
      case Op::kParam:
        break;
      case Op::kLinear: {
        const Tensor& xv = nodes_[n.inputs[0]].value;
        const Tensor& wv = nodes_[n.inputs[1]].value;
        std::size_t rows = xv.shape[0], in = xv.shape[1], out = wv.shape[1];
        Tensor& gx = touch(n.inputs[0]);
        Tensor& gw = touch(n.inputs[1]);
        Tensor& gb = touch(n.inputs[2]);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < out; ++c) {
            double go = g.at(r, c);
            gb.values[c] += go;
            for (std::size_t k = 0; k < in; ++k) {
              gx.at(r, k) += go * wv.at(k, c);
              gw.at(k, c) += go * xv.at(r, k);
            }
          }
        }
        break;
      }
      case Op::kRelu: {
        const Tensor& xv = nodes_[n.inputs[0]].value;
        Tensor& gx = touch(n.inputs[0]);
        for (std::size_t i = 0; i < gx.numel(); ++i) {
          if (xv.values[i] > 0.0) gx.values[i] += g.values[i];
        }
        break;
      }
      case Op::kTanh: {
        Tensor& gx = touch(n.inputs[0]);
        for (std::size_t i = 0; i < gx.numel(); ++i) {
          double t = n.value.values[i];
          gx.values[i] += g.values[i] * (1.0 - t * t);
        }
        break;
      }
      case Op::kAdd: {
        Tensor& ga = touch(n.inputs[0]);
        Tensor& gb = touch(n.inputs[1]);
        for (std::size_t i = 0; i < g.numel(); ++i) {
          ga.values[i] += g.values[i];
          gb.values[i] += g.values[i];
        }
        break;
      }
      case Op::kScale: {
        Tensor& gx = touch(n.inputs[0]);
        for (std::size_t i = 0; i < g.numel(); ++i) {
          gx.values[i] += n.factor * g.values[i];
        }
        break;
      }
      case Op::kConcat: {
        Tensor& ga = touch(n.inputs[0]);
        Tensor& gb = touch(n.inputs[1]);
        std::size_t rows = ga.shape[0], ca = ga.shape[1], cb = gb.shape[1];
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < ca; ++c) ga.at(r, c) += g.at(r, c);
          for (std::size_t c = 0; c < cb; ++c) gb.at(r, c) += g.at(r, ca + c);
        }
        break;
      }
      case Op::kReplicate: {
        Tensor& gx = touch(n.inputs[0]);
        std::size_t r = static_cast<std::size_t>(n.factor);
        std::size_t rows = gx.shape[0], cols = gx.shape[1];
        for (std::size_t i = 0; i < rows; ++i) {
          for (std::size_t j = 0; j < r; ++j) {
            for (std::size_t k = 0; k < cols; ++k) {
              gx.at(i, k) += g.at(i * r + j, k);
            }
          }
        }
        break;
      }
      case Op::kTile: {
        Tensor& gx = touch(n.inputs[0]);
        std::size_t reps = static_cast<std::size_t>(n.factor);
        std::size_t rows = gx.shape[0], cols = gx.shape[1];
        for (std::size_t rep = 0; rep < reps; ++rep) {
          for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t k = 0; k < cols; ++k) {
              gx.at(i, k) += g.at(rep * rows + i, k);
            }
          }
        }
        break;
      }
      case Op::kReduceMean: {
        Tensor& gx = touch(n.inputs[0]);
        double go = g.values[0] / static_cast<double>(gx.numel());
        for (double& v : gx.values) v += go;
        break;
      }
      case Op::kCustomScalar: {
        Tensor& gx = touch(n.inputs[0]);
        double go = g.values[0];
        for (std::size_t i = 0; i < gx.numel(); ++i) {
          gx.values[i] += go * n.custom_grad.values[i];
        }
        break;
      }
    }
  }

  ParameterSet grads;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].op != Op::kParam) continue;
    grads.insert(nodes_[i].name,
                 live[i] ? adjoint[i] : Tensor(nodes_[i].value.shape));
  }
  return grads;
}

}  // namespace mpu
