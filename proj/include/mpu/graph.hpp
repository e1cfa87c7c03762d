#pragma once

#include <string>
#include <vector>

#include "mpu/params.hpp"
#include "mpu/tensor.hpp"

namespace mpu {

struct NodeId {
  std::size_t index = 0;
  bool operator==(const NodeId&) const = default;
};

// Eager tape: values are computed as nodes are appended, so creation
// order is already a topological order. backward() walks it in reverse.
class Graph {
 public:
  // constant input, receives no gradient
  NodeId leaf(Tensor value);
  // named trainable leaf; backward() reports its gradient
  NodeId param(const std::string& name, Tensor value);

  // y = x W + b with x:(n,i), W:(i,o), b:(o)
  NodeId linear(NodeId x, NodeId w, NodeId b);
  NodeId relu(NodeId x);
  NodeId tanh(NodeId x);
  NodeId add(NodeId a, NodeId b);
  NodeId scale(NodeId x, double factor);
  // along columns; row counts must agree
  NodeId concat(NodeId a, NodeId b);
  // each row repeated r times in place: rows [a,b] -> [a,a,b,b] for r=2
  NodeId replicate(NodeId x, std::size_t r);
  // whole block repeated n times: rows [a,b] -> [a,b,a,b] for n=2
  NodeId tile(NodeId x, std::size_t n);
  // mean over all elements -> scalar
  NodeId reduce_mean(NodeId x);
  // scalar node with an externally computed value and gradient w.r.t.
  // its input (used to splice the Chamfer loss into the tape)
  NodeId custom_scalar(NodeId input, double value, Tensor grad_wrt_input);

  const Tensor& value(NodeId id) const { return nodes_[id.index].value; }
  std::size_t node_count() const { return nodes_.size(); }

  // Exact reverse-mode gradients for every param node; parameters the
  // loss does not depend on get zero gradients. Deterministic: repeated
  // calls return bit-identical results. Throws ContractError unless the
  // loss node is scalar.
  ParameterSet backward(NodeId loss) const;

 private:
  enum class Op {
    kLeaf,
    kParam,
    kLinear,
    kRelu,
    kTanh,
    kAdd,
    kScale,
    kConcat,
    kReplicate,
    kTile,
    kReduceMean,
    kCustomScalar,
  };

  struct Node {
    Op op;
    std::vector<std::size_t> inputs;
    Tensor value;
    double factor = 0.0;      // scale factor / replicate r / tile n
    Tensor custom_grad;       // custom_scalar only
    std::string name;         // param only
  };

  NodeId push(Node node);
  const Node& node(NodeId id) const { return nodes_[id.index]; }
  void check_id(NodeId id, const char* op) const;

  std::vector<Node> nodes_;
};

}  // namespace mpu
