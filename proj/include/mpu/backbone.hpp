#pragma once

#include <cstdint>
#include <string>

#include "mpu/geometry.hpp"
#include "mpu/graph.hpp"
#include "mpu/params.hpp"

namespace mpu {

// Compact permutation-equivariant upsampler F: (N,3) -> (rN,3).
// A per-point encoder MLP produces a feature per input point; each
// point is replicated r times, every replica concatenated with a
// trainable per-replica code, and a decoder MLP emits a tanh-bounded
// offset added to the source point.
struct BackboneConfig {
  int ratio = 4;               // one of {2, 4, 8, 16}
  std::size_t feature_dim = 32;
  std::size_t hidden_layers = 2;
  double offset_scale = 0.1;
  std::uint64_t seed = 0;
};

void validate(const BackboneConfig& config);

// Closed-form trainable scalar count for a config:
//   encoder (3F + F) + (H-1)(F^2 + F), codes rF,
//   decoder (2F^2 + F) + (3F + 3).
std::size_t parameter_count(const BackboneConfig& config);

struct Upsampler {
  BackboneConfig config;
  ParameterSet params;
};

// Glorot-uniform weights, zero biases, codes uniform in (-0.1, 0.1).
// Deterministic given config.seed.
Upsampler init_upsampler(const BackboneConfig& config);

struct ForwardResult {
  PointCloud cloud;   // r * x.count() points
  Graph graph;
  NodeId output;      // the (rN, 3) node
};

// Throws ParameterError when x has fewer than 4 points. Input is
// expected normalized to the unit cube.
ForwardResult forward(const Upsampler& model, const PointCloud& x);

struct LossResult {
  double loss = 0.0;  // mean-reduced Chamfer distance
  Graph graph;
  NodeId loss_node;
  PointCloud prediction;
};

// Mean-CD between forward(x) and target, differentiable end to end.
LossResult loss_forward(const Upsampler& model, const PointCloud& x,
                        const PointCloud& target);

// Convenience: gradient of the mean-CD loss at the given parameters.
ParameterSet loss_gradient(const BackboneConfig& config, const ParameterSet& params,
                           const PointCloud& x, const PointCloud& target);

// Flat binary container: magic "MPU1", version, config fields, then
// name/shape/values per parameter (little-endian doubles). Round-trips
// bit-exactly.
void save_checkpoint(const Upsampler& model, const std::string& path);
Upsampler load_checkpoint(const std::string& path);

}  // namespace mpu
