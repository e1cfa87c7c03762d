#include "mpu/backbone.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "mpu/metrics.hpp"

namespace mpu {

namespace {

std::string enc_w(std::size_t layer) {
  std::ostringstream os;
  os << "enc" << layer << ".W";
  return os.str();
}

std::string enc_b(std::size_t layer) {
  std::ostringstream os;
  os << "enc" << layer << ".b";
  return os.str();
}

Tensor glorot(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-s, s);
  Tensor w({fan_in, fan_out});
  for (double& v : w.values) v = dist(rng);
  return w;
}

Tensor cloud_tensor(const PointCloud& pc) {
  Tensor t({pc.count(), 3});
  for (std::size_t i = 0; i < pc.count(); ++i) {
    t.at(i, 0) = pc.points[i].x;
    t.at(i, 1) = pc.points[i].y;
    t.at(i, 2) = pc.points[i].z;
  }
  return t;
}

PointCloud tensor_cloud(const Tensor& t) {
  PointCloud pc;
  pc.points.resize(t.shape[0]);
  for (std::size_t i = 0; i < pc.count(); ++i) {
    pc.points[i] = {t.at(i, 0), t.at(i, 1), t.at(i, 2)};
  }
  return pc;
}

}  // namespace

void validate(const BackboneConfig& config) {
  if (config.ratio != 2 && config.ratio != 4 && config.ratio != 8 &&
      config.ratio != 16) {
    std::ostringstream os;
    os << "backbone ratio must be one of {2,4,8,16}, got " << config.ratio;
    throw ParameterError(os.str());
  }
  if (config.feature_dim < 8) throw ParameterError("feature_dim must be >= 8");
  if (config.hidden_layers < 1) throw ParameterError("hidden_layers must be >= 1");
  if (config.offset_scale < 0.0) throw ParameterError("offset_scale must be >= 0");
}

std::size_t parameter_count(const BackboneConfig& config) {
  std::size_t f = config.feature_dim;
  std::size_t h = config.hidden_layers;
  std::size_t r = static_cast<std::size_t>(config.ratio);
  std::size_t encoder = (3 * f + f) + (h - 1) * (f * f + f);
  std::size_t codes = r * f;
  std::size_t decoder = (2 * f * f + f) + (3 * f + 3);
  return encoder + codes + decoder;
}

Upsampler init_upsampler(const BackboneConfig& config) {
  validate(config);
  std::mt19937_64 rng(config.seed);
  std::size_t f = config.feature_dim;

  Upsampler model;
  model.config = config;
  for (std::size_t l = 0; l < config.hidden_layers; ++l) {
    std::size_t in = l == 0 ? 3 : f;
    model.params.insert(enc_w(l), glorot(in, f, rng));
    model.params.insert(enc_b(l), Tensor({f}));
  }
  model.params.insert("dec1.W", glorot(2 * f, f, rng));
  model.params.insert("dec1.b", Tensor({f}));
  model.params.insert("dec2.W", glorot(f, 3, rng));
  model.params.insert("dec2.b", Tensor({3}));

  std::uniform_real_distribution<double> code_dist(-0.1, 0.1);
  Tensor codes({static_cast<std::size_t>(config.ratio), f});
  for (double& v : codes.values) v = code_dist(rng);
  model.params.insert("codes", std::move(codes));
  return model;
}

ForwardResult forward(const Upsampler& model, const PointCloud& x) {
  validate(model.config);
  if (x.count() < 4) {
    std::ostringstream os;
    os << "forward: input needs >= 4 points, got " << x.count();
    throw ParameterError(os.str());
  }
  const std::size_t r = static_cast<std::size_t>(model.config.ratio);

  ForwardResult result;
  Graph& g = result.graph;

  NodeId input = g.leaf(cloud_tensor(x));

  NodeId h = input;
  for (std::size_t l = 0; l < model.config.hidden_layers; ++l) {
    NodeId w = g.param(enc_w(l), model.params.at(enc_w(l)));
    NodeId b = g.param(enc_b(l), model.params.at(enc_b(l)));
    h = g.relu(g.linear(h, w, b));
  }

  NodeId features = g.replicate(h, r);
  NodeId codes = g.param("codes", model.params.at("codes"));
  NodeId codes_tiled = g.tile(codes, x.count());
  NodeId cat = g.concat(features, codes_tiled);

  NodeId d1w = g.param("dec1.W", model.params.at("dec1.W"));
  NodeId d1b = g.param("dec1.b", model.params.at("dec1.b"));
  NodeId d2w = g.param("dec2.W", model.params.at("dec2.W"));
  NodeId d2b = g.param("dec2.b", model.params.at("dec2.b"));
  NodeId hidden = g.relu(g.linear(cat, d1w, d1b));
  NodeId raw_offsets = g.linear(hidden, d2w, d2b);
  NodeId offsets = g.scale(g.tanh(raw_offsets), model.config.offset_scale);

  NodeId sources = g.replicate(input, r);
  result.output = g.add(sources, offsets);
  result.cloud = tensor_cloud(g.value(result.output));
  result.cloud.label = x.label;
  return result;
}

LossResult loss_forward(const Upsampler& model, const PointCloud& x,
                        const PointCloud& target) {
  if (target.empty()) throw ParameterError("loss_forward: empty target");
  ForwardResult fwd = forward(model, x);

  ChamferGrad cg = chamfer_loss_grad(fwd.cloud, target);
  Tensor grad({fwd.cloud.count(), 3});
  for (std::size_t i = 0; i < fwd.cloud.count(); ++i) {
    grad.at(i, 0) = cg.grad_y[i].x;
    grad.at(i, 1) = cg.grad_y[i].y;
    grad.at(i, 2) = cg.grad_y[i].z;
  }

  LossResult result;
  result.loss = cg.loss;
  result.prediction = std::move(fwd.cloud);
  result.graph = std::move(fwd.graph);
  result.loss_node = result.graph.custom_scalar(fwd.output, cg.loss, std::move(grad));
  return result;
}

ParameterSet loss_gradient(const BackboneConfig& config, const ParameterSet& params,
                           const PointCloud& x, const PointCloud& target) {
  Upsampler view{config, params};
  LossResult lr = loss_forward(view, x, target);
  return lr.graph.backward(lr.loss_node);
}

}  // namespace mpu
