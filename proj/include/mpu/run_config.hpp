#pragma once

#include <string>
#include <vector>

#include "mpu/backbone.hpp"
#include "mpu/meta.hpp"

namespace mpu {

// Everything an end-to-end run needs: meta-learning knobs, backbone
// size, pre-training schedule, synthetic dataset spec, output location
// and reporting options. Serialized as a flat "key = value" text file;
// unknown keys are rejected by name.
struct RunConfig {
  MetaConfig meta;

  std::size_t feature_dim = 32;
  std::size_t hidden_layers = 2;
  double offset_scale = 0.1;

  int pretrain_epochs = 150;
  double adam_lr = 1e-4;
  double adam_decay = 0.99;

  std::vector<ShapeFamily> train_families = {
      ShapeFamily::kSphere, ShapeFamily::kTorus, ShapeFamily::kGaussianBumpPlane};
  std::vector<ShapeFamily> test_families = {ShapeFamily::kSuperellipsoid,
                                            ShapeFamily::kCylinder};
  int shapes_per_family = 4;
  std::size_t points_per_shape = 256;  // dense count; clipped to a ratio multiple
  int eval_shapes = 20;
  int eval_seeds = 3;
  double noise_level = 0.0;

  std::string out_dir = "out";
  double report_cd_scale = 100.0;  // tables report CD x 10^2

  BackboneConfig backbone(std::uint64_t seed) const;
};

void validate(const RunConfig& cfg);

RunConfig parse_run_config(const std::string& path);
RunConfig parse_run_config_text(const std::string& text, const std::string& source);

// Canonical form: fixed key order, one "key = value" per line.
std::string serialize_run_config(const RunConfig& cfg);
void write_run_config(const RunConfig& cfg, const std::string& path);

}  // namespace mpu
