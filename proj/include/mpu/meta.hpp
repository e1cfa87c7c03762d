#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mpu/backbone.hpp"
#include "mpu/params.hpp"
#include "mpu/sampling.hpp"

namespace mpu {

enum class GradientMode { kFirstOrder, kFdHvp };

const char* to_string(GradientMode mode);
GradientMode gradient_mode_from_string(const std::string& name);

// Meta-learning knobs. Defaults are rescaled for the compact reference
// backbone; the rates used for the full-size networks (1e-5 / 1e-6)
// remain valid values.
struct MetaConfig {
  double alpha = 1e-2;           // inner (adaptation) learning rate
  double beta = 1e-3;            // outer (meta) learning rate
  int inner_steps = 5;
  int batch_size = 8;
  GradientMode gradient_mode = GradientMode::kFirstOrder;
  int ratio = 4;
  int max_meta_iters = 200;
  std::uint64_t seed = 0;
  bool average_outer_batch = false;  // default sums over the batch
  double grad_clip = 0.0;            // L2 clip for gradients; 0 disables
};

void validate(const MetaConfig& cfg);

// One sparse-dense supervision pair; y.count == ratio * x.count.
struct TrainingPair {
  PointCloud x;
  PointCloud y;
};

void validate_pairs(const std::vector<TrainingPair>& data, int ratio);

struct AdamState {
  ParameterSet first_moment;
  ParameterSet second_moment;
  long step = 0;
  double base_lr = 1e-4;
  double decay = 0.99;  // learning-rate factor applied per epoch
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState make_adam(const ParameterSet& schema, double base_lr = 1e-4,
                    double decay = 0.99);

// One bias-corrected Adam update of params in place.
void adam_step(AdamState& state, ParameterSet& params, const ParameterSet& grads,
               double lr);

// Supervised pre-training with Adam on the mean-CD loss, one update per
// pair, shuffled each epoch with a fixed seeded schedule. Returns the
// trained model; per-epoch mean losses are appended to loss_history
// when given. Throws DataError naming the offending pair index on a
// ratio mismatch.
Upsampler pretrain(const Upsampler& model, const std::vector<TrainingPair>& data,
                   int epochs, AdamState adam, std::uint64_t seed = 0,
                   std::vector<double>* loss_history = nullptr);

struct InnerTrace {
  ParameterSet adapted;
  std::vector<ParameterSet> iterates;  // pre-step parameters, oldest first
  PointCloud x_down;
};

// `steps` plain SGD updates on the self-supervised task
// (downsample(x), x). The input model is never mutated.
ParameterSet inner_adapt(const Upsampler& model, const PointCloud& x, int steps,
                         double alpha);
InnerTrace inner_adapt_traced(const Upsampler& model, const PointCloud& x,
                              int steps, double alpha, bool keep_iterates);

// Pulls an outer gradient back through K plain-SGD inner steps using
// finite-difference Hessian-vector products:
//   v <- (I - alpha H_k) v for k = K-1 .. 0.
ParameterSet maml_backward(const GradFn& inner_grad,
                           const std::vector<ParameterSet>& iterates, double alpha,
                           ParameterSet outer_grad);

// MAML over self-supervised downsample-reconstruct tasks. Writes one
// line per outer iteration (iter, outer loss, grad norm, wall ms) to
// log when given. Aborts with NumericError naming iteration, pair index
// and parameter on the first NaN gradient.
Upsampler meta_train(const Upsampler& model, const std::vector<TrainingPair>& data,
                     const MetaConfig& cfg, std::ostream* log = nullptr,
                     std::vector<double>* loss_history = nullptr);

struct MetaTestResult {
  PointCloud y;
  ParameterSet adapted;
  double adapt_ms = 0.0;
  double predict_ms = 0.0;
};

// Per-instance adaptation followed by prediction; the stored model is
// left untouched and the adapted parameters are per instance.
MetaTestResult meta_test(const Upsampler& model, const PointCloud& x,
                         const MetaConfig& cfg);

// Test-time adaptation from supervised-only weights; the ablation
// baseline against meta-trained initializations.
PointCloud naive_tta(const Upsampler& pretrained, const PointCloud& x, int steps,
                     double alpha);

}  // namespace mpu
