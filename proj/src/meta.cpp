#include "mpu/meta.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "mpu/metrics.hpp"

namespace mpu {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void clip_norm(ParameterSet& g, double max_norm) {
  if (max_norm <= 0.0) return;
  double norm = l2_norm(g);
  if (norm > max_norm) g = axpy(max_norm / norm - 1.0, g, g);
}

}  // namespace

const char* to_string(GradientMode mode) {
  return mode == GradientMode::kFirstOrder ? "first_order" : "fd_hvp";
}

GradientMode gradient_mode_from_string(const std::string& name) {
  if (name == "first_order") return GradientMode::kFirstOrder;
  if (name == "fd_hvp") return GradientMode::kFdHvp;
  throw ParameterError("unknown gradient mode: '" + name + "'");
}

void validate(const MetaConfig& cfg) {
  // alpha = 0 and inner_steps = 0 stay legal: the degenerate identities
  // (no adaptation) are part of the contract.
  if (cfg.alpha < 0.0 || cfg.beta < 0.0) {
    throw ParameterError("meta config: learning rates must be >= 0");
  }
  if (cfg.inner_steps < 0 || cfg.inner_steps > 32) {
    throw ParameterError("meta config: inner_steps must lie in [0, 32]");
  }
  if (cfg.batch_size < 1) throw ParameterError("meta config: batch_size must be >= 1");
  if (cfg.max_meta_iters < 0) {
    throw ParameterError("meta config: max_meta_iters must be >= 0");
  }
}

void validate_pairs(const std::vector<TrainingPair>& data, int ratio) {
  if (data.empty()) throw DataError("training data is empty");
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].y.count() != data[i].x.count() * static_cast<std::size_t>(ratio)) {
      std::ostringstream os;
      os << "training pair " << i << ": dense count " << data[i].y.count()
         << " != ratio " << ratio << " x sparse count " << data[i].x.count();
      throw DataError(os.str());
    }
  }
}

AdamState make_adam(const ParameterSet& schema, double base_lr, double decay) {
  AdamState state;
  state.first_moment = schema.zeros_like();
  state.second_moment = schema.zeros_like();
  state.base_lr = base_lr;
  state.decay = decay;
  return state;
}

void adam_step(AdamState& state, ParameterSet& params, const ParameterSet& grads,
               double lr) {
  if (!params.same_schema(grads)) {
    throw ContractError("adam_step: gradient schema does not match params");
  }
  state.step += 1;
  double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (auto& [name, p] : params) {
    Tensor& m = state.first_moment.at(name);
    Tensor& v = state.second_moment.at(name);
    const Tensor& g = grads.at(name);
    for (std::size_t i = 0; i < p.numel(); ++i) {
      m.values[i] = state.beta1 * m.values[i] + (1.0 - state.beta1) * g.values[i];
      v.values[i] =
          state.beta2 * v.values[i] + (1.0 - state.beta2) * g.values[i] * g.values[i];
      double mhat = m.values[i] / bc1;
      double vhat = v.values[i] / bc2;
      p.values[i] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

Upsampler pretrain(const Upsampler& model, const std::vector<TrainingPair>& data,
                   int epochs, AdamState adam, std::uint64_t seed,
                   std::vector<double>* loss_history) {
  validate_pairs(data, model.config.ratio);
  if (epochs < 0) throw ParameterError("pretrain: epochs must be >= 0");

  Upsampler trained = model;
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double lr = adam.base_lr * std::pow(adam.decay, static_cast<double>(epoch));
    double epoch_loss = 0.0;
    for (std::size_t idx : order) {
      LossResult lr_result = loss_forward(trained, data[idx].x, data[idx].y);
      ParameterSet grads = lr_result.graph.backward(lr_result.loss_node);
      adam_step(adam, trained.params, grads, lr);
      epoch_loss += lr_result.loss;
    }
    if (loss_history) {
      loss_history->push_back(epoch_loss / static_cast<double>(data.size()));
    }
  }
  return trained;
}

InnerTrace inner_adapt_traced(const Upsampler& model, const PointCloud& x,
                              int steps, double alpha, bool keep_iterates) {
  if (steps < 0) throw ParameterError("inner_adapt: steps must be >= 0");
  InnerTrace trace;
  trace.adapted = model.params;
  if (steps == 0) return trace;

  trace.x_down = downsample(x, model.config.ratio);
  for (int s = 0; s < steps; ++s) {
    if (keep_iterates) trace.iterates.push_back(trace.adapted);
    ParameterSet g = loss_gradient(model.config, trace.adapted, trace.x_down, x);
    trace.adapted = axpy(-alpha, g, trace.adapted);
  }
  return trace;
}

ParameterSet inner_adapt(const Upsampler& model, const PointCloud& x, int steps,
                         double alpha) {
  return inner_adapt_traced(model, x, steps, alpha, false).adapted;
}

ParameterSet maml_backward(const GradFn& inner_grad,
                           const std::vector<ParameterSet>& iterates, double alpha,
                           ParameterSet outer_grad) {
  for (std::size_t k = iterates.size(); k-- > 0;) {
    ParameterSet hv = hvp(inner_grad, iterates[k], outer_grad);
    outer_grad = axpy(-alpha, hv, outer_grad);
  }
  return outer_grad;
}

Upsampler meta_train(const Upsampler& model, const std::vector<TrainingPair>& data,
                     const MetaConfig& cfg, std::ostream* log,
                     std::vector<double>* loss_history) {
  validate(cfg);
  validate_pairs(data, model.config.ratio);
  if (cfg.ratio != model.config.ratio) {
    std::ostringstream os;
    os << "meta_train: config ratio " << cfg.ratio << " != backbone ratio "
       << model.config.ratio;
    throw ConfigError(os.str());
  }

  Upsampler trained = model;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  const bool second_order = cfg.gradient_mode == GradientMode::kFdHvp;

  auto check_nan = [&](const ParameterSet& g, int iter, std::size_t pair_index) {
    std::string name = find_nan(g);
    if (!name.empty()) {
      std::ostringstream os;
      os << "meta_train: NaN gradient at iteration " << iter << ", pair "
         << pair_index << ", parameter '" << name << "'";
      throw NumericError(os.str());
    }
  };

  for (int iter = 0; iter < cfg.max_meta_iters; ++iter) {
    auto iter_start = Clock::now();
    ParameterSet total = trained.params.zeros_like();
    double outer_loss = 0.0;

    for (int b = 0; b < cfg.batch_size; ++b) {
      std::size_t n = pick(rng);
      const TrainingPair& pair = data[n];

      InnerTrace trace =
          inner_adapt_traced(trained, pair.x, cfg.inner_steps, cfg.alpha, second_order);

      Upsampler adapted{trained.config, trace.adapted};
      LossResult outer = loss_forward(adapted, pair.x, pair.y);
      ParameterSet g = outer.graph.backward(outer.loss_node);
      outer_loss += outer.loss;
      check_nan(g, iter, n);

      if (second_order && !trace.iterates.empty()) {
        GradFn inner_grad = [&](const ParameterSet& theta) {
          return loss_gradient(trained.config, theta, trace.x_down, pair.x);
        };
        g = maml_backward(inner_grad, trace.iterates, cfg.alpha, std::move(g));
        check_nan(g, iter, n);
      }
      total = axpy(1.0, g, total);
    }

    if (cfg.average_outer_batch) {
      total = axpy(1.0 / static_cast<double>(cfg.batch_size) - 1.0, total, total);
    }
    clip_norm(total, cfg.grad_clip);
    double grad_norm = l2_norm(total);
    trained.params = axpy(-cfg.beta, total, trained.params);

    if (loss_history) loss_history->push_back(outer_loss);
    if (log) {
      *log << iter << '\t' << outer_loss << '\t' << grad_norm << '\t'
           << ms_since(iter_start) << '\n';
    }
  }
  return trained;
}

MetaTestResult meta_test(const Upsampler& model, const PointCloud& x,
                         const MetaConfig& cfg) {
  validate(cfg);
  MetaTestResult result;

  auto adapt_start = Clock::now();
  result.adapted = inner_adapt(model, x, cfg.inner_steps, cfg.alpha);
  result.adapt_ms = ms_since(adapt_start);

  auto predict_start = Clock::now();
  Upsampler adapted{model.config, result.adapted};
  result.y = forward(adapted, x).cloud;
  result.predict_ms = ms_since(predict_start);
  return result;
}

PointCloud naive_tta(const Upsampler& pretrained, const PointCloud& x, int steps,
                     double alpha) {
  ParameterSet adapted = inner_adapt(pretrained, x, steps, alpha);
  Upsampler view{pretrained.config, adapted};
  return forward(view, x).cloud;
}

}  // namespace mpu
