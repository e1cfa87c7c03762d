#pragma once

#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "mpu/meta.hpp"
#include "mpu/run_config.hpp"

namespace mpu {

enum class EvalMode { kFrozen, kNaiveTta, kMetaTta };

const char* to_string(EvalMode mode);
EvalMode eval_mode_from_string(const std::string& name);

// Draws family parameters from documented per-family ranges.
ShapeSpec random_shape_spec(ShapeFamily family, std::mt19937_64& rng);

// Dense clouds paired with their ratio-downsampled inputs. The dense
// count is the largest multiple of ratio not exceeding dense_points.
std::vector<TrainingPair> make_training_pairs(const std::vector<ShapeFamily>& families,
                                              int shapes_per_family,
                                              std::size_t dense_points, int ratio,
                                              std::uint64_t seed);

struct EvalCase {
  PointCloud sparse;    // model input, optionally noisy
  PointCloud dense_gt;  // clean ground truth
};

std::vector<EvalCase> make_eval_cases(const std::vector<ShapeFamily>& families,
                                      int count, std::size_t dense_points, int ratio,
                                      double noise_level, std::uint64_t seed);

// Meta-training wants inner tasks with at least 4 points after two
// ratio reductions, so the dense count grows with the ratio.
std::size_t effective_dense_points(const RunConfig& cfg);

struct TrainedModels {
  Upsampler pretrained;
  Upsampler meta_trained;
};

// Pre-trains then meta-trains on the config's train families.
TrainedModels train_pipeline(const RunConfig& cfg, std::uint64_t seed,
                             std::ostream* meta_log = nullptr);

struct UpsampleOutcome {
  PointCloud y;
  double adapt_ms = 0.0;
  double predict_ms = 0.0;
};

// Normalizes the input to the unit cube, applies the selected mode and
// maps the prediction back to the input frame.
UpsampleOutcome upsample_cloud(const TrainedModels& models, EvalMode mode,
                               const PointCloud& x, const MetaConfig& cfg);

struct SweepRow {
  std::string condition;
  std::string method;
  double cd_sum_scaled = 0.0;   // x report_cd_scale
  double cd_mean_scaled = 0.0;  // x report_cd_scale
  double cd_mean_std = 0.0;     // sample std over cells, same scale
  double psnr_db = 0.0;
  double psnr_std = 0.0;
  double mean_time_ms = 0.0;  // adapt + predict; sidecar only
  int shape_count = 0;
  int seed_count = 0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
};

SweepReport run_noise_sweep(const RunConfig& cfg, const std::vector<double>& levels);
SweepReport run_ratio_sweep(const RunConfig& cfg, const std::vector<int>& ratios);
SweepReport run_inner_steps_sweep(const RunConfig& cfg, const std::vector<int>& values);

// Trains on cfg.train_families and evaluates all three modes on
// cfg.test_families. Family sets must be either identical (control)
// or disjoint; anything in between is a ConfigError.
SweepReport run_domain_shift_experiment(const RunConfig& cfg);

struct TimingPoint {
  int inner_steps = 0;
  double mean_ms = 0.0;
};

// Mean adaptation+prediction wall time per inner-step count.
std::vector<TimingPoint> run_timing_sweep(const Upsampler& model,
                                          const MetaConfig& cfg,
                                          const std::vector<int>& values,
                                          const std::vector<PointCloud>& inputs,
                                          int repeats);

// Machine report; the timing column goes to a separate file so the
// primary report stays byte-reproducible.
void write_report_tsv(const SweepReport& report, const std::string& path,
                      bool include_timing);
std::string render_report_table(const SweepReport& report);

// Runs fn(0..n-1) on up to MPU_THREADS workers (hardware concurrency
// when unset). Results must be written to per-index slots; the caller
// reduces in index order, so output is schedule-independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt);

}  // namespace mpu
