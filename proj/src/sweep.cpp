#include "mpu/sweep.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "mpu/metrics.hpp"

namespace mpu {

namespace {

// splitmix64 step over (base, salt)
std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string format_double(double v, int precision = 6) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

struct CellResult {
  double cd_sum = 0.0;
  double cd_mean = 0.0;
  double psnr_db = 0.0;
  double time_ms = 0.0;
};

CellResult evaluate_cell(const TrainedModels& models, EvalMode mode,
                         const EvalCase& ec, const MetaConfig& cfg) {
  UpsampleOutcome out = upsample_cloud(models, mode, ec.sparse, cfg);
  CellResult cell;
  cell.cd_sum = chamfer_distance(out.y, ec.dense_gt, Reduction::kSum);
  cell.cd_mean = chamfer_distance(out.y, ec.dense_gt, Reduction::kMean);
  cell.psnr_db = psnr(out.y, ec.dense_gt);
  cell.time_ms = out.adapt_ms + out.predict_ms;
  return cell;
}

SweepRow aggregate(const std::string& condition, const std::string& method,
                   const std::vector<CellResult>& cells, double cd_scale,
                   int shape_count, int seed_count) {
  SweepRow row;
  row.condition = condition;
  row.method = method;
  row.shape_count = shape_count;
  row.seed_count = seed_count;
  const double n = static_cast<double>(cells.size());
  for (const CellResult& c : cells) {
    row.cd_sum_scaled += c.cd_sum;
    row.cd_mean_scaled += c.cd_mean;
    row.psnr_db += c.psnr_db;
    row.mean_time_ms += c.time_ms;
  }
  row.cd_sum_scaled = row.cd_sum_scaled / n * cd_scale;
  row.cd_mean_scaled = row.cd_mean_scaled / n * cd_scale;
  row.psnr_db /= n;
  row.mean_time_ms /= n;
  if (cells.size() > 1) {
    double var_cd = 0.0, var_psnr = 0.0;
    for (const CellResult& c : cells) {
      double dc = c.cd_mean * cd_scale - row.cd_mean_scaled;
      double dp = c.psnr_db - row.psnr_db;
      var_cd += dc * dc;
      var_psnr += dp * dp;
    }
    row.cd_mean_std = std::sqrt(var_cd / (n - 1.0));
    row.psnr_std = std::sqrt(var_psnr / (n - 1.0));
  }
  return row;
}

// evaluates one mode over all (seed, case) cells in parallel
std::vector<CellResult> evaluate_mode(const std::vector<TrainedModels>& models,
                                      EvalMode mode,
                                      const std::vector<std::vector<EvalCase>>& cases,
                                      const MetaConfig& cfg) {
  std::size_t per_seed = cases.empty() ? 0 : cases[0].size();
  std::vector<CellResult> cells(models.size() * per_seed);
  parallel_for(cells.size(), [&](std::size_t i) {
    std::size_t s = i / per_seed;
    std::size_t c = i % per_seed;
    cells[i] = evaluate_cell(models[s], mode, cases[s][c], cfg);
  });
  return cells;
}

constexpr EvalMode kAllModes[] = {EvalMode::kFrozen, EvalMode::kNaiveTta,
                                  EvalMode::kMetaTta};

}  // namespace

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  return splitmix(base * 0x100000001b3ULL + salt);
}

const char* to_string(EvalMode mode) {
  switch (mode) {
    case EvalMode::kFrozen: return "frozen";
    case EvalMode::kNaiveTta: return "naive-tta";
    case EvalMode::kMetaTta: return "meta-tta";
  }
  return "unknown";
}

EvalMode eval_mode_from_string(const std::string& name) {
  if (name == "frozen") return EvalMode::kFrozen;
  if (name == "naive-tta") return EvalMode::kNaiveTta;
  if (name == "meta-tta") return EvalMode::kMetaTta;
  throw ParameterError("unknown mode: '" + name + "' (frozen|naive-tta|meta-tta)");
}

ShapeSpec random_shape_spec(ShapeFamily family, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto in_range = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  std::uint64_t seed = rng();
  switch (family) {
    case ShapeFamily::kSphere:
      return ShapeSpec::sphere(in_range(0.3, 0.5), seed);
    case ShapeFamily::kTorus: {
      double major = in_range(0.25, 0.35);
      double minor = in_range(0.08, std::min(0.15, 0.5 - major));
      return ShapeSpec::torus(major, minor, seed);
    }
    case ShapeFamily::kSuperellipsoid:
      return ShapeSpec::superellipsoid(in_range(0.4, 1.6), in_range(0.4, 1.6), seed);
    case ShapeFamily::kGaussianBumpPlane:
      return ShapeSpec::gaussian_bump(in_range(0.1, 0.4), in_range(0.1, 0.25), seed);
    case ShapeFamily::kCylinder:
      return ShapeSpec::cylinder(in_range(0.2, 0.45), in_range(0.5, 1.0), seed);
  }
  throw ParameterError("unknown shape family");
}

std::vector<TrainingPair> make_training_pairs(const std::vector<ShapeFamily>& families,
                                              int shapes_per_family,
                                              std::size_t dense_points, int ratio,
                                              std::uint64_t seed) {
  std::size_t dense = dense_points / static_cast<std::size_t>(ratio) *
                      static_cast<std::size_t>(ratio);
  std::vector<TrainingPair> pairs;
  for (std::size_t f = 0; f < families.size(); ++f) {
    std::mt19937_64 rng(mix_seed(seed, f * 1024));
    for (int s = 0; s < shapes_per_family; ++s) {
      ShapeSpec spec = random_shape_spec(families[f], rng);
      TrainingPair pair;
      pair.y = generate_shape(spec, dense);
      pair.x = downsample(pair.y, ratio);
      pairs.push_back(std::move(pair));
    }
  }
  return pairs;
}

std::vector<EvalCase> make_eval_cases(const std::vector<ShapeFamily>& families,
                                      int count, std::size_t dense_points, int ratio,
                                      double noise_level, std::uint64_t seed) {
  std::size_t dense = dense_points / static_cast<std::size_t>(ratio) *
                      static_cast<std::size_t>(ratio);
  std::vector<EvalCase> cases;
  std::mt19937_64 rng(mix_seed(seed, 0x9e37));
  for (int i = 0; i < count; ++i) {
    ShapeFamily family = families[static_cast<std::size_t>(i) % families.size()];
    ShapeSpec spec = random_shape_spec(family, rng);
    EvalCase ec;
    ec.dense_gt = generate_shape(spec, dense);
    ec.sparse = downsample(ec.dense_gt, ratio);
    if (noise_level > 0.0) {
      ec.sparse = add_gaussian_noise(ec.sparse, noise_level,
                                     mix_seed(seed, 0xa5a5 + static_cast<std::uint64_t>(i)));
    }
    cases.push_back(std::move(ec));
  }
  return cases;
}

std::size_t effective_dense_points(const RunConfig& cfg) {
  auto r = static_cast<std::size_t>(cfg.meta.ratio);
  return std::max(cfg.points_per_shape, 4 * r * r);
}

TrainedModels train_pipeline(const RunConfig& cfg, std::uint64_t seed,
                             std::ostream* meta_log) {
  std::vector<TrainingPair> pairs =
      make_training_pairs(cfg.train_families, cfg.shapes_per_family,
                          effective_dense_points(cfg), cfg.meta.ratio,
                          mix_seed(seed, 1));

  TrainedModels models;
  Upsampler initial = init_upsampler(cfg.backbone(mix_seed(seed, 2)));
  AdamState adam = make_adam(initial.params, cfg.adam_lr, cfg.adam_decay);
  models.pretrained =
      pretrain(initial, pairs, cfg.pretrain_epochs, adam, mix_seed(seed, 3));

  MetaConfig mc = cfg.meta;
  mc.seed = mix_seed(seed, 4);
  models.meta_trained = meta_train(models.pretrained, pairs, mc, meta_log);
  return models;
}

UpsampleOutcome upsample_cloud(const TrainedModels& models, EvalMode mode,
                               const PointCloud& x, const MetaConfig& cfg) {
  NormalizeResult norm = normalize_to_unit(x);
  UpsampleOutcome out;
  switch (mode) {
    case EvalMode::kFrozen: {
      auto start = std::chrono::steady_clock::now();
      out.y = forward(models.pretrained, norm.cloud).cloud;
      out.predict_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();
      break;
    }
    case EvalMode::kNaiveTta: {
      MetaTestResult r = meta_test(models.pretrained, norm.cloud, cfg);
      out.y = std::move(r.y);
      out.adapt_ms = r.adapt_ms;
      out.predict_ms = r.predict_ms;
      break;
    }
    case EvalMode::kMetaTta: {
      MetaTestResult r = meta_test(models.meta_trained, norm.cloud, cfg);
      out.y = std::move(r.y);
      out.adapt_ms = r.adapt_ms;
      out.predict_ms = r.predict_ms;
      break;
    }
  }
  out.y = denormalize(out.y, norm.scale, norm.offset);
  return out;
}

namespace {

std::vector<TrainedModels> train_all_seeds(const RunConfig& cfg) {
  std::vector<TrainedModels> models;
  models.reserve(static_cast<std::size_t>(cfg.eval_seeds));
  for (int s = 0; s < cfg.eval_seeds; ++s) {
    models.push_back(train_pipeline(cfg, mix_seed(cfg.meta.seed, 100 + static_cast<std::uint64_t>(s))));
  }
  return models;
}

std::vector<std::vector<EvalCase>> eval_cases_per_seed(
    const RunConfig& cfg, const std::vector<ShapeFamily>& families,
    double noise_level) {
  std::vector<std::vector<EvalCase>> cases;
  for (int s = 0; s < cfg.eval_seeds; ++s) {
    cases.push_back(make_eval_cases(
        families, cfg.eval_shapes, effective_dense_points(cfg), cfg.meta.ratio,
        noise_level, mix_seed(cfg.meta.seed, 500 + static_cast<std::uint64_t>(s))));
  }
  return cases;
}

}  // namespace

SweepReport run_noise_sweep(const RunConfig& cfg, const std::vector<double>& levels) {
  validate(cfg);
  std::vector<TrainedModels> models = train_all_seeds(cfg);

  SweepReport report;
  for (double level : levels) {
    auto cases = eval_cases_per_seed(cfg, cfg.train_families, level);
    for (EvalMode mode : kAllModes) {
      std::vector<CellResult> cells = evaluate_mode(models, mode, cases, cfg.meta);
      report.rows.push_back(aggregate("noise=" + format_double(level, 4),
                                      to_string(mode), cells, cfg.report_cd_scale,
                                      cfg.eval_shapes, cfg.eval_seeds));
    }
  }
  return report;
}

SweepReport run_ratio_sweep(const RunConfig& cfg, const std::vector<int>& ratios) {
  validate(cfg);
  SweepReport report;
  for (int ratio : ratios) {
    RunConfig rc = cfg;
    rc.meta.ratio = ratio;
    validate(rc);
    std::vector<TrainedModels> models = train_all_seeds(rc);
    auto cases = eval_cases_per_seed(rc, rc.train_families, rc.noise_level);
    for (EvalMode mode : kAllModes) {
      std::vector<CellResult> cells = evaluate_mode(models, mode, cases, rc.meta);
      report.rows.push_back(aggregate("ratio=" + std::to_string(ratio),
                                      to_string(mode), cells, rc.report_cd_scale,
                                      rc.eval_shapes, rc.eval_seeds));
    }
  }
  return report;
}

SweepReport run_inner_steps_sweep(const RunConfig& cfg, const std::vector<int>& values) {
  validate(cfg);
  SweepReport report;
  for (int steps : values) {
    RunConfig rc = cfg;
    rc.meta.inner_steps = steps;
    validate(rc);
    std::vector<TrainedModels> models = train_all_seeds(rc);
    auto cases = eval_cases_per_seed(rc, rc.train_families, rc.noise_level);
    if (steps == values.front()) {
      // frozen baseline does not depend on the step count
      std::vector<CellResult> cells =
          evaluate_mode(models, EvalMode::kFrozen, cases, rc.meta);
      report.rows.push_back(aggregate("steps=" + std::to_string(steps), "frozen",
                                      cells, rc.report_cd_scale, rc.eval_shapes,
                                      rc.eval_seeds));
    }
    std::vector<CellResult> cells =
        evaluate_mode(models, EvalMode::kMetaTta, cases, rc.meta);
    report.rows.push_back(aggregate("steps=" + std::to_string(steps), "meta-tta",
                                    cells, rc.report_cd_scale, rc.eval_shapes,
                                    rc.eval_seeds));
  }
  return report;
}

SweepReport run_domain_shift_experiment(const RunConfig& cfg) {
  validate(cfg);
  std::set<ShapeFamily> train(cfg.train_families.begin(), cfg.train_families.end());
  std::set<ShapeFamily> test(cfg.test_families.begin(), cfg.test_families.end());
  bool identical = train == test;
  bool disjoint = true;
  for (ShapeFamily f : test) {
    if (train.count(f)) disjoint = false;
  }
  if (!identical && !disjoint) {
    throw ConfigError(
        "domain shift: train/test families must be disjoint (shifted) or identical "
        "(control)");
  }
  std::string condition = identical ? "in-distribution" : "shifted";

  std::vector<TrainedModels> models = train_all_seeds(cfg);
  auto cases = eval_cases_per_seed(cfg, cfg.test_families, cfg.noise_level);

  SweepReport report;
  for (EvalMode mode : kAllModes) {
    std::vector<CellResult> cells = evaluate_mode(models, mode, cases, cfg.meta);
    report.rows.push_back(aggregate(condition, to_string(mode), cells,
                                    cfg.report_cd_scale, cfg.eval_shapes,
                                    cfg.eval_seeds));
  }
  return report;
}

std::vector<TimingPoint> run_timing_sweep(const Upsampler& model,
                                          const MetaConfig& cfg,
                                          const std::vector<int>& values,
                                          const std::vector<PointCloud>& inputs,
                                          int repeats) {
  if (inputs.empty()) throw ParameterError("run_timing_sweep: no inputs");
  std::vector<TimingPoint> points;
  for (int steps : values) {
    MetaConfig mc = cfg;
    mc.inner_steps = steps;
    double total = 0.0;
    int count = 0;
    for (int rep = 0; rep < repeats; ++rep) {
      for (const PointCloud& x : inputs) {
        MetaTestResult r = meta_test(model, x, mc);
        total += r.adapt_ms + r.predict_ms;
        ++count;
      }
    }
    points.push_back({steps, total / static_cast<double>(count)});
  }
  return points;
}

void write_report_tsv(const SweepReport& report, const std::string& path,
                      bool include_timing) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open '" + path + "' for writing");
  os << "condition\tmethod\tcd_sum_x100\tcd_mean_x100\tcd_mean_std\tpsnr_db\t"
        "psnr_std\tshapes\tseeds";
  if (include_timing) os << "\tmean_time_ms";
  os << "\n";
  for (const SweepRow& row : report.rows) {
    os << row.condition << '\t' << row.method << '\t'
       << format_double(row.cd_sum_scaled) << '\t'
       << format_double(row.cd_mean_scaled) << '\t'
       << format_double(row.cd_mean_std) << '\t' << format_double(row.psnr_db)
       << '\t' << format_double(row.psnr_std) << '\t' << row.shape_count << '\t'
       << row.seed_count;
    if (include_timing) os << '\t' << format_double(row.mean_time_ms, 3);
    os << "\n";
  }
  if (!os) throw FormatError("write failed for '" + path + "'");
}

std::string render_report_table(const SweepReport& report) {
  std::vector<std::array<std::string, 8>> cells;
  cells.push_back({"condition", "method", "CD_sum (x100)", "CD_mean (x100)",
                   "PSNR (dB)", "time (ms)", "shapes", "seeds"});
  for (const SweepRow& row : report.rows) {
    cells.push_back({row.condition, row.method, format_double(row.cd_sum_scaled, 4),
                     format_double(row.cd_mean_scaled, 4) + " +- " +
                         format_double(row.cd_mean_std, 4),
                     format_double(row.psnr_db, 3) + " +- " +
                         format_double(row.psnr_std, 3),
                     format_double(row.mean_time_ms, 2),
                     std::to_string(row.shape_count), std::to_string(row.seed_count)});
  }
  std::array<std::size_t, 8> width{};
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  std::ostringstream os;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      os << std::left << std::setw(static_cast<int>(width[c]) + 2) << cells[r][c];
    }
    os << '\n';
    if (r == 0) {
      for (std::size_t c = 0; c < width.size(); ++c) {
        os << std::string(width[c], '-') << "  ";
      }
      os << '\n';
    }
  }
  return os.str();
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  std::size_t workers = std::thread::hardware_concurrency();
  if (workers == 0) workers = 1;
  if (const char* env = std::getenv("MPU_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) workers = static_cast<std::size_t>(v);
  }
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      try {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace mpu
