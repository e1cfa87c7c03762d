#include "mpu/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "mpu/metrics.hpp"
#include "mpu/pointcloud_io.hpp"
#include "mpu/sweep.hpp"

namespace mpu {

namespace {

namespace fs = std::filesystem;

struct CommonFlags {
  std::string config_path;
  std::optional<int> ratio;
  std::optional<int> inner_steps;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> noise_level;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required) {
  auto* opt = cmd->add_option("--config", flags.config_path, "run config file");
  if (config_required) opt->required();
  cmd->add_option("--ratio", flags.ratio, "upsampling ratio override");
  cmd->add_option("--inner-steps", flags.inner_steps, "adaptation step override");
  cmd->add_option("--alpha", flags.alpha, "inner learning-rate override");
  cmd->add_option("--beta", flags.beta, "outer learning-rate override");
  cmd->add_option("--noise-level", flags.noise_level, "input noise level override");
  cmd->add_option("--seed", flags.seed, "base seed override");
}

RunConfig resolve_config(const CommonFlags& flags) {
  RunConfig cfg;
  if (!flags.config_path.empty()) cfg = parse_run_config(flags.config_path);
  if (flags.ratio) cfg.meta.ratio = *flags.ratio;
  if (flags.inner_steps) cfg.meta.inner_steps = *flags.inner_steps;
  if (flags.alpha) cfg.meta.alpha = *flags.alpha;
  if (flags.beta) cfg.meta.beta = *flags.beta;
  if (flags.noise_level) cfg.noise_level = *flags.noise_level;
  if (flags.seed) cfg.meta.seed = *flags.seed;
  validate(cfg);
  return cfg;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create directory '" + dir + "': " + ec.message());
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

int run_gen_data(const CommonFlags& flags, const std::string& out_override) {
  RunConfig cfg = resolve_config(flags);
  std::string out = out_override.empty() ? cfg.out_dir : out_override;
  ensure_dir(out);

  auto pairs = make_training_pairs(cfg.train_families, cfg.shapes_per_family,
                                   effective_dense_points(cfg), cfg.meta.ratio,
                                   mix_seed(cfg.meta.seed, 1));
  auto cases = make_eval_cases(cfg.test_families, cfg.eval_shapes,
                               effective_dense_points(cfg), cfg.meta.ratio,
                               cfg.noise_level, mix_seed(cfg.meta.seed, 500));

  std::ofstream manifest(join_path(out, "manifest.tsv"));
  manifest << "kind\tindex\tlabel\tsparse\tdense\n";
  auto name = [](const char* kind, std::size_t i, const char* role) {
    std::ostringstream os;
    os << kind << "_" << std::setw(3) << std::setfill('0') << i << "_" << role
       << ".ply";
    return os.str();
  };
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    std::string xf = name("train", i, "x"), yf = name("train", i, "y");
    write_point_cloud(pairs[i].x, join_path(out, xf));
    write_point_cloud(pairs[i].y, join_path(out, yf));
    manifest << "train\t" << i << '\t' << pairs[i].y.label << '\t' << xf << '\t'
             << yf << '\n';
  }
  for (std::size_t i = 0; i < cases.size(); ++i) {
    std::string xf = name("eval", i, "sparse"), yf = name("eval", i, "gt");
    write_point_cloud(cases[i].sparse, join_path(out, xf));
    write_point_cloud(cases[i].dense_gt, join_path(out, yf));
    manifest << "eval\t" << i << '\t' << cases[i].dense_gt.label << '\t' << xf
             << '\t' << yf << '\n';
  }
  write_run_config(cfg, join_path(out, "config_resolved.cfg"));
  std::cout << "wrote " << pairs.size() << " training pairs and " << cases.size()
            << " eval cases to " << out << "\n";
  return 0;
}

int run_pretrain(const CommonFlags& flags, const std::string& out_path,
                 const std::string& log_path) {
  RunConfig cfg = resolve_config(flags);
  auto pairs = make_training_pairs(cfg.train_families, cfg.shapes_per_family,
                                   effective_dense_points(cfg), cfg.meta.ratio,
                                   mix_seed(cfg.meta.seed, 1));
  Upsampler model = init_upsampler(cfg.backbone(mix_seed(cfg.meta.seed, 2)));
  AdamState adam = make_adam(model.params, cfg.adam_lr, cfg.adam_decay);
  std::vector<double> history;
  model = pretrain(model, pairs, cfg.pretrain_epochs, adam,
                   mix_seed(cfg.meta.seed, 3), &history);
  save_checkpoint(model, out_path);
  if (!log_path.empty()) {
    std::ofstream log(log_path);
    log << std::setprecision(12);
    for (std::size_t e = 0; e < history.size(); ++e) {
      log << e << '\t' << history[e] << '\n';
    }
  }
  std::cout << "pretrained " << cfg.pretrain_epochs << " epochs on " << pairs.size()
            << " pairs";
  if (!history.empty()) {
    std::cout << "; mean CD " << history.front() << " -> " << history.back();
  }
  std::cout << "; saved " << out_path << "\n";
  return 0;
}

int run_meta_train(const CommonFlags& flags, const std::string& checkpoint_path,
                   const std::string& out_path, const std::string& log_path) {
  RunConfig cfg = resolve_config(flags);
  Upsampler model = load_checkpoint(checkpoint_path);
  if (model.config.ratio != cfg.meta.ratio) {
    std::ostringstream os;
    os << "checkpoint ratio " << model.config.ratio << " != configured ratio "
       << cfg.meta.ratio;
    throw ConfigError(os.str());
  }
  auto pairs = make_training_pairs(cfg.train_families, cfg.shapes_per_family,
                                   effective_dense_points(cfg), cfg.meta.ratio,
                                   mix_seed(cfg.meta.seed, 1));
  MetaConfig mc = cfg.meta;
  mc.seed = mix_seed(cfg.meta.seed, 4);

  std::ofstream log;
  std::ostream* log_ptr = nullptr;
  if (!log_path.empty()) {
    log.open(log_path);
    if (!log) throw ConfigError("cannot open log '" + log_path + "' for writing");
    log << std::setprecision(12);
    log_ptr = &log;
  }
  std::vector<double> history;
  model = meta_train(model, pairs, mc, log_ptr, &history);
  save_checkpoint(model, out_path);
  std::cout << "meta-trained " << mc.max_meta_iters << " iterations";
  if (!history.empty()) {
    std::cout << "; outer loss " << history.front() << " -> " << history.back();
  }
  std::cout << "; saved " << out_path << "\n";
  return 0;
}

int run_upsample(const CommonFlags& flags, const std::string& checkpoint_path,
                 const std::string& input_path, const std::string& out_path,
                 const std::string& mode_name, const std::string& gt_path,
                 std::string metrics_path) {
  RunConfig cfg = resolve_config(flags);
  Upsampler model = load_checkpoint(checkpoint_path);
  if (flags.ratio && *flags.ratio != model.config.ratio) {
    std::ostringstream os;
    os << "checkpoint ratio " << model.config.ratio << " != requested ratio "
       << *flags.ratio;
    throw ConfigError(os.str());
  }
  EvalMode mode = eval_mode_from_string(mode_name);

  PointCloud x = read_point_cloud(input_path);
  if (cfg.noise_level > 0.0) {
    x = add_gaussian_noise(x, cfg.noise_level, mix_seed(cfg.meta.seed, 0xc0de));
  }

  MetaConfig mc = cfg.meta;
  mc.ratio = model.config.ratio;
  TrainedModels models{model, model};
  UpsampleOutcome out = upsample_cloud(models, mode, x, mc);
  write_point_cloud(out.y, out_path);
  std::cout << "upsampled " << x.count() << " -> " << out.y.count() << " points ("
            << mode_name << ", " << mc.inner_steps << " steps); wrote " << out_path
            << "\n";

  if (!gt_path.empty()) {
    PointCloud gt = read_point_cloud(gt_path);
    MetricReport report = evaluate(out.y, gt);
    if (metrics_path.empty()) metrics_path = out_path + ".metrics.tsv";
    std::ofstream ms(metrics_path);
    ms << "cd_sum\tcd_mean\tcd_sum_x100\tcd_mean_x100\tpsnr_db\tadapt_ms\tpredict_ms\n";
    ms << std::setprecision(12) << report.cd_sum << '\t' << report.cd_mean << '\t'
       << report.cd_sum * cfg.report_cd_scale << '\t'
       << report.cd_mean * cfg.report_cd_scale << '\t' << report.psnr_db << '\t'
       << out.adapt_ms << '\t' << out.predict_ms << '\n';
    std::cout << "metrics: cd_sum=" << report.cd_sum << " cd_mean=" << report.cd_mean
              << " psnr_db=" << report.psnr_db << "; wrote " << metrics_path << "\n";
  }
  return 0;
}

int run_eval_sweep(const CommonFlags& flags, const std::string& ablation,
                   const std::string& levels_csv, const std::string& values_csv,
                   const std::string& out_override) {
  RunConfig cfg = resolve_config(flags);
  std::string out = out_override.empty() ? cfg.out_dir : out_override;
  ensure_dir(out);

  auto parse_doubles = [](const std::string& csv) {
    std::vector<double> out_values;
    std::istringstream is(csv);
    std::string token;
    while (std::getline(is, token, ',')) out_values.push_back(std::stod(token));
    return out_values;
  };
  auto parse_ints = [](const std::string& csv) {
    std::vector<int> out_values;
    std::istringstream is(csv);
    std::string token;
    while (std::getline(is, token, ',')) out_values.push_back(std::stoi(token));
    return out_values;
  };

  SweepReport report;
  if (ablation == "noise") {
    std::vector<double> levels = {0.0, 0.005, 0.01, 0.02};
    if (!levels_csv.empty()) levels = parse_doubles(levels_csv);
    report = run_noise_sweep(cfg, levels);
  } else if (ablation == "ratio") {
    std::vector<int> ratios = {4, 8, 16};
    if (!values_csv.empty()) ratios = parse_ints(values_csv);
    report = run_ratio_sweep(cfg, ratios);
  } else if (ablation == "inner-steps") {
    std::vector<int> values = {1, 3, 5, 7, 9};
    if (!values_csv.empty()) values = parse_ints(values_csv);
    report = run_inner_steps_sweep(cfg, values);
  } else if (ablation == "domain-shift") {
    report = run_domain_shift_experiment(cfg);
  } else {
    throw ConfigError("unknown ablation '" + ablation +
                      "' (noise|ratio|inner-steps|domain-shift)");
  }

  write_report_tsv(report, join_path(out, "report.tsv"), false);
  write_report_tsv(report, join_path(out, "report_timing.tsv"), true);
  std::string table = render_report_table(report);
  std::ofstream txt(join_path(out, "report.txt"));
  txt << table;
  std::cout << table;
  std::cout << "reports written to " << out << "\n";
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"meta-learned test-time adaptation for point cloud upsampling"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string out_path, log_path, checkpoint_path, input_path, gt_path;
  std::string metrics_path, mode_name = "meta-tta", ablation, levels_csv, values_csv;

  auto* gen = app.add_subcommand("gen-data", "generate synthetic dataset files");
  add_common(gen, flags, true);
  gen->add_option("--out", out_path, "output directory");

  auto* pre = app.add_subcommand("pretrain", "supervised pre-training");
  add_common(pre, flags, true);
  pre->add_option("--out", out_path, "checkpoint output path")->required();
  pre->add_option("--log", log_path, "per-epoch loss log");

  auto* meta = app.add_subcommand("meta-train", "meta-training from a checkpoint");
  add_common(meta, flags, true);
  meta->add_option("--checkpoint", checkpoint_path, "pre-trained checkpoint")
      ->required();
  meta->add_option("--out", out_path, "checkpoint output path")->required();
  meta->add_option("--log", log_path, "per-iteration training log");

  auto* up = app.add_subcommand("upsample", "upsample one point cloud");
  add_common(up, flags, false);
  up->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
  up->add_option("--input", input_path, "sparse input cloud")->required();
  up->add_option("--out", out_path, "dense output cloud")->required();
  up->add_option("--mode", mode_name, "frozen|naive-tta|meta-tta");
  up->add_option("--gt", gt_path, "ground-truth cloud for metrics");
  up->add_option("--metrics", metrics_path, "metric report path");

  auto* sweep = app.add_subcommand("eval-sweep", "run an ablation sweep");
  add_common(sweep, flags, true);
  sweep->add_option("--ablation", ablation, "noise|ratio|inner-steps|domain-shift")
      ->required();
  sweep->add_option("--levels", levels_csv, "comma-separated noise levels");
  sweep->add_option("--values", values_csv, "comma-separated integer values");
  sweep->add_option("--out", out_path, "output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      std::cout << app.help();
      return 0;
    }
    std::cerr << "error: usage: " << e.what() << "\n";
    return 2;
  }

  try {
    if (gen->parsed()) return run_gen_data(flags, out_path);
    if (pre->parsed()) return run_pretrain(flags, out_path, log_path);
    if (meta->parsed()) {
      return run_meta_train(flags, checkpoint_path, out_path, log_path);
    }
    if (up->parsed()) {
      return run_upsample(flags, checkpoint_path, input_path, out_path, mode_name,
                          gt_path, metrics_path);
    }
    if (sweep->parsed()) {
      return run_eval_sweep(flags, ablation, levels_csv, values_csv, out_path);
    }
    std::cerr << "error: usage: no subcommand\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: parse: " << e.what() << "\n";
    return 3;
  } catch (const FormatError& e) {
    std::cerr << "error: format: " << e.what() << "\n";
    return 3;
  } catch (const ParameterError& e) {
    std::cerr << "error: parameter: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: runtime: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace mpu
