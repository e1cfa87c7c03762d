#include "mpu/run_config.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace mpu {

namespace {

std::string families_string(const std::vector<ShapeFamily>& families) {
  std::ostringstream os;
  for (std::size_t i = 0; i < families.size(); ++i) {
    if (i) os << ",";
    os << to_string(families[i]);
  }
  return os.str();
}

std::vector<ShapeFamily> parse_families(const std::string& value,
                                        const std::string& key) {
  std::vector<ShapeFamily> out;
  std::istringstream is(value);
  std::string token;
  while (std::getline(is, token, ',')) {
    auto first = token.find_first_not_of(" \t");
    auto last = token.find_last_not_of(" \t");
    if (first == std::string::npos) continue;
    out.push_back(shape_family_from_string(token.substr(first, last - first + 1)));
  }
  if (out.empty()) throw ConfigError("config key '" + key + "': empty family list");
  return out;
}

std::string trim(const std::string& s) {
  auto first = s.find_first_not_of(" \t");
  auto last = s.find_last_not_of(" \t");
  if (first == std::string::npos) return {};
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& value, const std::string& key) {
  std::istringstream is(value);
  T v{};
  std::string extra;
  if (!(is >> v) || (is >> extra)) {
    throw ConfigError("config key '" + key + "': cannot parse value '" + value + "'");
  }
  return v;
}

}  // namespace

BackboneConfig RunConfig::backbone(std::uint64_t seed) const {
  BackboneConfig bc;
  bc.ratio = meta.ratio;
  bc.feature_dim = feature_dim;
  bc.hidden_layers = hidden_layers;
  bc.offset_scale = offset_scale;
  bc.seed = seed;
  return bc;
}

void validate(const RunConfig& cfg) {
  validate(cfg.meta);
  validate(cfg.backbone(0));
  if (cfg.pretrain_epochs < 0) throw ConfigError("pretrain_epochs must be >= 0");
  if (cfg.adam_lr <= 0.0) throw ConfigError("adam_lr must be > 0");
  if (cfg.adam_decay <= 0.0 || cfg.adam_decay > 1.0) {
    throw ConfigError("adam_decay must lie in (0, 1]");
  }
  if (cfg.shapes_per_family < 1) throw ConfigError("shapes_per_family must be >= 1");
  if (cfg.points_per_shape < 16) throw ConfigError("points_per_shape must be >= 16");
  if (cfg.eval_shapes < 1) throw ConfigError("eval_shapes must be >= 1");
  if (cfg.eval_seeds < 1) throw ConfigError("eval_seeds must be >= 1");
  if (cfg.noise_level < 0.0 || cfg.noise_level > 0.1) {
    throw ConfigError("noise_level must lie in [0, 0.1]");
  }
  if (cfg.report_cd_scale <= 0.0) throw ConfigError("report_cd_scale must be > 0");
}

RunConfig parse_run_config_text(const std::string& text, const std::string& source) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      std::ostringstream os;
      os << source << ":" << line_no << ": expected 'key = value'";
      throw ConfigError(os.str());
    }
    std::string key = trim(trimmed.substr(0, eq));
    std::string value = trim(trimmed.substr(eq + 1));

    if (key == "alpha") {
      cfg.meta.alpha = parse_number<double>(value, key);
    } else if (key == "beta") {
      cfg.meta.beta = parse_number<double>(value, key);
    } else if (key == "inner_steps") {
      cfg.meta.inner_steps = parse_number<int>(value, key);
    } else if (key == "batch_size") {
      cfg.meta.batch_size = parse_number<int>(value, key);
    } else if (key == "gradient_mode") {
      cfg.meta.gradient_mode = gradient_mode_from_string(value);
    } else if (key == "ratio") {
      cfg.meta.ratio = parse_number<int>(value, key);
    } else if (key == "max_meta_iters") {
      cfg.meta.max_meta_iters = parse_number<int>(value, key);
    } else if (key == "seed") {
      cfg.meta.seed = parse_number<std::uint64_t>(value, key);
    } else if (key == "outer_batch_reduction") {
      if (value == "sum") {
        cfg.meta.average_outer_batch = false;
      } else if (value == "mean") {
        cfg.meta.average_outer_batch = true;
      } else {
        throw ConfigError("config key 'outer_batch_reduction': expected sum or mean");
      }
    } else if (key == "grad_clip") {
      cfg.meta.grad_clip = parse_number<double>(value, key);
    } else if (key == "feature_dim") {
      cfg.feature_dim = parse_number<std::size_t>(value, key);
    } else if (key == "hidden_layers") {
      cfg.hidden_layers = parse_number<std::size_t>(value, key);
    } else if (key == "offset_scale") {
      cfg.offset_scale = parse_number<double>(value, key);
    } else if (key == "pretrain_epochs") {
      cfg.pretrain_epochs = parse_number<int>(value, key);
    } else if (key == "adam_lr") {
      cfg.adam_lr = parse_number<double>(value, key);
    } else if (key == "adam_decay") {
      cfg.adam_decay = parse_number<double>(value, key);
    } else if (key == "train_families") {
      cfg.train_families = parse_families(value, key);
    } else if (key == "test_families") {
      cfg.test_families = parse_families(value, key);
    } else if (key == "shapes_per_family") {
      cfg.shapes_per_family = parse_number<int>(value, key);
    } else if (key == "points_per_shape") {
      cfg.points_per_shape = parse_number<std::size_t>(value, key);
    } else if (key == "eval_shapes") {
      cfg.eval_shapes = parse_number<int>(value, key);
    } else if (key == "eval_seeds") {
      cfg.eval_seeds = parse_number<int>(value, key);
    } else if (key == "noise_level") {
      cfg.noise_level = parse_number<double>(value, key);
    } else if (key == "out_dir") {
      cfg.out_dir = value;
    } else if (key == "report_cd_scale") {
      cfg.report_cd_scale = parse_number<double>(value, key);
    } else {
      std::ostringstream os;
      os << source << ":" << line_no << ": unknown config key '" << key << "'";
      throw ConfigError(os.str());
    }
  }
  validate(cfg);
  return cfg;
}

RunConfig parse_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return parse_run_config_text(buffer.str(), path);
}

std::string serialize_run_config(const RunConfig& cfg) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "alpha = " << cfg.meta.alpha << "\n";
  os << "beta = " << cfg.meta.beta << "\n";
  os << "inner_steps = " << cfg.meta.inner_steps << "\n";
  os << "batch_size = " << cfg.meta.batch_size << "\n";
  os << "gradient_mode = " << to_string(cfg.meta.gradient_mode) << "\n";
  os << "ratio = " << cfg.meta.ratio << "\n";
  os << "max_meta_iters = " << cfg.meta.max_meta_iters << "\n";
  os << "seed = " << cfg.meta.seed << "\n";
  os << "outer_batch_reduction = " << (cfg.meta.average_outer_batch ? "mean" : "sum")
     << "\n";
  os << "grad_clip = " << cfg.meta.grad_clip << "\n";
  os << "feature_dim = " << cfg.feature_dim << "\n";
  os << "hidden_layers = " << cfg.hidden_layers << "\n";
  os << "offset_scale = " << cfg.offset_scale << "\n";
  os << "pretrain_epochs = " << cfg.pretrain_epochs << "\n";
  os << "adam_lr = " << cfg.adam_lr << "\n";
  os << "adam_decay = " << cfg.adam_decay << "\n";
  os << "train_families = " << families_string(cfg.train_families) << "\n";
  os << "test_families = " << families_string(cfg.test_families) << "\n";
  os << "shapes_per_family = " << cfg.shapes_per_family << "\n";
  os << "points_per_shape = " << cfg.points_per_shape << "\n";
  os << "eval_shapes = " << cfg.eval_shapes << "\n";
  os << "eval_seeds = " << cfg.eval_seeds << "\n";
  os << "noise_level = " << cfg.noise_level << "\n";
  os << "out_dir = " << cfg.out_dir << "\n";
  os << "report_cd_scale = " << cfg.report_cd_scale << "\n";
  return os.str();
}

void write_run_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open '" + path + "' for writing");
  os << serialize_run_config(cfg);
}

}  // namespace mpu
