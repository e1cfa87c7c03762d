#include <bit>
#include <cstring>
#include <fstream>

#include "mpu/backbone.hpp"

namespace mpu {

namespace {

static_assert(sizeof(double) == 8 && std::numeric_limits<double>::is_iec559);

constexpr char kMagic[4] = {'M', 'P', 'U', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(os, bits);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw FormatError("checkpoint: truncated file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw FormatError("checkpoint: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) {
  std::uint64_t bits = get_u64(is);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void save_checkpoint(const Upsampler& model, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("checkpoint: cannot open '" + path + "' for writing");

  os.write(kMagic, 4);
  put_u32(os, kVersion);
  put_u32(os, static_cast<std::uint32_t>(model.config.ratio));
  put_u32(os, static_cast<std::uint32_t>(model.config.feature_dim));
  put_u32(os, static_cast<std::uint32_t>(model.config.hidden_layers));
  put_f64(os, model.config.offset_scale);
  put_u64(os, model.config.seed);

  put_u32(os, static_cast<std::uint32_t>(model.params.size()));
  for (const auto& [name, tensor] : model.params) {
    put_u32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(os, static_cast<std::uint32_t>(tensor.shape.size()));
    for (std::size_t d : tensor.shape) put_u64(os, d);
    for (double v : tensor.values) put_f64(os, v);
  }
  if (!os) throw FormatError("checkpoint: write failed for '" + path + "'");
}

Upsampler load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("checkpoint: cannot open '" + path + "'");

  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("checkpoint: bad magic in '" + path + "'");
  }
  std::uint32_t version = get_u32(is);
  if (version != kVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  }

  Upsampler model;
  model.config.ratio = static_cast<int>(get_u32(is));
  model.config.feature_dim = get_u32(is);
  model.config.hidden_layers = get_u32(is);
  model.config.offset_scale = get_f64(is);
  model.config.seed = get_u64(is);

  std::uint32_t count = get_u32(is);
  for (std::uint32_t p = 0; p < count; ++p) {
    std::uint32_t name_len = get_u32(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    if (!is) throw FormatError("checkpoint: truncated parameter name");
    std::uint32_t rank = get_u32(is);
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = get_u64(is);
    Tensor t(shape);
    for (double& v : t.values) v = get_f64(is);
    model.params.insert(name, std::move(t));
  }
  validate(model.config);
  return model;
}

}  // namespace mpu
