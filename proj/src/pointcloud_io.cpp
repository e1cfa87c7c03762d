#include "mpu/pointcloud_io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace mpu {

namespace {

std::string lower_ext(const std::string& path) {
  auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return {};
  std::string ext = path.substr(dot);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

[[noreturn]] void parse_fail(const std::string& path, std::size_t line,
                             const std::string& what) {
  std::ostringstream os;
  os << path << ":" << line << ": " << what;
  throw ParseError(os.str());
}

// scalar PLY property sizes in bytes; 0 marks an unknown type
std::size_t ply_scalar_size(const std::string& type) {
  if (type == "char" || type == "int8" || type == "uchar" || type == "uint8") return 1;
  if (type == "short" || type == "int16" || type == "ushort" || type == "uint16") return 2;
  if (type == "int" || type == "int32" || type == "uint" || type == "uint32") return 4;
  if (type == "float" || type == "float32") return 4;
  if (type == "double" || type == "float64") return 8;
  return 0;
}

bool is_float_type(const std::string& type) {
  return type == "float" || type == "float32" || type == "double" || type == "float64";
}

struct PlyProperty {
  std::string type;
  std::string name;
  bool is_list = false;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

double read_le_scalar(const unsigned char* p, const std::string& type) {
  if (type == "float" || type == "float32") {
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    float f;
    std::memcpy(&f, &bits, 4);
    return static_cast<double>(f);
  }
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

}  // namespace

PointCloud read_xyz(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open '" + path + "'");

  PointCloud pc;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::istringstream fields(line);
    Vec3 p;
    if (!(fields >> p.x >> p.y >> p.z)) {
      parse_fail(path, line_no, "expected three coordinate fields");
    }
    std::string extra;
    if (fields >> extra) {
      parse_fail(path, line_no, "trailing field '" + extra + "'");
    }
    pc.points.push_back(p);
  }
  return pc;
}

void write_xyz(const PointCloud& pc, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open '" + path + "' for writing");
  os << std::setprecision(17);
  for (const Vec3& p : pc.points) {
    os << p.x << ' ' << p.y << ' ' << p.z << '\n';
  }
  if (!os) throw FormatError("write failed for '" + path + "'");
}

PointCloud read_ply(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open '" + path + "'");

  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() {
    if (!std::getline(is, line)) parse_fail(path, line_no + 1, "unexpected end of header");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
  };

  next_line();
  if (line != "ply") parse_fail(path, line_no, "not a PLY file (missing 'ply')");

  bool binary = false;
  bool have_format = false;
  std::vector<PlyElement> elements;

  while (true) {
    next_line();
    std::istringstream fields(line);
    std::string keyword;
    fields >> keyword;
    if (keyword == "comment" || keyword == "obj_info" || keyword.empty()) continue;
    if (keyword == "format") {
      std::string fmt, version;
      fields >> fmt >> version;
      if (fmt == "ascii") {
        binary = false;
      } else if (fmt == "binary_little_endian") {
        binary = true;
      } else {
        parse_fail(path, line_no, "unsupported format '" + fmt + "'");
      }
      have_format = true;
    } else if (keyword == "element") {
      PlyElement el;
      if (!(fields >> el.name >> el.count)) {
        parse_fail(path, line_no, "malformed element declaration");
      }
      elements.push_back(el);
    } else if (keyword == "property") {
      if (elements.empty()) parse_fail(path, line_no, "property before any element");
      PlyProperty prop;
      fields >> prop.type;
      if (prop.type == "list") {
        prop.is_list = true;
        std::string count_type, value_type;
        if (!(fields >> count_type >> value_type >> prop.name)) {
          parse_fail(path, line_no, "malformed list property");
        }
      } else {
        if (!(fields >> prop.name)) parse_fail(path, line_no, "malformed property");
        if (ply_scalar_size(prop.type) == 0) {
          throw FormatError(path + ": unsupported property type '" + prop.type + "'");
        }
      }
      elements.back().properties.push_back(prop);
    } else if (keyword == "end_header") {
      break;
    } else {
      parse_fail(path, line_no, "unknown header keyword '" + keyword + "'");
    }
  }
  if (!have_format) parse_fail(path, line_no, "missing format declaration");

  PointCloud pc;
  for (const PlyElement& el : elements) {
    if (el.name != "vertex") {
      // skip foreign elements
      if (!binary) {
        for (std::size_t i = 0; i < el.count; ++i) {
          if (!std::getline(is, line)) {
            parse_fail(path, line_no + 1, "unexpected end of data");
          }
          ++line_no;
        }
        continue;
      }
      std::size_t stride = 0;
      for (const PlyProperty& prop : el.properties) {
        if (prop.is_list) {
          throw FormatError(path + ": unsupported property type 'list' in binary element '" +
                            el.name + "' preceding vertex data");
        }
        stride += ply_scalar_size(prop.type);
      }
      is.seekg(static_cast<std::streamoff>(el.count * stride), std::ios::cur);
      continue;
    }

    int xyz_field[3] = {-1, -1, -1};
    for (std::size_t f = 0; f < el.properties.size(); ++f) {
      const PlyProperty& prop = el.properties[f];
      if (prop.is_list) {
        throw FormatError(path + ": unsupported property type 'list' in vertex element");
      }
      int axis = prop.name == "x" ? 0 : prop.name == "y" ? 1 : prop.name == "z" ? 2 : -1;
      if (axis < 0) continue;
      if (!is_float_type(prop.type)) {
        throw FormatError(path + ": unsupported property type '" + prop.type +
                          "' for coordinate " + prop.name);
      }
      xyz_field[axis] = static_cast<int>(f);
    }
    for (int a = 0; a < 3; ++a) {
      if (xyz_field[a] < 0) {
        throw FormatError(path + ": vertex element lacks " +
                          std::string(1, static_cast<char>('x' + a)) + " property");
      }
    }

    pc.points.reserve(el.count);
    if (!binary) {
      for (std::size_t i = 0; i < el.count; ++i) {
        if (!std::getline(is, line)) parse_fail(path, line_no + 1, "unexpected end of data");
        ++line_no;
        std::istringstream fields(line);
        std::vector<double> row(el.properties.size());
        for (double& v : row) {
          if (!(fields >> v)) parse_fail(path, line_no, "short vertex line");
        }
        pc.points.push_back({row[static_cast<std::size_t>(xyz_field[0])],
                             row[static_cast<std::size_t>(xyz_field[1])],
                             row[static_cast<std::size_t>(xyz_field[2])]});
      }
    } else {
      std::size_t stride = 0;
      std::vector<std::size_t> offsets(el.properties.size());
      for (std::size_t f = 0; f < el.properties.size(); ++f) {
        offsets[f] = stride;
        stride += ply_scalar_size(el.properties[f].type);
      }
      std::vector<unsigned char> row(stride);
      for (std::size_t i = 0; i < el.count; ++i) {
        is.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(stride));
        if (!is) throw FormatError(path + ": truncated binary vertex data");
        Vec3 p;
        for (int a = 0; a < 3; ++a) {
          auto f = static_cast<std::size_t>(xyz_field[a]);
          p[a] = read_le_scalar(row.data() + offsets[f], el.properties[f].type);
        }
        pc.points.push_back(p);
      }
    }
    return pc;  // positions read; later elements are not needed
  }
  throw FormatError(path + ": no vertex element");
}

void write_ply(const PointCloud& pc, const std::string& path, PlyEncoding encoding) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open '" + path + "' for writing");

  os << "ply\n";
  os << (encoding == PlyEncoding::kAscii ? "format ascii 1.0\n"
                                         : "format binary_little_endian 1.0\n");
  os << "element vertex " << pc.count() << "\n";
  os << "property double x\nproperty double y\nproperty double z\n";
  os << "end_header\n";

  if (encoding == PlyEncoding::kAscii) {
    os << std::setprecision(17);
    for (const Vec3& p : pc.points) os << p.x << ' ' << p.y << ' ' << p.z << '\n';
  } else {
    for (const Vec3& p : pc.points) {
      for (int a = 0; a < 3; ++a) {
        double v = p[a];
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
        os.write(b, 8);
      }
    }
  }
  if (!os) throw FormatError("write failed for '" + path + "'");
}

PointCloud read_point_cloud(const std::string& path) {
  std::string ext = lower_ext(path);
  if (ext == ".xyz" || ext == ".txt") return read_xyz(path);
  if (ext == ".ply") return read_ply(path);
  throw ParameterError("unsupported point cloud extension: '" + path + "'");
}

void write_point_cloud(const PointCloud& pc, const std::string& path,
                       PlyEncoding ply_encoding) {
  std::string ext = lower_ext(path);
  if (ext == ".xyz" || ext == ".txt") {
    write_xyz(pc, path);
  } else if (ext == ".ply") {
    write_ply(pc, path, ply_encoding);
  } else {
    throw ParameterError("unsupported point cloud extension: '" + path + "'");
  }
}

}  // namespace mpu
