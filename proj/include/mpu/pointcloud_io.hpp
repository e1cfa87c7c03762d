#pragma once

#include <string>

#include "mpu/geometry.hpp"

namespace mpu {

enum class PlyEncoding { kBinaryLittleEndian, kAscii };

// Extension-dispatched readers/writers. ".xyz"/".txt" use the text
// format (one "x y z" line per point, '#' starts a comment); ".ply"
// supports ASCII and binary-little-endian vertex data with float or
// double position properties. Binary PLY round-trips coordinates
// bit-exactly; text formats round-trip to at least 9 significant
// digits. Parse failures name the offending line.
PointCloud read_point_cloud(const std::string& path);
void write_point_cloud(const PointCloud& pc, const std::string& path,
                       PlyEncoding ply_encoding = PlyEncoding::kBinaryLittleEndian);

PointCloud read_xyz(const std::string& path);
void write_xyz(const PointCloud& pc, const std::string& path);

PointCloud read_ply(const std::string& path);
void write_ply(const PointCloud& pc, const std::string& path, PlyEncoding encoding);

}  // namespace mpu
