#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mpu/errors.hpp"

namespace mpu {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  bool operator==(const Vec3& o) const = default;

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double squared_norm() const { return dot(*this); }
  double norm() const { return std::sqrt(squared_norm()); }
};

inline double squared_distance(const Vec3& a, const Vec3& b) {
  return (a - b).squared_norm();
}

// Ordered list of 3D points. Coordinates are dimensionless model units.
struct PointCloud {
  std::vector<Vec3> points;
  std::string label;  // optional shape-family tag

  std::size_t count() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

struct BoundingBox {
  Vec3 min_corner;
  Vec3 max_corner;
  double diagonal = 0.0;
};

enum class ShapeFamily {
  kSphere,
  kTorus,
  kSuperellipsoid,
  kGaussianBumpPlane,
  kCylinder,
};

const char* to_string(ShapeFamily family);
ShapeFamily shape_family_from_string(const std::string& name);

// Parametric surface description. Parameters are family-specific; any
// field not used by a family is ignored. All default shapes fit inside
// the unit cube centered at the origin.
struct ShapeSpec {
  ShapeFamily family = ShapeFamily::kSphere;
  // sphere: radius; cylinder: radius; torus: unused
  double radius = 0.5;
  // torus
  double major_radius = 0.35;
  double minor_radius = 0.15;
  // superellipsoid (semi-axes fixed at 0.5)
  double exponent1 = 1.0;
  double exponent2 = 1.0;
  // gaussian-bump plane
  double bump_height = 0.3;
  double bump_sigma = 0.15;
  // cylinder
  double height = 0.8;
  std::uint64_t seed = 0;

  static ShapeSpec sphere(double radius, std::uint64_t seed = 0);
  static ShapeSpec torus(double major, double minor, std::uint64_t seed = 0);
  static ShapeSpec superellipsoid(double e1, double e2, std::uint64_t seed = 0);
  static ShapeSpec gaussian_bump(double height, double sigma, std::uint64_t seed = 0);
  static ShapeSpec cylinder(double radius, double height, std::uint64_t seed = 0);
};

// Samples n points on the parametric surface described by spec.
// Deterministic given (spec, n); output lies in [-0.5, 0.5]^3.
// Throws ParameterError for invalid family parameters or n < 8.
PointCloud generate_shape(const ShapeSpec& spec, std::size_t n);

// Tight axis-aligned box. Throws ParameterError on empty input.
BoundingBox bounding_box(const PointCloud& pc);

// Perturbs every coordinate with zero-mean Gaussian noise,
// sigma = level * bounding-box diagonal. Deterministic given seed.
// level must lie in [0, 0.1]; level 0 returns the input unchanged.
PointCloud add_gaussian_noise(const PointCloud& pc, double level, std::uint64_t seed);

struct NormalizeResult {
  PointCloud cloud;  // fits in [-0.5, 0.5]^3
  double scale = 1.0;
  Vec3 offset;  // original = normalized * scale + offset
};

// Centers the cloud on its bounding-box center and divides by the
// longest box side. Throws DegenerateInputError when the diagonal is zero.
NormalizeResult normalize_to_unit(const PointCloud& pc);

// Inverse of normalize_to_unit.
PointCloud denormalize(const PointCloud& pc, double scale, const Vec3& offset);

}  // namespace mpu
