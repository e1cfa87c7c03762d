#include "mpu/geometry.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <sstream>

namespace mpu {

namespace {

constexpr double kPi = 3.14159265358979323846;

double signed_pow(double base, double exponent) {
  if (base == 0.0) return 0.0;
  double s = base < 0.0 ? -1.0 : 1.0;
  return s * std::pow(std::abs(base), exponent);
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ParameterError(msg);
}

}  // namespace

const char* to_string(ShapeFamily family) {
  switch (family) {
    case ShapeFamily::kSphere: return "sphere";
    case ShapeFamily::kTorus: return "torus";
    case ShapeFamily::kSuperellipsoid: return "superellipsoid";
    case ShapeFamily::kGaussianBumpPlane: return "gaussian-bump";
    case ShapeFamily::kCylinder: return "cylinder";
  }
  return "unknown";
}

ShapeFamily shape_family_from_string(const std::string& name) {
  if (name == "sphere") return ShapeFamily::kSphere;
  if (name == "torus") return ShapeFamily::kTorus;
  if (name == "superellipsoid") return ShapeFamily::kSuperellipsoid;
  if (name == "gaussian-bump") return ShapeFamily::kGaussianBumpPlane;
  if (name == "cylinder") return ShapeFamily::kCylinder;
  throw ParameterError("unknown shape family: '" + name + "'");
}

ShapeSpec ShapeSpec::sphere(double radius, std::uint64_t seed) {
  ShapeSpec s;
  s.family = ShapeFamily::kSphere;
  s.radius = radius;
  s.seed = seed;
  return s;
}

ShapeSpec ShapeSpec::torus(double major, double minor, std::uint64_t seed) {
  ShapeSpec s;
  s.family = ShapeFamily::kTorus;
  s.major_radius = major;
  s.minor_radius = minor;
  s.seed = seed;
  return s;
}

ShapeSpec ShapeSpec::superellipsoid(double e1, double e2, std::uint64_t seed) {
  ShapeSpec s;
  s.family = ShapeFamily::kSuperellipsoid;
  s.exponent1 = e1;
  s.exponent2 = e2;
  s.seed = seed;
  return s;
}

ShapeSpec ShapeSpec::gaussian_bump(double height, double sigma, std::uint64_t seed) {
  ShapeSpec s;
  s.family = ShapeFamily::kGaussianBumpPlane;
  s.bump_height = height;
  s.bump_sigma = sigma;
  s.seed = seed;
  return s;
}

ShapeSpec ShapeSpec::cylinder(double radius, double height, std::uint64_t seed) {
  ShapeSpec s;
  s.family = ShapeFamily::kCylinder;
  s.radius = radius;
  s.height = height;
  s.seed = seed;
  return s;
}

namespace {

void validate(const ShapeSpec& spec) {
  switch (spec.family) {
    case ShapeFamily::kSphere:
      require(spec.radius > 0.0 && spec.radius <= 0.5,
              "sphere radius must lie in (0, 0.5]");
      break;
    case ShapeFamily::kTorus:
      require(spec.minor_radius > 0.0 && spec.minor_radius < spec.major_radius,
              "torus minor radius must lie in (0, major_radius)");
      require(spec.major_radius + spec.minor_radius <= 0.5,
              "torus must fit the unit cube: major + minor <= 0.5");
      break;
    case ShapeFamily::kSuperellipsoid:
      require(spec.exponent1 >= 0.2 && spec.exponent1 <= 2.0 &&
                  spec.exponent2 >= 0.2 && spec.exponent2 <= 2.0,
              "superellipsoid exponents must lie in [0.2, 2]");
      break;
    case ShapeFamily::kGaussianBumpPlane:
      require(spec.bump_height >= 0.0 && spec.bump_height <= 0.5,
              "bump height must lie in [0, 0.5]");
      require(spec.bump_sigma > 0.0, "bump sigma must be positive");
      break;
    case ShapeFamily::kCylinder:
      require(spec.radius > 0.0 && spec.radius <= 0.5,
              "cylinder radius must lie in (0, 0.5]");
      require(spec.height > 0.0 && spec.height <= 1.0,
              "cylinder height must lie in (0, 1]");
      break;
  }
}

}  // namespace

PointCloud generate_shape(const ShapeSpec& spec, std::size_t n) {
  require(n >= 8, "generate_shape needs n >= 8");
  validate(spec);

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  PointCloud pc;
  pc.label = to_string(spec.family);
  pc.points.reserve(n);

  switch (spec.family) {
    case ShapeFamily::kSphere: {
      // Uniform on the sphere via normalized Gaussian directions.
      std::normal_distribution<double> gauss(0.0, 1.0);
      while (pc.points.size() < n) {
        Vec3 d{gauss(rng), gauss(rng), gauss(rng)};
        double len = d.norm();
        if (len < 1e-12) continue;
        pc.points.push_back(d * (spec.radius / len));
      }
      break;
    }
    case ShapeFamily::kTorus: {
      // Area-weighted rejection in the tube angle.
      double R = spec.major_radius, r = spec.minor_radius;
      while (pc.points.size() < n) {
        double u = 2.0 * kPi * unit(rng);
        double v = 2.0 * kPi * unit(rng);
        double w = unit(rng);
        if (w * (R + r) > R + r * std::cos(v)) continue;
        double ring = R + r * std::cos(v);
        pc.points.push_back({ring * std::cos(u), ring * std::sin(u), r * std::sin(v)});
      }
      break;
    }
    case ShapeFamily::kSuperellipsoid: {
      double a = 0.5;
      for (std::size_t i = 0; i < n; ++i) {
        double eta = kPi * (unit(rng) - 0.5);       // [-pi/2, pi/2]
        double omega = 2.0 * kPi * unit(rng) - kPi;  // [-pi, pi)
        double ce = signed_pow(std::cos(eta), spec.exponent1);
        double se = signed_pow(std::sin(eta), spec.exponent1);
        pc.points.push_back({a * ce * signed_pow(std::cos(omega), spec.exponent2),
                             a * ce * signed_pow(std::sin(omega), spec.exponent2),
                             a * se});
      }
      break;
    }
    case ShapeFamily::kGaussianBumpPlane: {
      // Height field z = h * exp(-(x^2+y^2) / (2 sigma^2)) over the
      // centered unit square, shifted so the surface straddles z = 0.
      double h = spec.bump_height, s2 = 2.0 * spec.bump_sigma * spec.bump_sigma;
      for (std::size_t i = 0; i < n; ++i) {
        double x = unit(rng) - 0.5;
        double y = unit(rng) - 0.5;
        double z = h * std::exp(-(x * x + y * y) / s2) - 0.5 * h;
        pc.points.push_back({x, y, z});
      }
      break;
    }
    case ShapeFamily::kCylinder: {
      // Lateral surface only, uniform by area.
      for (std::size_t i = 0; i < n; ++i) {
        double u = 2.0 * kPi * unit(rng);
        double z = spec.height * (unit(rng) - 0.5);
        pc.points.push_back({spec.radius * std::cos(u), spec.radius * std::sin(u), z});
      }
      break;
    }
  }
  return pc;
}

BoundingBox bounding_box(const PointCloud& pc) {
  if (pc.empty()) throw ParameterError("bounding_box: empty point cloud");
  BoundingBox box;
  box.min_corner = box.max_corner = pc.points[0];
  for (const Vec3& p : pc.points) {
    for (int c = 0; c < 3; ++c) {
      box.min_corner[c] = std::min(box.min_corner[c], p[c]);
      box.max_corner[c] = std::max(box.max_corner[c], p[c]);
    }
  }
  box.diagonal = (box.max_corner - box.min_corner).norm();
  return box;
}

PointCloud add_gaussian_noise(const PointCloud& pc, double level, std::uint64_t seed) {
  if (level < 0.0 || level > 0.1) {
    std::ostringstream os;
    os << "noise level must lie in [0, 0.1], got " << level;
    throw ParameterError(os.str());
  }
  if (pc.empty()) throw ParameterError("add_gaussian_noise: empty point cloud");
  if (level == 0.0) return pc;

  double sigma = level * bounding_box(pc).diagonal;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  PointCloud out = pc;
  for (Vec3& p : out.points) {
    p.x += gauss(rng);
    p.y += gauss(rng);
    p.z += gauss(rng);
  }
  return out;
}

NormalizeResult normalize_to_unit(const PointCloud& pc) {
  BoundingBox box = bounding_box(pc);
  if (box.diagonal == 0.0) {
    throw DegenerateInputError("normalize_to_unit: zero bounding-box diagonal");
  }
  Vec3 extent = box.max_corner - box.min_corner;
  double scale = std::max({extent.x, extent.y, extent.z});
  Vec3 offset = (box.min_corner + box.max_corner) * 0.5;

  NormalizeResult result;
  result.scale = scale;
  result.offset = offset;
  result.cloud.label = pc.label;
  result.cloud.points.reserve(pc.count());
  for (const Vec3& p : pc.points) {
    result.cloud.points.push_back((p - offset) / scale);
  }
  return result;
}

PointCloud denormalize(const PointCloud& pc, double scale, const Vec3& offset) {
  PointCloud out;
  out.label = pc.label;
  out.points.reserve(pc.count());
  for (const Vec3& p : pc.points) {
    out.points.push_back(p * scale + offset);
  }
  return out;
}

}  // namespace mpu
