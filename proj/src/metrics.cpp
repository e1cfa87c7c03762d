#include "mpu/metrics.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace mpu {

namespace {

// directed sum of squared NN distances, a in source -> nearest in index
double directed_sum(const PointCloud& source, const SpatialIndex& index) {
  double sum = 0.0;
  for (const Vec3& p : source.points) sum += index.nearest(p).squared_distance;
  return sum;
}

void check_nonempty(const PointCloud& y, const PointCloud& g, const char* op) {
  if (y.empty() || g.empty()) {
    throw ParameterError(std::string(op) + ": empty point cloud");
  }
}

}  // namespace

double chamfer_distance(const PointCloud& y, const PointCloud& g, Reduction reduction) {
  check_nonempty(y, g, "chamfer_distance");
  SpatialIndex gi(g), yi(y);
  double yg = directed_sum(y, gi);
  double gy = directed_sum(g, yi);
  if (reduction == Reduction::kSum) return yg + gy;
  return yg / static_cast<double>(y.count()) + gy / static_cast<double>(g.count());
}

double psnr(const PointCloud& y, const PointCloud& g) {
  check_nonempty(y, g, "psnr");
  double ps = bounding_box(g).diagonal;
  SpatialIndex gi(g), yi(y);
  double mse_yg = directed_sum(y, gi) / static_cast<double>(y.count());
  double mse_gy = directed_sum(g, yi) / static_cast<double>(g.count());

  auto one_direction = [ps](double mse) {
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(ps * ps / mse);
  };
  return std::min(one_direction(mse_yg), one_direction(mse_gy));
}

MetricReport evaluate(const PointCloud& y, const PointCloud& g) {
  auto start = std::chrono::steady_clock::now();
  MetricReport report;
  report.cd_sum = chamfer_distance(y, g, Reduction::kSum);
  report.cd_mean = chamfer_distance(y, g, Reduction::kMean);
  report.psnr_db = psnr(y, g);
  report.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

ChamferGrad chamfer_loss_grad(const PointCloud& y, const PointCloud& g) {
  check_nonempty(y, g, "chamfer_loss_grad");
  const double ny = static_cast<double>(y.count());
  const double ng = static_cast<double>(g.count());

  ChamferGrad out;
  out.grad_y.assign(y.count(), Vec3{});

  SpatialIndex gi(g);
  double sum_yg = 0.0;
  for (std::size_t a = 0; a < y.count(); ++a) {
    auto nn = gi.nearest(y.points[a]);
    sum_yg += nn.squared_distance;
    out.grad_y[a] = out.grad_y[a] + (y.points[a] - g.points[nn.index]) * (2.0 / ny);
  }

  SpatialIndex yi(y);
  double sum_gy = 0.0;
  for (const Vec3& b : g.points) {
    auto nn = yi.nearest(b);
    sum_gy += nn.squared_distance;
    out.grad_y[nn.index] = out.grad_y[nn.index] + (y.points[nn.index] - b) * (2.0 / ng);
  }

  out.loss = sum_yg / ny + sum_gy / ng;
  return out;
}

}  // namespace mpu
