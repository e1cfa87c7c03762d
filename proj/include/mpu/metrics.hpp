#pragma once

#include <vector>

#include "mpu/geometry.hpp"
#include "mpu/kdtree.hpp"

namespace mpu {

enum class Reduction { kSum, kMean };

// Evaluation record for one cloud pair. psnr_db is +infinity when both
// directed MSEs vanish; it prints as "inf" and compares greater than
// any finite value.
struct MetricReport {
  double cd_sum = 0.0;
  double cd_mean = 0.0;
  double psnr_db = 0.0;
  double wall_time_ms = 0.0;
};

// Symmetric Chamfer distance over squared nearest-neighbor distances.
// kSum adds both directed sums; kMean divides each directed sum by its
// source count. Throws ParameterError on an empty cloud.
double chamfer_distance(const PointCloud& y, const PointCloud& g, Reduction reduction);

// min(PSNR_(Y,G), PSNR_(G,Y)) with PSNR_(A,B) = 10 log10(p_s^2 / d_MSE(A,B)).
// The normalization length p_s is the bounding-box diagonal of g.
double psnr(const PointCloud& y, const PointCloud& g);

MetricReport evaluate(const PointCloud& y, const PointCloud& g);

struct ChamferGrad {
  double loss = 0.0;                // mean-reduced Chamfer distance
  std::vector<Vec3> grad_y;         // d loss / d y_a, one per point of y
};

// Mean-reduced Chamfer loss and its gradient w.r.t. y, with
// nearest-neighbor correspondences held fixed during the backward pass.
ChamferGrad chamfer_loss_grad(const PointCloud& y, const PointCloud& g);

}  // namespace mpu
