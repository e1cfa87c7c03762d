#include "mpu/sampling.hpp"

#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace mpu {

SampleIndexSet farthest_point_sample(const PointCloud& pc, std::size_t k) {
  const std::size_t n = pc.count();
  if (k < 1 || k > n) {
    std::ostringstream os;
    os << "farthest_point_sample: k=" << k << " outside [1, " << n << "]";
    throw ParameterError(os.str());
  }

  Vec3 centroid{0, 0, 0};
  for (const Vec3& p : pc.points) centroid = centroid + p;
  centroid = centroid / static_cast<double>(n);

  SampleIndexSet sel;
  sel.source_count = n;
  sel.indices.reserve(k);

  // min squared distance from each point to the selected set
  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
  std::vector<bool> selected(n, false);

  // seed: farthest from centroid, ties to lowest index
  std::size_t best = 0;
  double best_d2 = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d2 = squared_distance(pc.points[i], centroid);
    if (d2 > best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  sel.indices.push_back(best);
  selected[best] = true;

  while (sel.indices.size() < k) {
    const Vec3& last = pc.points[sel.indices.back()];
    best_d2 = -1.0;
    best = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double d2 = squared_distance(pc.points[i], last);
      if (d2 < min_d2[i]) min_d2[i] = d2;
      if (!selected[i] && min_d2[i] > best_d2) {
        best_d2 = min_d2[i];
        best = i;
      }
    }
    sel.indices.push_back(best);
    selected[best] = true;
  }
  return sel;
}

SampleIndexSet random_sample(const PointCloud& pc, std::size_t k, std::uint64_t seed) {
  const std::size_t n = pc.count();
  if (k < 1 || k > n) {
    std::ostringstream os;
    os << "random_sample: k=" << k << " outside [1, " << n << "]";
    throw ParameterError(os.str());
  }
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  // partial Fisher-Yates
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(all[i], all[pick(rng)]);
  }
  SampleIndexSet sel;
  sel.source_count = n;
  sel.indices.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
  return sel;
}

PointCloud gather(const PointCloud& pc, const SampleIndexSet& sel) {
  PointCloud out;
  out.label = pc.label;
  out.points.reserve(sel.indices.size());
  for (std::size_t i : sel.indices) out.points.push_back(pc.points[i]);
  return out;
}

PointCloud downsample(const PointCloud& pc, int ratio, SamplingMethod method,
                      std::uint64_t seed) {
  if (ratio < 2) throw ParameterError("downsample: ratio must be >= 2");
  std::size_t k = pc.count() / static_cast<std::size_t>(ratio);
  if (k < 4) {
    std::ostringstream os;
    os << "downsample: " << pc.count() << " points at ratio " << ratio
       << " leave " << k << " (< 4)";
    throw DegenerateInputError(os.str());
  }
  SampleIndexSet sel = method == SamplingMethod::kFarthestPoint
                           ? farthest_point_sample(pc, k)
                           : random_sample(pc, k, seed);
  return gather(pc, sel);
}

}  // namespace mpu
