#pragma once

#include <cstdint>
#include <vector>

#include "mpu/geometry.hpp"

namespace mpu {

// Indices selected from a source cloud. Distinct, each < source_count.
struct SampleIndexSet {
  std::vector<std::size_t> indices;
  std::size_t source_count = 0;
};

// Greedy max-min farthest point sampling. The first index is the point
// farthest from the centroid; every subsequent index maximizes the
// minimum distance to the already-selected set. Exact distance ties
// break toward the lowest index. Deterministic.
// Throws ParameterError unless 1 <= k <= pc.count().
SampleIndexSet farthest_point_sample(const PointCloud& pc, std::size_t k);

// Uniform random selection of k distinct indices, deterministic given
// seed. Kept for the sampling-method ablation.
SampleIndexSet random_sample(const PointCloud& pc, std::size_t k, std::uint64_t seed);

enum class SamplingMethod { kFarthestPoint, kRandom };

// Selects floor(count / ratio) points from pc. Output points are a
// subset of the input. Throws ParameterError for ratio < 2 and
// DegenerateInputError when fewer than 4 points would remain.
PointCloud downsample(const PointCloud& pc, int ratio,
                      SamplingMethod method = SamplingMethod::kFarthestPoint,
                      std::uint64_t seed = 0);

PointCloud gather(const PointCloud& pc, const SampleIndexSet& sel);

}  // namespace mpu
