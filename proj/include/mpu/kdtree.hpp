#pragma once

#include <cstddef>
#include <vector>

#include "mpu/geometry.hpp"

namespace mpu {

// Exact nearest-neighbor index over a point cloud. Queries return the
// true argmin of squared Euclidean distance; ties break toward the
// lowest point index. Immutable after construction; concurrent queries
// are safe.
class SpatialIndex {
 public:
  struct Result {
    std::size_t index = 0;
    double squared_distance = 0.0;
  };

  explicit SpatialIndex(const PointCloud& pc, std::size_t leaf_size = 16);

  Result nearest(const Vec3& query) const;

  std::size_t size() const { return points_.size(); }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t leaf_size() const { return leaf_size_; }

 private:
  struct Node {
    // interior: split plane; leaf: child == -1 and [begin, end) into order_
    int axis = -1;
    double split = 0.0;
    int left = -1;
    int right = -1;
    std::size_t begin = 0;
    std::size_t end = 0;
    bool leaf() const { return left < 0 && right < 0; }
  };

  int build(std::size_t begin, std::size_t end, int depth);
  void search(int node, const Vec3& q, Result& best) const;

  std::vector<Vec3> points_;       // by original index
  std::vector<std::size_t> order_;  // permutation referenced by leaves
  std::vector<Node> nodes_;
  std::size_t leaf_size_;
};

}  // namespace mpu
