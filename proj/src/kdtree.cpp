#include "mpu/kdtree.hpp"

#include <algorithm>
#include <limits>

namespace mpu {

SpatialIndex::SpatialIndex(const PointCloud& pc, std::size_t leaf_size)
    : points_(pc.points), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
  if (pc.empty()) throw ParameterError("SpatialIndex: empty point cloud");
  order_.resize(points_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  nodes_.reserve(2 * points_.size() / leaf_size_ + 1);
  build(0, points_.size(), 0);
}

int SpatialIndex::build(std::size_t begin, std::size_t end, int depth) {
  int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{});
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  if (end - begin <= leaf_size_) return id;

  // split on the widest axis for balanced geometry
  Vec3 lo = points_[order_[begin]], hi = lo;
  for (std::size_t i = begin; i < end; ++i) {
    const Vec3& p = points_[order_[i]];
    for (int c = 0; c < 3; ++c) {
      lo[c] = std::min(lo[c], p[c]);
      hi[c] = std::max(hi[c], p[c]);
    }
  }
  int axis = 0;
  double extent = hi.x - lo.x;
  if (hi.y - lo.y > extent) { axis = 1; extent = hi.y - lo.y; }
  if (hi.z - lo.z > extent) { axis = 2; extent = hi.z - lo.z; }
  if (extent == 0.0) return id;  // all points coincide; keep as leaf

  std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) {
                     double ca = points_[a][axis], cb = points_[b][axis];
                     if (ca != cb) return ca < cb;
                     return a < b;  // deterministic partition
                   });
  nodes_[id].axis = axis;
  nodes_[id].split = points_[order_[mid]][axis];
  int left = build(begin, mid, depth + 1);
  int right = build(mid, end, depth + 1);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void SpatialIndex::search(int node_id, const Vec3& q, Result& best) const {
  const Node& node = nodes_[node_id];
  if (node.leaf()) {
    for (std::size_t i = node.begin; i < node.end; ++i) {
      std::size_t idx = order_[i];
      double d2 = squared_distance(points_[idx], q);
      if (d2 < best.squared_distance ||
          (d2 == best.squared_distance && idx < best.index)) {
        best.squared_distance = d2;
        best.index = idx;
      }
    }
    return;
  }
  double diff = q[node.axis] - node.split;
  int near = diff < 0.0 ? node.left : node.right;
  int far = diff < 0.0 ? node.right : node.left;
  search(near, q, best);
  // visit the far side on exact equality too, so index tie-breaks stay exact
  if (diff * diff <= best.squared_distance) search(far, q, best);
}

SpatialIndex::Result SpatialIndex::nearest(const Vec3& query) const {
  Result best;
  best.index = std::numeric_limits<std::size_t>::max();
  best.squared_distance = std::numeric_limits<double>::infinity();
  search(0, query, best);
  return best;
}

}  // namespace mpu
