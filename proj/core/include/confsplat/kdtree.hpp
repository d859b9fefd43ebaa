#pragma once

#include <cstddef>
#include <vector>

#include "confsplat/geometry.hpp"

namespace confsplat {

/// Static 3D KD-tree over a copy of the input points. Immutable after construction.
class KdTree {
 public:
  struct Neighbor {
    std::size_t index = 0;
    double distance = 0.0;
  };

  KdTree() = default;
  explicit KdTree(std::vector<Vec3> points);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Vec3& point(std::size_t i) const { return points_[i]; }

  /// Nearest point; ties go to the smaller index. Throws EmptyMap on an empty tree.
  Neighbor nearest(const Vec3& query) const;
  /// Up to k nearest points sorted by (distance, index).
  std::vector<Neighbor> knn(const Vec3& query, std::size_t k) const;
  /// Indices of all points with distance <= radius, ascending.
  std::vector<std::size_t> radius_search(const Vec3& query, double radius) const;

 private:
  struct Node {
    int axis = -1;  // -1 for leaves
    double split = 0.0;
    std::size_t begin = 0, end = 0;  // range into order_ for leaves
    int left = -1, right = -1;
  };

  int build(std::size_t begin, std::size_t end, int depth);
  void knn_visit(int node, const Vec3& q, std::size_t k, std::vector<Neighbor>& heap) const;
  void radius_visit(int node, const Vec3& q, double r, std::vector<std::size_t>& out) const;

  std::vector<Vec3> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace confsplat
