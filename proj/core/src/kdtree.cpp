#include "confsplat/kdtree.hpp"

#include <algorithm>
#include <numeric>

#include "confsplat/errors.hpp"

namespace confsplat {
namespace {

constexpr std::size_t kLeafSize = 8;

bool closer(const KdTree::Neighbor& a, const KdTree::Neighbor& b) {
  return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
}

}  // namespace

KdTree::KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
  for (const Vec3& p : points_) {
    if (!p.allFinite()) {
      throw InvalidParameter("KdTree: non-finite point");
    }
  }
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (!points_.empty()) {
    build(0, points_.size(), 0);
  }
}

int KdTree::build(std::size_t begin, std::size_t end, int depth) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({});
  if (end - begin <= kLeafSize) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }
  Vec3 lo = points_[order_[begin]], hi = lo;
  for (std::size_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::size_t a, std::size_t b) { return points_[a][axis] < points_[b][axis]; });
  const double split = points_[order_[mid]][axis];
  const int left = build(begin, mid, depth + 1);
  const int right = build(mid, end, depth + 1);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::knn_visit(int node, const Vec3& q, std::size_t k, std::vector<Neighbor>& heap) const {
  const Node& n = nodes_[node];
  if (n.axis < 0) {
    for (std::size_t i = n.begin; i < n.end; ++i) {
      const Neighbor cand{order_[i], (points_[order_[i]] - q).norm()};
      if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end(), closer);
      } else if (closer(cand, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), closer);
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end(), closer);
      }
    }
    return;
  }
  const double diff = q[n.axis] - n.split;
  const int near = diff < 0.0 ? n.left : n.right;
  const int far = diff < 0.0 ? n.right : n.left;
  knn_visit(near, q, k, heap);
  // Points equal to the split value can sit on either side, hence <=.
  if (heap.size() < k || std::abs(diff) <= heap.front().distance) {
    knn_visit(far, q, k, heap);
  }
}

KdTree::Neighbor KdTree::nearest(const Vec3& query) const {
  if (points_.empty()) {
    throw EmptyMap("KdTree: nearest query on an empty tree");
  }
  return knn(query, 1).front();
}

std::vector<KdTree::Neighbor> KdTree::knn(const Vec3& query, std::size_t k) const {
  std::vector<Neighbor> heap;
  if (points_.empty() || k == 0) {
    return heap;
  }
  heap.reserve(k);
  knn_visit(0, query, k, heap);
  std::sort_heap(heap.begin(), heap.end(), closer);
  return heap;
}

void KdTree::radius_visit(int node, const Vec3& q, double r, std::vector<std::size_t>& out) const {
  const Node& n = nodes_[node];
  if (n.axis < 0) {
    for (std::size_t i = n.begin; i < n.end; ++i) {
      if ((points_[order_[i]] - q).norm() <= r) out.push_back(order_[i]);
    }
    return;
  }
  const double diff = q[n.axis] - n.split;
  if (diff <= r) radius_visit(n.left, q, r, out);
  if (diff >= -r) radius_visit(n.right, q, r, out);
}

std::vector<std::size_t> KdTree::radius_search(const Vec3& query, double radius) const {
  std::vector<std::size_t> out;
  if (!points_.empty() && radius >= 0.0) {
    radius_visit(0, query, radius, out);
    std::sort(out.begin(), out.end());
  }
  return out;
}

}  // namespace confsplat
