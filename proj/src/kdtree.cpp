#include "se2lio/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace se2lio {

void KdTree3::build(const std::vector<Vec3>& points) {
  pts_ = points;
  nodes_.clear();
  order_.resize(pts_.size());
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(pts_.empty() ? 1 : 2 * pts_.size() / kLeafSize + 2);
  root_ = pts_.empty() ? -1 : build_node(0, static_cast<int>(pts_.size()));
}

int KdTree3::build_node(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({});
  if (end - begin <= kLeafSize) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }

  Vec3 lo = pts_[order_[begin]], hi = lo;
  for (int i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(pts_[order_[i]]);
    hi = hi.cwiseMax(pts_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);

  const int mid = begin + (end - begin) / 2;
  // Index is the tiebreak so the partition is deterministic for duplicates.
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) {
                     const double ca = pts_[a][axis], cb = pts_[b][axis];
                     return ca != cb ? ca < cb : a < b;
                   });

  nodes_[id].axis = axis;
  nodes_[id].split = pts_[order_[mid]][axis];
  const int left = build_node(begin, mid);
  const int right = build_node(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<KdTree3::Hit> KdTree3::knn(const Vec3& q, int k, double max_dist) const {
  std::vector<Hit> hits;
  if (root_ < 0 || k <= 0) return hits;
  hits.reserve(k + 1);
  double worst = max_dist * max_dist;
  search(root_, q, k, worst, hits);
  return hits;
}

void KdTree3::search(int node, const Vec3& q, int k, double& worst,
                     std::vector<Hit>& heap) const {
  const Node& nd = nodes_[node];
  if (nd.axis < 0) {
    for (int i = nd.begin; i < nd.end; ++i) {
      const int idx = order_[i];
      const double d2 = (pts_[idx] - q).squaredNorm();
      if (d2 > worst) continue;
      const Hit h{d2, idx};
      if (static_cast<int>(heap.size()) == k) {
        const Hit& back = heap.back();
        if (d2 > back.dist2 || (d2 == back.dist2 && idx > back.index)) continue;
      }
      auto pos = std::upper_bound(heap.begin(), heap.end(), h, [](const Hit& a, const Hit& b) {
        return a.dist2 != b.dist2 ? a.dist2 < b.dist2 : a.index < b.index;
      });
      heap.insert(pos, h);
      if (static_cast<int>(heap.size()) > k) heap.pop_back();
      if (static_cast<int>(heap.size()) == k) worst = heap.back().dist2;
    }
    return;
  }

  const double delta = q[nd.axis] - nd.split;
  const int near = delta < 0.0 ? nd.left : nd.right;
  const int far = delta < 0.0 ? nd.right : nd.left;
  search(near, q, k, worst, heap);
  // Equality must recurse: a boundary point at exactly the worst distance can
  // still displace a larger-index hit.
  if (delta * delta <= worst) search(far, q, k, worst, heap);
}

}  // namespace se2lio
