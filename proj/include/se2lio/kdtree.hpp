#pragma once

// Exact 3-D k-d tree. Ties on distance break toward the smaller point index,
// so queries are fully deterministic.

#include <cstddef>
#include <vector>

#include "se2lio/lie.hpp"

namespace se2lio {

class KdTree3 {
 public:
  KdTree3() = default;

  void build(const std::vector<Vec3>& points);

  bool empty() const { return pts_.empty(); }
  std::size_t size() const { return pts_.size(); }

  struct Hit {
    double dist2;
    int index;  // index into the build-time point array
  };

  // k nearest neighbors within max_dist of q, nearest first; fewer than k hits
  // if the ball holds fewer points.
  std::vector<Hit> knn(const Vec3& q, int k, double max_dist) const;

 private:
  struct Node {
    int axis = -1;        // -1 marks a leaf
    double split = 0.0;
    int left = -1, right = -1;
    int begin = 0, end = 0;  // leaf range in order_
  };

  int build_node(int begin, int end);
  void search(int node, const Vec3& q, int k, double& worst, std::vector<Hit>& heap) const;

  std::vector<Vec3> pts_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
  static constexpr int kLeafSize = 16;
};

}  // namespace se2lio
