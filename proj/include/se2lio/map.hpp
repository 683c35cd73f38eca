#pragma once

// World-frame feature map: one voxel-centroid store per feature class with an
// exact k-d tree over the retained points.
//
// A voxel retains the running centroid of everything inserted into it, so the
// map density is bounded by the voxel size. Cells keep their insertion order;
// together with the deterministic k-d tree this makes queries and exports
// reproducible run to run.

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "se2lio/kdtree.hpp"

namespace se2lio {

class VoxelCloud {
 public:
  explicit VoxelCloud(double voxel_size = 0.5) : voxel_(voxel_size) {}

  void insert(const Vec3& p);
  // Drops cells whose voxel center lies farther than radius from center.
  void prune(const Vec3& center, double radius);

  std::size_t size() const { return cells_.size(); }
  double voxel_size() const { return voxel_; }

  // One centroid per cell, insertion order.
  std::vector<Vec3> points() const;

 private:
  struct Cell {
    int64_t kx, ky, kz;
    Vec3 sum;
    int n;
  };

  static uint64_t pack(int64_t kx, int64_t ky, int64_t kz);

  double voxel_;
  std::vector<Cell> cells_;
  std::unordered_map<uint64_t, int> index_;
};

struct MapConfig {
  double edge_voxel = 0.4;
  double plane_voxel = 0.8;
  double window_radius = 100.0;
  double max_correspondence_dist = 1.0;
};

class FeatureMap {
 public:
  explicit FeatureMap(const MapConfig& cfg = {});

  void insert_edges(const std::vector<Vec3>& pts);
  void insert_planars(const std::vector<Vec3>& pts);
  // Keeps only map content within the configured window of the given center.
  void recenter(const Vec3& center);

  std::size_t edge_count() const { return edges_.size(); }
  std::size_t planar_count() const { return planes_.size(); }

  // k nearest retained points within max_correspondence_dist of q.
  std::vector<Vec3> nearest_edges(const Vec3& q, int k);
  std::vector<Vec3> nearest_planars(const Vec3& q, int k);

  // Rebuilds both trees if stale. After prepare(), the tree/snapshot accessors
  // below are safe for concurrent read-only use.
  void prepare();
  const KdTree3& edge_tree() const { return edge_tree_; }
  const KdTree3& plane_tree() const { return plane_tree_; }
  const std::vector<Vec3>& edge_snapshot() const { return edge_snapshot_; }
  const std::vector<Vec3>& plane_snapshot() const { return plane_snapshot_; }

  std::vector<Vec3> edge_points() const { return edges_.points(); }
  std::vector<Vec3> planar_points() const { return planes_.points(); }

  const MapConfig& config() const { return cfg_; }

 private:
  void refresh(bool edges);

  MapConfig cfg_;
  VoxelCloud edges_, planes_;
  KdTree3 edge_tree_, plane_tree_;
  std::vector<Vec3> edge_snapshot_, plane_snapshot_;
  bool edge_dirty_ = true, plane_dirty_ = true;
};

// Raw little-endian float32 triplets, insertion order.
void write_points_f32(const std::string& path, const std::vector<Vec3>& pts);

}  // namespace se2lio
