#include "se2lio/map.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace se2lio {

uint64_t VoxelCloud::pack(int64_t kx, int64_t ky, int64_t kz) {
  // 21 bits per axis, offset binary: +-2^20 voxels of headroom.
  constexpr int64_t kOffset = 1 << 20;
  constexpr uint64_t kMask = (1 << 21) - 1;
  const uint64_t ux = static_cast<uint64_t>(kx + kOffset) & kMask;
  const uint64_t uy = static_cast<uint64_t>(ky + kOffset) & kMask;
  const uint64_t uz = static_cast<uint64_t>(kz + kOffset) & kMask;
  return (ux << 42) | (uy << 21) | uz;
}

void VoxelCloud::insert(const Vec3& p) {
  const int64_t kx = static_cast<int64_t>(std::floor(p.x() / voxel_));
  const int64_t ky = static_cast<int64_t>(std::floor(p.y() / voxel_));
  const int64_t kz = static_cast<int64_t>(std::floor(p.z() / voxel_));
  const uint64_t key = pack(kx, ky, kz);
  auto it = index_.find(key);
  if (it == index_.end()) {
    index_.emplace(key, static_cast<int>(cells_.size()));
    cells_.push_back({kx, ky, kz, p, 1});
  } else {
    Cell& c = cells_[it->second];
    c.sum += p;
    c.n += 1;
  }
}

void VoxelCloud::prune(const Vec3& center, double radius) {
  const double r2 = radius * radius;
  std::vector<Cell> kept;
  kept.reserve(cells_.size());
  for (const Cell& c : cells_) {
    const Vec3 vc((c.kx + 0.5) * voxel_, (c.ky + 0.5) * voxel_, (c.kz + 0.5) * voxel_);
    if ((vc - center).squaredNorm() <= r2) kept.push_back(c);
  }
  if (kept.size() == cells_.size()) return;
  cells_ = std::move(kept);
  index_.clear();
  for (std::size_t i = 0; i < cells_.size(); ++i)
    index_.emplace(pack(cells_[i].kx, cells_[i].ky, cells_[i].kz), static_cast<int>(i));
}

std::vector<Vec3> VoxelCloud::points() const {
  std::vector<Vec3> out;
  out.reserve(cells_.size());
  for (const Cell& c : cells_) out.push_back(c.sum / static_cast<double>(c.n));
  return out;
}

FeatureMap::FeatureMap(const MapConfig& cfg)
    : cfg_(cfg), edges_(cfg.edge_voxel), planes_(cfg.plane_voxel) {}

void FeatureMap::insert_edges(const std::vector<Vec3>& pts) {
  for (const Vec3& p : pts) edges_.insert(p);
  edge_dirty_ = !pts.empty() || edge_dirty_;
}

void FeatureMap::insert_planars(const std::vector<Vec3>& pts) {
  for (const Vec3& p : pts) planes_.insert(p);
  plane_dirty_ = !pts.empty() || plane_dirty_;
}

void FeatureMap::recenter(const Vec3& center) {
  const std::size_t ne = edges_.size(), np = planes_.size();
  edges_.prune(center, cfg_.window_radius);
  planes_.prune(center, cfg_.window_radius);
  edge_dirty_ = edge_dirty_ || edges_.size() != ne;
  plane_dirty_ = plane_dirty_ || planes_.size() != np;
}

void FeatureMap::prepare() {
  refresh(true);
  refresh(false);
}

void FeatureMap::refresh(bool edges) {
  if (edges && edge_dirty_) {
    edge_snapshot_ = edges_.points();
    edge_tree_.build(edge_snapshot_);
    edge_dirty_ = false;
  }
  if (!edges && plane_dirty_) {
    plane_snapshot_ = planes_.points();
    plane_tree_.build(plane_snapshot_);
    plane_dirty_ = false;
  }
}

std::vector<Vec3> FeatureMap::nearest_edges(const Vec3& q, int k) {
  refresh(true);
  std::vector<Vec3> out;
  for (const auto& h : edge_tree_.knn(q, k, cfg_.max_correspondence_dist))
    out.push_back(edge_snapshot_[h.index]);
  return out;
}

std::vector<Vec3> FeatureMap::nearest_planars(const Vec3& q, int k) {
  refresh(false);
  std::vector<Vec3> out;
  for (const auto& h : plane_tree_.knn(q, k, cfg_.max_correspondence_dist))
    out.push_back(plane_snapshot_[h.index]);
  return out;
}

void write_points_f32(const std::string& path, const std::vector<Vec3>& pts) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_points_f32: cannot open " + path);
  for (const Vec3& p : pts) {
    const float xyz[3] = {static_cast<float>(p.x()), static_cast<float>(p.y()),
                          static_cast<float>(p.z())};
    f.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
  }
}

}  // namespace se2lio
