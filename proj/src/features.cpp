#include "se2lio/features.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace se2lio {

std::vector<std::pair<std::size_t, std::size_t>> RawScan::ring_ranges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= points.size(); ++i) {
    if (i == points.size() || points[i].ring != points[begin].ring) {
      out.emplace_back(begin, i);
      begin = i;
    }
  }
  return out;
}

double smoothness(const std::vector<ScanPoint>& ring, std::size_t n, int half_window) {
  const std::size_t w = static_cast<std::size_t>(half_window);
  if (n < w || n + w >= ring.size())
    throw std::invalid_argument("smoothness: window leaves the ring");
  const Vec3& p = ring[n].p;
  const double range = p.norm();
  if (range <= 0.0) throw std::invalid_argument("smoothness: zero-range point");
  double sum = 0.0;
  for (std::size_t l = n - w; l <= n + w; ++l) {
    if (l == n) continue;
    sum += (ring[l].p - p).norm();
  }
  return sum / (2.0 * static_cast<double>(half_window) * range);
}

namespace {

struct Candidate {
  std::size_t idx;  // index within the ring
  double sigma;
};

// Greedy pick of up to max_count candidates, skipping anything within
// suppression_radius of an earlier pick of the same class.
void pick(const std::vector<Candidate>& sorted, int max_count, int radius,
          std::vector<char>& suppressed, std::vector<std::size_t>& out) {
  int taken = 0;
  for (const Candidate& c : sorted) {
    if (taken >= max_count) break;
    if (suppressed[c.idx]) continue;
    out.push_back(c.idx);
    ++taken;
    const std::size_t lo = c.idx >= static_cast<std::size_t>(radius) ? c.idx - radius : 0;
    const std::size_t hi = std::min(suppressed.size() - 1, c.idx + radius);
    for (std::size_t k = lo; k <= hi; ++k) suppressed[k] = 1;
  }
}

}  // namespace

FeatureScan extract_features(const RawScan& scan, const FeatureConfig& cfg) {
  FeatureScan out;
  out.stamp = scan.stamp;

  std::vector<ScanPoint> ring;
  for (const auto& [begin, end] : scan.ring_ranges()) {
    ring.assign(scan.points.begin() + begin, scan.points.begin() + end);
    const std::size_t n = ring.size();
    const std::size_t w = static_cast<std::size_t>(cfg.half_window);
    if (n < 2 * w + 1) continue;

    std::vector<double> sigma(n, -1.0);  // -1 marks unusable points
    for (std::size_t i = w; i + w < n; ++i) {
      const double range = ring[i].p.norm();
      if (range < cfg.min_range || range > cfg.max_range) continue;
      sigma[i] = smoothness(ring, i, cfg.half_window);
    }

    // Suppression masks span the whole ring so a pick near a sector boundary
    // also shadows its neighbors on the far side.
    std::vector<char> edge_suppressed(n, 0), plane_suppressed(n, 0);

    // Equal index sectors over the ring; candidate lists sorted by sigma with
    // ring index as the tiebreak so extraction is order-deterministic.
    for (int s = 0; s < cfg.sectors; ++s) {
      const std::size_t lo = n * static_cast<std::size_t>(s) / cfg.sectors;
      const std::size_t hi = n * (static_cast<std::size_t>(s) + 1) / cfg.sectors;
      std::vector<Candidate> edge_cand, plane_cand;
      for (std::size_t i = std::max(lo, w); i < std::min(hi, n - w); ++i) {
        if (sigma[i] < 0.0) continue;
        if (sigma[i] > cfg.sigma_threshold)
          edge_cand.push_back({i, sigma[i]});
        else if (sigma[i] < cfg.sigma_threshold)
          plane_cand.push_back({i, sigma[i]});
      }
      std::sort(edge_cand.begin(), edge_cand.end(), [](const Candidate& a, const Candidate& b) {
        return a.sigma != b.sigma ? a.sigma > b.sigma : a.idx < b.idx;
      });
      std::sort(plane_cand.begin(), plane_cand.end(), [](const Candidate& a, const Candidate& b) {
        return a.sigma != b.sigma ? a.sigma < b.sigma : a.idx < b.idx;
      });

      std::vector<std::size_t> picked_edges, picked_planars;
      pick(edge_cand, cfg.max_edges_per_sector, cfg.suppression_radius, edge_suppressed,
           picked_edges);
      pick(plane_cand, cfg.max_planars_per_sector, cfg.suppression_radius, plane_suppressed,
           picked_planars);
      std::sort(picked_edges.begin(), picked_edges.end());
      std::sort(picked_planars.begin(), picked_planars.end());
      for (std::size_t i : picked_edges) out.edges.push_back(ring[i]);
      for (std::size_t i : picked_planars) out.planars.push_back(ring[i]);
    }
  }
  return out;
}

}  // namespace se2lio
