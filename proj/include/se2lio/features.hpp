#pragma once

// Smoothness-based edge/planar feature extraction.
//
// The smoothness of a point is the mean distance of its ring neighbors to the
// point, normalized by the point's range:
//   sigma = ( sum_l ||p_l - p|| ) / ( |C| * ||p|| )
// with C the 2*half_window neighbors on the same ring (center excluded).
// Flat walls score low, depth discontinuities and corners score high.

#include "se2lio/scan.hpp"

namespace se2lio {

struct FeatureConfig {
  int half_window = 5;
  double sigma_threshold = 0.1;
  int sectors = 6;
  int max_edges_per_sector = 2;
  int max_planars_per_sector = 4;
  int suppression_radius = 5;
  double min_range = 0.1;
  double max_range = 100.0;
};

// ring: one ring's points in acquisition order; n must have a full window
// inside the ring. Throws on a zero-range center point.
double smoothness(const std::vector<ScanPoint>& ring, std::size_t n, int half_window);

// Per ring, per azimuth sector: up to max_edges points with sigma above the
// threshold (largest first) and max_planars below it (smallest first), with
// points within suppression_radius indices of an already selected point of the
// same class skipped. Deterministic for identical input.
FeatureScan extract_features(const RawScan& scan, const FeatureConfig& cfg);

}  // namespace se2lio
