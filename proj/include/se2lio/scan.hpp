#pragma once

#include <cstdint>
#include <vector>

#include "se2lio/lie.hpp"

namespace se2lio {

struct ScanPoint {
  Vec3 p = Vec3::Zero();
  float intensity = 0.0f;
  uint16_t ring = 0;
  float rel_time = 0.0f;  // fraction of the sweep period, [0, 1)
};

// One sweep. Points are stored ring-major; within a ring they are ordered by
// acquisition time. stamp is the sweep-end time in seconds.
struct RawScan {
  double stamp = 0.0;
  std::vector<ScanPoint> points;

  // Index ranges of each ring, in storage order.
  std::vector<std::pair<std::size_t, std::size_t>> ring_ranges() const;
};

struct FeatureScan {
  double stamp = 0.0;
  std::vector<ScanPoint> edges;
  std::vector<ScanPoint> planars;
};

}  // namespace se2lio
