#pragma once

#include <vector>

#include "botsort/geometry.hpp"

namespace botsort {

struct TrackletEntry {
  int frame = 0;
  BBox box;
  double score = 0.0;

  friend bool operator==(const TrackletEntry&, const TrackletEntry&) = default;
};

/// One identity's boxes, frames strictly increasing.
struct TrackletSeries {
  int id = 0;
  std::vector<TrackletEntry> entries;

  void validate() const;
};

inline constexpr int kDefaultMaxGap = 20;

/// Fills every gap of at most `max_gap` frames (f2 - f1 <= max_gap) by linear
/// interpolation of box coordinates and score. Existing entries are left untouched.
TrackletSeries interpolate(const TrackletSeries& series, int max_gap = kDefaultMaxGap);

}  // namespace botsort
