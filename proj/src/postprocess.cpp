#include "botsort/postprocess.hpp"

#include "botsort/error.hpp"

namespace botsort {

void TrackletSeries::validate() const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    entries[i].box.validate();
    if (i > 0 && entries[i].frame <= entries[i - 1].frame) {
      throw InvalidArgumentError("tracklet " + std::to_string(id) + ": frames not strictly increasing");
    }
  }
}

TrackletSeries interpolate(const TrackletSeries& series, int max_gap) {
  if (max_gap < 1) throw InvalidArgumentError("max_gap must be >= 1");
  series.validate();
  TrackletSeries out{series.id, {}};
  out.entries.reserve(series.entries.size());
  for (std::size_t i = 0; i < series.entries.size(); ++i) {
    const TrackletEntry& cur = series.entries[i];
    if (i > 0) {
      const TrackletEntry& prev = series.entries[i - 1];
      const int gap = cur.frame - prev.frame;
      if (gap > 1 && gap <= max_gap) {
        for (int f = prev.frame + 1; f < cur.frame; ++f) {
          const double t = static_cast<double>(f - prev.frame) / gap;
          auto lerp = [t](double a, double b) { return a + (b - a) * t; };
          out.entries.push_back({f,
                                 {lerp(prev.box.x, cur.box.x), lerp(prev.box.y, cur.box.y),
                                  lerp(prev.box.w, cur.box.w), lerp(prev.box.h, cur.box.h)},
                                 lerp(prev.score, cur.score)});
        }
      }
    }
    out.entries.push_back(cur);
  }
  return out;
}

}  // namespace botsort
