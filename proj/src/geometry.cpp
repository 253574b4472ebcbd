#include "botsort/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "botsort/error.hpp"

namespace botsort {

bool BBox::valid() const noexcept {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h) && w > 0.0 &&
         h > 0.0;
}

void BBox::validate() const {
  if (!valid()) {
    throw InvalidBoxError("invalid box (" + std::to_string(x) + ", " + std::to_string(y) + ", " +
                          std::to_string(w) + ", " + std::to_string(h) + ")");
  }
}

CenterBox to_center(const BBox& b) {
  b.validate();
  return {b.x + b.w / 2.0, b.y + b.h / 2.0, b.w, b.h};
}

BBox from_center(const CenterBox& c) {
  BBox b{c.xc - c.w / 2.0, c.yc - c.h / 2.0, c.w, c.h};
  b.validate();
  return b;
}

double iou(const BBox& a, const BBox& b) {
  a.validate();
  b.validate();
  const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  // Areas from edge differences so iou(b, b) is exactly 1.
  const double area_a = (a.right() - a.x) * (a.bottom() - a.y);
  const double area_b = (b.right() - b.x) * (b.bottom() - b.y);
  const double inter = iw * ih;
  const double uni = area_a + area_b - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace botsort
