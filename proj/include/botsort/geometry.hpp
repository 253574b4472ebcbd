#pragma once

namespace botsort {

/// Axis-aligned box in pixels, stored top-left/width/height (MOTChallenge layout).
struct BBox {
  double x = 0.0;  ///< left
  double y = 0.0;  ///< top
  double w = 0.0;
  double h = 0.0;

  bool valid() const noexcept;
  /// Throws InvalidBoxError unless all fields are finite and the extent is positive.
  void validate() const;

  double right() const noexcept { return x + w; }
  double bottom() const noexcept { return y + h; }
  double area() const noexcept { return w * h; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Center form (x_c, y_c, w, h) used by the Kalman state.
struct CenterBox {
  double xc = 0.0;
  double yc = 0.0;
  double w = 0.0;
  double h = 0.0;

  friend bool operator==(const CenterBox&, const CenterBox&) = default;
};

CenterBox to_center(const BBox& b);
BBox from_center(const CenterBox& c);

/// Intersection over union. Boxes touching along an edge have IoU 0.
double iou(const BBox& a, const BBox& b);

}  // namespace botsort
