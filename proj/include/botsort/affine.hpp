#pragma once

#include <array>

namespace botsort {

/// Frame-to-frame camera motion [M | T] as a 2x3 matrix, row-major:
/// x' = a11 x + a12 y + a13,  y' = a21 x + a22 y + a23.
struct AffineWarp {
  double a11 = 1.0, a12 = 0.0, a13 = 0.0;
  double a21 = 0.0, a22 = 1.0, a23 = 0.0;

  static AffineWarp identity() { return {}; }
  static AffineWarp translation(double tx, double ty) { return {1.0, 0.0, tx, 0.0, 1.0, ty}; }

  double det() const noexcept { return a11 * a22 - a12 * a21; }
  bool finite() const noexcept;
  /// Finite with |det M| above the degeneracy threshold.
  bool valid() const noexcept;
  /// Throws DegenerateWarpError when !valid().
  void validate() const;

  std::array<double, 2> apply(double x, double y) const noexcept {
    return {a11 * x + a12 * y + a13, a21 * x + a22 * y + a23};
  }

  /// The warp equivalent to applying `first` and then `*this`.
  AffineWarp after(const AffineWarp& first) const noexcept;

  friend bool operator==(const AffineWarp&, const AffineWarp&) = default;
};

inline constexpr double kMinWarpDeterminant = 1e-6;

}  // namespace botsort
