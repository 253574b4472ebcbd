#include "botsort/affine.hpp"

#include <cmath>
#include <string>

#include "botsort/error.hpp"

namespace botsort {

bool AffineWarp::finite() const noexcept {
  return std::isfinite(a11) && std::isfinite(a12) && std::isfinite(a13) && std::isfinite(a21) &&
         std::isfinite(a22) && std::isfinite(a23);
}

bool AffineWarp::valid() const noexcept { return finite() && std::abs(det()) > kMinWarpDeterminant; }

void AffineWarp::validate() const {
  if (!finite()) throw DegenerateWarpError("affine warp has non-finite entries");
  if (std::abs(det()) <= kMinWarpDeterminant) {
    throw DegenerateWarpError("affine warp is degenerate (det M = " + std::to_string(det()) + ")");
  }
}

AffineWarp AffineWarp::after(const AffineWarp& first) const noexcept {
  const AffineWarp& b = *this;
  const AffineWarp& a = first;
  return {b.a11 * a.a11 + b.a12 * a.a21, b.a11 * a.a12 + b.a12 * a.a22, b.a11 * a.a13 + b.a12 * a.a23 + b.a13,
          b.a21 * a.a11 + b.a22 * a.a21, b.a21 * a.a12 + b.a22 * a.a22, b.a21 * a.a13 + b.a22 * a.a23 + b.a23};
}

}  // namespace botsort
