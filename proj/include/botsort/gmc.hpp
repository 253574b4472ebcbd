#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "botsort/affine.hpp"
#include "botsort/image.hpp"

namespace botsort {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// A feature tracked from the previous frame into the current one.
struct Correspondence {
  Point2 prev;
  Point2 cur;

  double dx() const noexcept { return cur.x - prev.x; }
  double dy() const noexcept { return cur.y - prev.y; }
};

struct CornerParams {
  int max_corners = 1000;
  double quality = 0.01;
  double min_dist = 7.0;
};

struct FlowParams {
  int levels = 3;  ///< pyramid levels including full resolution
  int window = 21;
  int max_iters = 30;
  double epsilon = 0.01;
  /// Minimum eigenvalue of the window gradient matrix, per pixel, below which a point
  /// is considered textureless. Intensities are in [0, 1].
  double min_eigen = 1.5e-6;
};

struct OutlierParams {
  int grid = 10;
  double tol = 2.0;
};

struct RansacParams {
  int iters = 200;
  double inlier_tol = 1.5;
  std::uint64_t seed = 0;
};

struct GmcConfig {
  CornerParams corners;
  FlowParams flow;
  OutlierParams outliers;
  RansacParams ransac;
  int downscale = 1;
};

struct GmcResult {
  AffineWarp warp;
  bool fallback = false;  ///< estimation failed and `warp` is the identity
  std::string reason;
};

inline constexpr int kMinImageSide = 32;

/// Shi-Tomasi corners ranked by the smaller eigenvalue of the 3x3-window structure tensor.
std::vector<Point2> detect_corners(const GrayImage& img, const CornerParams& params = {});

/// Pyramidal Lucas-Kanade. Points that are textureless, fail to converge or whose window
/// does not fit inside either image are dropped.
std::vector<Correspondence> track_flow(const GrayImage& prev, const GrayImage& cur,
                                       const std::vector<Point2>& pts, const FlowParams& params = {});

/// Drops correspondences whose displacement differs from the median displacement of
/// their grid cell by more than `tol` in either axis. Cells are taken over the
/// width x height frame, keyed by the previous position.
std::vector<Correspondence> reject_outliers(const std::vector<Correspondence>& c, int width, int height,
                                            const OutlierParams& params = {});

/// Best-consensus affine from 3-point samples, refit by least squares on its inliers.
/// Throws NoMotionError when no non-degenerate model can be formed.
AffineWarp ransac_affine(const std::vector<Correspondence>& c, const RansacParams& params = {});

/// Full frame-to-frame estimation. Never throws on estimation failure: it returns the
/// identity with `fallback` set instead.
GmcResult estimate(const GrayImage& prev, const GrayImage& cur, const GmcConfig& cfg = {});

/// Estimates the warps for pairs (k-1, k), k = 1..count-1, on `threads` workers.
/// `load(k)` must be safe to call concurrently. Entry 0 of the result is the identity.
std::vector<GmcResult> estimate_sequence(std::size_t count, const std::function<GrayImage(std::size_t)>& load,
                                         const GmcConfig& cfg, unsigned threads = 1);

/// Warps keyed by 1-based frame; frames absent from the map have no camera motion.
using WarpMap = std::map<int, AffineWarp>;

/// Text format: one "frame a11 a12 a13 a21 a22 a23" line per frame.
WarpMap load_warps(const std::filesystem::path& path);
void save_warps(const std::filesystem::path& path, const WarpMap& warps);
AffineWarp warp_for(const WarpMap& warps, int frame);

}  // namespace botsort
