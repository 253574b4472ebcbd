#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "botsort/geometry.hpp"

namespace botsort {

using Embedding = std::vector<double>;

/// Dense tracks x detections distance matrix. Association costs live in [0, 1],
/// where 1 means "cannot match".
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }

  std::span<const double> data() const noexcept { return data_; }

  /// Throws InvalidArgumentError unless every entry is finite and in [0, 1].
  void validate() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct FusionParams {
  double theta_iou = 0.5;  ///< proximity gate on the IoU distance
  double theta_emb = 0.2;  ///< appearance gate on the cosine distance
  double lambda = 0.98;    ///< appearance weight, weighted-sum mode only

  void validate() const;
};

struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> matches;  ///< (track, detection), by track
  std::vector<std::size_t> unmatched_tracks;
  std::vector<std::size_t> unmatched_dets;
};

/// 1 - IoU for every (track, detection) pair.
CostMatrix iou_cost(std::span<const BBox> tracks, std::span<const BBox> dets);

/// Cosine distance mapped into [0, 1]: (1 - e.f) / 2. Inputs must be unit vectors of
/// equal dimension.
double cosine_distance(const Embedding& e, const Embedding& f);
CostMatrix cosine_cost(std::span<const Embedding> tracks, std::span<const Embedding> dets);

/// Gated IoU/appearance fusion. Appearance only counts for pairs that are both close
/// (d_iou < theta_iou) and similar (d_cos < theta_emb), at half weight; everything else
/// falls back to the IoU distance.
CostMatrix fuse(const CostMatrix& d_iou, const CostMatrix& d_cos, const FusionParams& p);

/// lambda * d_cos + (1 - lambda) * d_iou.
CostMatrix weighted_sum(const CostMatrix& d_cos, const CostMatrix& d_iou, double lambda);

/// Minimum total cost one-to-one assignment; pairs costing more than `max_cost` are
/// then returned as unmatched.
Assignment solve_assignment(const CostMatrix& c, double max_cost);

}  // namespace botsort
