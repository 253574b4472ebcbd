#include "botsort/association.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "botsort/error.hpp"
#include "botsort/lap.hpp"

namespace botsort {

namespace {

constexpr double kUnitTolerance = 1e-6;

void require_unit(const Embedding& e) {
  double sq = 0.0;
  for (double v : e) sq += v * v;
  if (!std::isfinite(sq) || std::abs(std::sqrt(sq) - 1.0) > kUnitTolerance) {
    throw InvalidArgumentError("embedding is not unit-norm (|e| = " + std::to_string(std::sqrt(sq)) + ")");
  }
}

void require_same_shape(const CostMatrix& a, const CostMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeMismatchError("cost matrices differ in shape: " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                             std::to_string(b.cols()));
  }
}

}  // namespace

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

void CostMatrix::validate() const {
  for (double v : data_) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw InvalidArgumentError("cost entry " + std::to_string(v) + " outside [0, 1]");
    }
  }
}

void FusionParams::validate() const {
  auto open_unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!open_unit(theta_iou) || !open_unit(theta_emb) || !open_unit(lambda)) {
    throw InvalidArgumentError("fusion thresholds must lie in (0, 1)");
  }
}

CostMatrix iou_cost(std::span<const BBox> tracks, std::span<const BBox> dets) {
  CostMatrix c(tracks.size(), dets.size());
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    for (std::size_t j = 0; j < dets.size(); ++j) c(i, j) = 1.0 - iou(tracks[i], dets[j]);
  }
  return c;
}

double cosine_distance(const Embedding& e, const Embedding& f) {
  if (e.size() != f.size() || e.empty()) {
    throw ShapeMismatchError("embedding dimensions differ: " + std::to_string(e.size()) + " vs " +
                             std::to_string(f.size()));
  }
  require_unit(e);
  require_unit(f);
  double dot = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k) dot += e[k] * f[k];
  return std::clamp((1.0 - dot) / 2.0, 0.0, 1.0);
}

CostMatrix cosine_cost(std::span<const Embedding> tracks, std::span<const Embedding> dets) {
  CostMatrix c(tracks.size(), dets.size());
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    for (std::size_t j = 0; j < dets.size(); ++j) c(i, j) = cosine_distance(tracks[i], dets[j]);
  }
  return c;
}

CostMatrix fuse(const CostMatrix& d_iou, const CostMatrix& d_cos, const FusionParams& p) {
  require_same_shape(d_iou, d_cos);
  p.validate();
  CostMatrix c(d_iou.rows(), d_iou.cols());
  for (std::size_t i = 0; i < c.rows(); ++i) {
    for (std::size_t j = 0; j < c.cols(); ++j) {
      const double iou_d = d_iou(i, j);
      const double cos_d = d_cos(i, j);
      const double gated = (cos_d < p.theta_emb && iou_d < p.theta_iou) ? 0.5 * cos_d : 1.0;
      c(i, j) = std::min(iou_d, gated);
    }
  }
  return c;
}

CostMatrix weighted_sum(const CostMatrix& d_cos, const CostMatrix& d_iou, double lambda) {
  require_same_shape(d_cos, d_iou);
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgumentError("lambda must lie in [0, 1]");
  CostMatrix c(d_cos.rows(), d_cos.cols());
  for (std::size_t i = 0; i < c.rows(); ++i) {
    for (std::size_t j = 0; j < c.cols(); ++j) c(i, j) = lambda * d_cos(i, j) + (1.0 - lambda) * d_iou(i, j);
  }
  return c;
}

Assignment solve_assignment(const CostMatrix& c, double max_cost) {
  c.validate();
  Assignment out;
  const std::vector<int> row_to_col = min_cost_assignment(c.data(), c.rows(), c.cols());
  std::vector<bool> det_used(c.cols(), false);
  for (std::size_t r = 0; r < c.rows(); ++r) {
    const int col = row_to_col[r];
    if (col >= 0 && c(r, static_cast<std::size_t>(col)) <= max_cost) {
      out.matches.emplace_back(r, static_cast<std::size_t>(col));
      det_used[static_cast<std::size_t>(col)] = true;
    } else {
      out.unmatched_tracks.push_back(r);
    }
  }
  for (std::size_t j = 0; j < c.cols(); ++j) {
    if (!det_used[j]) out.unmatched_dets.push_back(j);
  }
  return out;
}

}  // namespace botsort
