#pragma once

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "botsort/geometry.hpp"

namespace botsort {

struct EvalObject {
  int id = 0;
  BBox box;
};

/// Ground truth and predictions of one frame.
struct EvalFrame {
  int frame = 0;
  std::vector<EvalObject> gt;
  std::vector<EvalObject> pred;
};

struct FrameCounts {
  int frame = 0;
  long long fp = 0;
  long long fn = 0;
  long long idsw = 0;
  long long num_gt = 0;
  long long matches = 0;
};

/// gt id -> pred id it was last matched to.
using MatchMap = std::map<int, int>;

struct FrameMatch {
  MatchMap last_matches;
  std::vector<std::pair<int, int>> matches;  ///< (gt id, pred id)
  FrameCounts counts;
};

inline constexpr double kDefaultEvalIou = 0.5;

/// CLEAR-MOT matching of one frame. Pairings from `prev` are kept while their IoU stays
/// at or above `iou_thresh`; remaining objects are matched by minimum total 1 - IoU among
/// pairs passing the gate. A gt matched to a different pred than last time is a switch.
FrameMatch match_frame(const MatchMap& prev, const EvalFrame& frame, double iou_thresh = kDefaultEvalIou);

/// match_frame over a whole sequence, frames in the given order.
std::vector<FrameCounts> evaluate_clear(std::span<const EvalFrame> frames, double iou_thresh = kDefaultEvalIou);

/// 1 - (FP + FN + IDSW) / GT. Throws UndefinedMetricError when there is no ground truth.
double mota(std::span<const FrameCounts> counts);

struct SeriesPoint {
  int frame = 0;
  std::optional<double> value;  ///< empty while no ground truth has been seen
};

/// MOTA accumulated from the first frame up to each frame. The last value equals mota().
std::vector<SeriesPoint> cmota_series(std::span<const FrameCounts> counts);

/// id -> frame -> box.
using Trajectories = std::map<int, std::map<int, BBox>>;

struct IdScores {
  long long idtp = 0;
  long long idfp = 0;
  long long idfn = 0;
  double idf1 = 0.0;
};

/// Identity scores under the one-to-one trajectory matching that maximizes IDTP, where a
/// (gt, pred) pair scores one per shared frame with IoU >= iou_thresh.
IdScores id_scores(const Trajectories& gt, const Trajectories& pred, double iou_thresh = kDefaultEvalIou);
double idf1(const Trajectories& gt, const Trajectories& pred, double iou_thresh = kDefaultEvalIou);

/// IDF1 accumulated from the first frame up to each frame.
std::vector<SeriesPoint> idf1_series(std::span<const EvalFrame> frames, double iou_thresh = kDefaultEvalIou);

Trajectories gt_trajectories(std::span<const EvalFrame> frames);
Trajectories pred_trajectories(std::span<const EvalFrame> frames);

}  // namespace botsort
