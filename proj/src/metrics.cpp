#include "botsort/metrics.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "botsort/error.hpp"
#include "botsort/lap.hpp"

namespace botsort {

namespace {

void require_unique_ids(const std::vector<EvalObject>& objs, int frame, const char* what) {
  std::set<int> seen;
  for (const EvalObject& o : objs) {
    if (!seen.insert(o.id).second) {
      throw InvalidArgumentError(std::string("duplicate ") + what + " id " + std::to_string(o.id) + " in frame " +
                                 std::to_string(frame));
    }
  }
}

// Larger than any achievable sum of admissible (<= 1) costs, so the solver first
// maximizes the number of admissible pairs.
constexpr double kForbiddenCost = 1e9;

}  // namespace

FrameMatch match_frame(const MatchMap& prev, const EvalFrame& frame, double iou_thresh) {
  if (!(iou_thresh > 0.0 && iou_thresh < 1.0)) throw InvalidArgumentError("IoU threshold must lie in (0, 1)");
  require_unique_ids(frame.gt, frame.frame, "ground-truth");
  require_unique_ids(frame.pred, frame.frame, "prediction");

  const std::size_t ng = frame.gt.size();
  const std::size_t np = frame.pred.size();
  std::vector<double> overlap(ng * np);
  for (std::size_t g = 0; g < ng; ++g) {
    for (std::size_t p = 0; p < np; ++p) overlap[g * np + p] = iou(frame.gt[g].box, frame.pred[p].box);
  }

  std::vector<int> gt_to_pred(ng, -1);
  std::vector<bool> pred_used(np, false);
  for (std::size_t g = 0; g < ng; ++g) {
    const auto it = prev.find(frame.gt[g].id);
    if (it == prev.end()) continue;
    for (std::size_t p = 0; p < np; ++p) {
      if (frame.pred[p].id == it->second && !pred_used[p] && overlap[g * np + p] >= iou_thresh) {
        gt_to_pred[g] = static_cast<int>(p);
        pred_used[p] = true;
        break;
      }
    }
  }

  std::vector<std::size_t> free_gt, free_pred;
  for (std::size_t g = 0; g < ng; ++g) {
    if (gt_to_pred[g] < 0) free_gt.push_back(g);
  }
  for (std::size_t p = 0; p < np; ++p) {
    if (!pred_used[p]) free_pred.push_back(p);
  }
  std::vector<double> cost(free_gt.size() * free_pred.size());
  for (std::size_t r = 0; r < free_gt.size(); ++r) {
    for (std::size_t c = 0; c < free_pred.size(); ++c) {
      const double o = overlap[free_gt[r] * np + free_pred[c]];
      cost[r * free_pred.size() + c] = o >= iou_thresh ? 1.0 - o : kForbiddenCost;
    }
  }
  const std::vector<int> assigned = min_cost_assignment(cost, free_gt.size(), free_pred.size());
  for (std::size_t r = 0; r < free_gt.size(); ++r) {
    if (assigned[r] < 0) continue;
    const std::size_t g = free_gt[r];
    const std::size_t p = free_pred[static_cast<std::size_t>(assigned[r])];
    if (overlap[g * np + p] >= iou_thresh) gt_to_pred[g] = static_cast<int>(p);
  }

  FrameMatch out;
  out.last_matches = prev;
  out.counts.frame = frame.frame;
  out.counts.num_gt = static_cast<long long>(ng);
  for (std::size_t g = 0; g < ng; ++g) {
    if (gt_to_pred[g] < 0) continue;
    const int gid = frame.gt[g].id;
    const int pid = frame.pred[static_cast<std::size_t>(gt_to_pred[g])].id;
    out.matches.emplace_back(gid, pid);
    const auto it = prev.find(gid);
    if (it != prev.end() && it->second != pid) ++out.counts.idsw;
    out.last_matches[gid] = pid;
  }
  out.counts.matches = static_cast<long long>(out.matches.size());
  out.counts.fn = out.counts.num_gt - out.counts.matches;
  out.counts.fp = static_cast<long long>(np) - out.counts.matches;
  return out;
}

std::vector<FrameCounts> evaluate_clear(std::span<const EvalFrame> frames, double iou_thresh) {
  std::vector<FrameCounts> out;
  out.reserve(frames.size());
  MatchMap state;
  for (const EvalFrame& f : frames) {
    FrameMatch m = match_frame(state, f, iou_thresh);
    state = std::move(m.last_matches);
    out.push_back(m.counts);
  }
  return out;
}

namespace {

double mota_from(long long errors, long long num_gt) {
  return 1.0 - static_cast<double>(errors) / static_cast<double>(num_gt);
}

}  // namespace

double mota(std::span<const FrameCounts> counts) {
  long long errors = 0, num_gt = 0;
  for (const FrameCounts& c : counts) {
    errors += c.fp + c.fn + c.idsw;
    num_gt += c.num_gt;
  }
  if (num_gt <= 0) throw UndefinedMetricError("MOTA is undefined without ground truth");
  return mota_from(errors, num_gt);
}

std::vector<SeriesPoint> cmota_series(std::span<const FrameCounts> counts) {
  std::vector<SeriesPoint> out;
  out.reserve(counts.size());
  long long errors = 0, num_gt = 0;
  for (const FrameCounts& c : counts) {
    errors += c.fp + c.fn + c.idsw;
    num_gt += c.num_gt;
    SeriesPoint pt{c.frame, std::nullopt};
    if (num_gt > 0) pt.value = mota_from(errors, num_gt);
    out.push_back(pt);
  }
  return out;
}

namespace {

// Shared-frame hit counts between trajectories plus detection totals.
struct IdTally {
  std::map<int, std::size_t> gt_index, pred_index;
  std::vector<std::vector<long long>> hits;  // [gt][pred]
  long long gt_total = 0;
  long long pred_total = 0;

  std::size_t gt_slot(int id) {
    auto [it, inserted] = gt_index.emplace(id, gt_index.size());
    if (inserted) hits.emplace_back(pred_index.size(), 0);
    return it->second;
  }
  std::size_t pred_slot(int id) {
    auto [it, inserted] = pred_index.emplace(id, pred_index.size());
    if (inserted) {
      for (auto& row : hits) row.push_back(0);
    }
    return it->second;
  }

  IdScores solve() const {
    if (gt_total <= 0) throw UndefinedMetricError("IDF1 is undefined without ground truth");
    const std::size_t rows = hits.size();
    const std::size_t cols = pred_index.size();
    std::vector<double> cost(rows * cols);
    for (std::size_t g = 0; g < rows; ++g) {
      for (std::size_t p = 0; p < cols; ++p) cost[g * cols + p] = -static_cast<double>(hits[g][p]);
    }
    const std::vector<int> assigned = min_cost_assignment(cost, rows, cols);
    IdScores s;
    for (std::size_t g = 0; g < rows; ++g) {
      if (assigned[g] >= 0) s.idtp += hits[g][static_cast<std::size_t>(assigned[g])];
    }
    s.idfn = gt_total - s.idtp;
    s.idfp = pred_total - s.idtp;
    s.idf1 = 2.0 * static_cast<double>(s.idtp) / static_cast<double>(gt_total + pred_total);
    return s;
  }
};

}  // namespace

IdScores id_scores(const Trajectories& gt, const Trajectories& pred, double iou_thresh) {
  if (!(iou_thresh > 0.0 && iou_thresh < 1.0)) throw InvalidArgumentError("IoU threshold must lie in (0, 1)");
  IdTally tally;
  for (const auto& [pid, boxes] : pred) {
    tally.pred_slot(pid);
    tally.pred_total += static_cast<long long>(boxes.size());
  }
  for (const auto& [gid, gboxes] : gt) {
    const std::size_t g = tally.gt_slot(gid);
    tally.gt_total += static_cast<long long>(gboxes.size());
    for (const auto& [pid, pboxes] : pred) {
      const std::size_t p = tally.pred_index.at(pid);
      for (const auto& [frame, gbox] : gboxes) {
        const auto it = pboxes.find(frame);
        if (it != pboxes.end() && iou(gbox, it->second) >= iou_thresh) ++tally.hits[g][p];
      }
    }
  }
  return tally.solve();
}

double idf1(const Trajectories& gt, const Trajectories& pred, double iou_thresh) {
  return id_scores(gt, pred, iou_thresh).idf1;
}

std::vector<SeriesPoint> idf1_series(std::span<const EvalFrame> frames, double iou_thresh) {
  if (!(iou_thresh > 0.0 && iou_thresh < 1.0)) throw InvalidArgumentError("IoU threshold must lie in (0, 1)");
  IdTally tally;
  std::vector<SeriesPoint> out;
  out.reserve(frames.size());
  for (const EvalFrame& f : frames) {
    std::vector<std::size_t> gs, ps;
    for (const EvalObject& o : f.gt) gs.push_back(tally.gt_slot(o.id));
    for (const EvalObject& o : f.pred) ps.push_back(tally.pred_slot(o.id));
    tally.gt_total += static_cast<long long>(f.gt.size());
    tally.pred_total += static_cast<long long>(f.pred.size());
    for (std::size_t a = 0; a < f.gt.size(); ++a) {
      for (std::size_t b = 0; b < f.pred.size(); ++b) {
        if (iou(f.gt[a].box, f.pred[b].box) >= iou_thresh) ++tally.hits[gs[a]][ps[b]];
      }
    }
    SeriesPoint pt{f.frame, std::nullopt};
    if (tally.gt_total > 0) pt.value = tally.solve().idf1;
    out.push_back(pt);
  }
  return out;
}

Trajectories gt_trajectories(std::span<const EvalFrame> frames) {
  Trajectories t;
  for (const EvalFrame& f : frames) {
    for (const EvalObject& o : f.gt) t[o.id][f.frame] = o.box;
  }
  return t;
}

Trajectories pred_trajectories(std::span<const EvalFrame> frames) {
  Trajectories t;
  for (const EvalFrame& f : frames) {
    for (const EvalObject& o : f.pred) t[o.id][f.frame] = o.box;
  }
  return t;
}

}  // namespace botsort
