#include "botsort/tracker.hpp"

#include <algorithm>
#include <cmath>

#include "botsort/error.hpp"

namespace botsort {

const char* to_string(TrackState s) noexcept {
  switch (s) {
    case TrackState::New: return "New";
    case TrackState::Tracked: return "Tracked";
    case TrackState::Lost: return "Lost";
    case TrackState::Removed: return "Removed";
  }
  return "?";
}

void TrackerConfig::validate() const {
  auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
  if (!(low_floor > 0.0 && low_floor < tau && tau <= 1.0)) {
    throw InvalidArgumentError("need 0 < low_floor < tau <= 1");
  }
  if (!in_unit(eta)) throw InvalidArgumentError("eta must lie in (0, 1]");
  if (!in_unit(match_thresh_first) || !in_unit(match_thresh_second) || !in_unit(match_thresh_unconfirmed)) {
    throw InvalidArgumentError("matching thresholds must lie in (0, 1]");
  }
  if (track_buffer < 1) throw InvalidArgumentError("track_buffer must be >= 1");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw InvalidArgumentError("alpha must lie in [0, 1)");
  if (pred_horizon < 1) throw InvalidArgumentError("pred_horizon must be >= 1");
  fusion.validate();
  kf.validate();
}

DetectionSplit split_detections(std::span<const Detection> dets, double tau, double low_floor) {
  DetectionSplit out;
  for (const Detection& d : dets) {
    if (d.score > tau) {
      out.high.push_back(d);
    } else if (d.score > low_floor) {
      out.low.push_back(d);
    }
  }
  return out;
}

Embedding blend_appearance(const std::optional<Embedding>& prev, const Embedding& f, double alpha) {
  if (!prev) return f;
  if (prev->size() != f.size()) throw ShapeMismatchError("appearance dimension changed within a track");
  Embedding e(f.size());
  double sq = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    e[k] = alpha * (*prev)[k] + (1.0 - alpha) * f[k];
    sq += e[k] * e[k];
  }
  const double norm = std::sqrt(sq);
  if (!(norm > 1e-12)) return *prev;
  for (double& v : e) v /= norm;
  return e;
}

void update_appearance(Track& t, const Embedding& f, double alpha) { t.emb = blend_appearance(t.emb, f, alpha); }

BotSort::BotSort(TrackerConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

void BotSort::activate(Track& t) {
  t.id = next_id_++;
  t.is_activated = true;
  t.state = TrackState::Tracked;
}

void BotSort::apply_match(Track& t, const Detection& d, int frame, bool update_emb) {
  t.kf = update(t.kf, Measurement::from_box(d.box), cfg_.kf);
  t.score = d.score;
  t.last_update_frame = frame;
  t.state = TrackState::Tracked;
  if (update_emb && d.embedding) update_appearance(t, *d.embedding, cfg_.alpha);
}

namespace {

void validate_detection(const Detection& d) {
  d.box.validate();
  if (!(d.score >= 0.0 && d.score <= 1.0)) throw InvalidArgumentError("detection score outside [0, 1]");
  if (d.embedding) {
    double sq = 0.0;
    for (double v : *d.embedding) sq += v * v;
    if (d.embedding->empty() || !(std::abs(std::sqrt(sq) - 1.0) <= 1e-6)) {
      throw InvalidArgumentError("detection embedding is not unit-norm");
    }
  }
}

}  // namespace

std::vector<TrackOutput> BotSort::step(int frame, std::span<const Detection> dets, const AffineWarp& warp) {
  if (last_frame_ && frame != *last_frame_ + 1) {
    throw InvalidArgumentError("frame " + std::to_string(frame) + " does not follow frame " +
                               std::to_string(*last_frame_));
  }
  for (const Detection& d : dets) validate_detection(d);
  if (cfg_.use_cmc) warp.validate();
  const bool first_frame = !last_frame_;
  last_frame_ = frame;

  const DetectionSplit split = split_detections(dets, cfg_.tau, cfg_.low_floor);
  const std::vector<Detection>& high = split.high;
  const std::vector<Detection>& low = split.low;

  // Predict, then move every prior into this frame's coordinates.
  for (Track& t : tracks_) {
    t.kf = predict(t.kf, cfg_.kf, t.state != TrackState::Tracked);
    if (cfg_.use_cmc) t.kf = apply_warp(t.kf, warp, cfg_.cmc_cov);
    if (!(t.kf.mean(2) > 0.0 && t.kf.mean(3) > 0.0) || !t.kf.mean.allFinite()) t.state = TrackState::Removed;
  }

  auto predicted_boxes = [&](const std::vector<std::size_t>& idx) {
    std::vector<BBox> boxes;
    boxes.reserve(idx.size());
    for (std::size_t i : idx) boxes.push_back(tracks_[i].kf.box());
    return boxes;
  };
  auto boxes_of = [](const std::vector<Detection>& ds, const std::vector<std::size_t>& idx) {
    std::vector<BBox> boxes;
    boxes.reserve(idx.size());
    for (std::size_t j : idx) boxes.push_back(ds[j].box);
    return boxes;
  };

  // First association: activated tracked and lost tracks against high-score detections.
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    const Track& t = tracks_[i];
    if (t.is_activated && (t.state == TrackState::Tracked || t.state == TrackState::Lost)) pool.push_back(i);
  }
  std::vector<std::size_t> high_idx(high.size());
  for (std::size_t j = 0; j < high.size(); ++j) high_idx[j] = j;

  CostMatrix first = iou_cost(predicted_boxes(pool), boxes_of(high, high_idx));
  if (cfg_.use_reid) {
    for (std::size_t j = 0; j < high.size(); ++j) {
      if (high[j].embedding) continue;
      const std::string msg = "frame " + std::to_string(frame) + ": high-score detection " + std::to_string(j) +
                              " has no embedding";
      if (cfg_.require_embeddings) throw InvalidArgumentError(msg);
      if (warn_) warn_(msg + "; matching it by IoU only");
    }
    CostMatrix d_cos(first.rows(), first.cols(), 1.0);
    for (std::size_t r = 0; r < pool.size(); ++r) {
      const Track& t = tracks_[pool[r]];
      if (!t.emb) continue;
      for (std::size_t j = 0; j < high.size(); ++j) {
        if (high[j].embedding) d_cos(r, j) = cosine_distance(*t.emb, *high[j].embedding);
      }
    }
    first = fuse(first, d_cos, cfg_.fusion);
  }
  const Assignment a1 = solve_assignment(first, cfg_.match_thresh_first);
  for (const auto& [r, j] : a1.matches) apply_match(tracks_[pool[r]], high[j], frame, true);

  std::vector<std::size_t> remain_high;
  for (std::size_t j : a1.unmatched_dets) remain_high.push_back(j);

  // Second association: still-tracked leftovers against low-score detections, IoU only.
  std::vector<std::size_t> remain_tracked;
  for (std::size_t r : a1.unmatched_tracks) {
    if (tracks_[pool[r]].state == TrackState::Tracked) remain_tracked.push_back(pool[r]);
  }
  std::vector<std::size_t> low_idx(low.size());
  for (std::size_t j = 0; j < low.size(); ++j) low_idx[j] = j;
  const Assignment a2 =
      solve_assignment(iou_cost(predicted_boxes(remain_tracked), boxes_of(low, low_idx)), cfg_.match_thresh_second);
  for (const auto& [r, j] : a2.matches) apply_match(tracks_[remain_tracked[r]], low[j], frame, false);
  for (std::size_t r : a2.unmatched_tracks) tracks_[remain_tracked[r]].state = TrackState::Lost;

  // Unconfirmed tracks against the high-score detections nobody claimed.
  std::vector<std::size_t> unconfirmed;
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    if (!tracks_[i].is_activated && tracks_[i].state == TrackState::New) unconfirmed.push_back(i);
  }
  const Assignment a3 = solve_assignment(iou_cost(predicted_boxes(unconfirmed), boxes_of(high, remain_high)),
                                         cfg_.match_thresh_unconfirmed);
  for (const auto& [r, k] : a3.matches) {
    Track& t = tracks_[unconfirmed[r]];
    apply_match(t, high[remain_high[k]], frame, true);
    activate(t);
  }
  for (std::size_t r : a3.unmatched_tracks) tracks_[unconfirmed[r]].state = TrackState::Removed;

  for (Track& t : tracks_) {
    if (t.state == TrackState::Lost && frame - t.last_update_frame > cfg_.track_buffer) {
      t.state = TrackState::Removed;
    }
  }

  // New tracks from unclaimed high-score detections.
  for (std::size_t k : a3.unmatched_dets) {
    const Detection& d = high[remain_high[k]];
    if (!(d.score > cfg_.eta)) continue;
    Track t;
    t.kf = initiate(Measurement::from_box(d.box), cfg_.kf);
    t.emb = d.embedding;
    t.score = d.score;
    t.start_frame = frame;
    t.last_update_frame = frame;
    if (first_frame) activate(t);
    tracks_.push_back(std::move(t));
  }

  std::erase_if(tracks_, [](const Track& t) { return t.state == TrackState::Removed; });

  std::vector<TrackOutput> out;
  for (const Track& t : tracks_) {
    if (!t.is_activated) continue;
    if (t.state == TrackState::Tracked && t.last_update_frame == frame) {
      out.push_back({t.id, t.kf.box(), t.score, false});
    } else if (cfg_.output_pred && t.state == TrackState::Lost && frame - t.last_update_frame <= cfg_.pred_horizon) {
      out.push_back({t.id, t.kf.box(), t.score, true});
    }
  }
  std::sort(out.begin(), out.end(), [](const TrackOutput& a, const TrackOutput& b) { return a.id < b.id; });
  return out;
}

}  // namespace botsort
