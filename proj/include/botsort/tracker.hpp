#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "botsort/affine.hpp"
#include "botsort/association.hpp"
#include "botsort/geometry.hpp"
#include "botsort/kalman.hpp"

namespace botsort {

struct Detection {
  BBox box;
  double score = 0.0;
  std::optional<Embedding> embedding;  ///< unit-norm when present
};

enum class TrackState { New, Tracked, Lost, Removed };

const char* to_string(TrackState s) noexcept;

struct Track {
  int id = 0;  ///< 0 until the track is activated
  TrackState state = TrackState::New;
  KalmanState kf;
  std::optional<Embedding> emb;  ///< EMA appearance state
  double score = 0.0;
  int start_frame = 0;
  int last_update_frame = 0;
  bool is_activated = false;
};

struct TrackerConfig {
  double tau = 0.6;         ///< high/low detection split
  double eta = 0.7;         ///< minimum score to start a track
  double low_floor = 0.1;   ///< detections at or below this are discarded
  double match_thresh_first = 0.8;
  double match_thresh_second = 0.5;
  double match_thresh_unconfirmed = 0.7;
  int track_buffer = 30;    ///< frames a lost track is kept
  double alpha = 0.9;       ///< EMA momentum of the appearance state
  FusionParams fusion;
  KfParams kf;
  bool use_reid = false;
  bool use_cmc = true;
  bool cmc_cov = true;      ///< also warp the covariance
  bool output_pred = false; ///< report extrapolated boxes for freshly lost tracks
  int pred_horizon = 1;     ///< frames after loss during which extrapolation is reported
  /// With use_reid, a high-score detection lacking an embedding is an error instead of
  /// a warning with IoU-only matching for that detection.
  bool require_embeddings = false;

  void validate() const;
};

/// One reported box.
struct TrackOutput {
  int id = 0;
  BBox box;
  double score = 0.0;
  bool extrapolated = false;

  friend bool operator==(const TrackOutput&, const TrackOutput&) = default;
};

struct DetectionSplit {
  std::vector<Detection> high;  ///< score > tau
  std::vector<Detection> low;   ///< low_floor < score <= tau
};

DetectionSplit split_detections(std::span<const Detection> dets, double tau, double low_floor);

/// EMA of unit appearance vectors, re-normalized. With no prior state the result is `f`;
/// an (antipodal) zero-norm blend keeps the prior.
Embedding blend_appearance(const std::optional<Embedding>& prev, const Embedding& f, double alpha);
void update_appearance(Track& t, const Embedding& f, double alpha);

/// Online BoT-SORT tracker for one sequence. Frames must be fed consecutively.
class BotSort {
 public:
  explicit BotSort(TrackerConfig cfg = {});

  /// Processes one frame. `warp` maps the previous frame onto this one and is only used
  /// when camera-motion compensation is enabled. Returns reported boxes sorted by id.
  std::vector<TrackOutput> step(int frame, std::span<const Detection> dets,
                                const AffineWarp& warp = AffineWarp::identity());

  /// Live (non-removed) tracks in creation order.
  const std::vector<Track>& tracks() const noexcept { return tracks_; }
  const TrackerConfig& config() const noexcept { return cfg_; }

  void set_warning_handler(std::function<void(const std::string&)> handler) { warn_ = std::move(handler); }

 private:
  void apply_match(Track& t, const Detection& d, int frame, bool update_emb);
  void activate(Track& t);

  TrackerConfig cfg_;
  std::vector<Track> tracks_;
  std::optional<int> last_frame_;
  int next_id_ = 1;
  std::function<void(const std::string&)> warn_;
};

}  // namespace botsort
