#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "botsort/geometry.hpp"
#include "botsort/metrics.hpp"
#include "botsort/postprocess.hpp"
#include "botsort/tracker.hpp"

namespace botsort {

/// One MOTChallenge line: frame,id,left,top,width,height,conf,x,y,z.
struct MotRow {
  int frame = 1;
  int id = -1;
  BBox box;
  double conf = 1.0;
  double x = -1.0, y = -1.0, z = -1.0;

  friend bool operator==(const MotRow&, const MotRow&) = default;
};

using WarningFn = std::function<void(const std::string&)>;

/// Parses MOT-format text. Rows with non-positive or non-finite extent are dropped and
/// reported through `warn`; malformed lines throw ParseError with the line number.
std::vector<MotRow> parse_mot_rows(std::string_view text, const std::string& source = "<text>",
                                   const WarningFn& warn = {});
std::vector<MotRow> read_mot_rows(const std::filesystem::path& path, const WarningFn& warn = {});

/// Detections grouped by 1-based frame, file order within a frame. Frames without rows
/// are absent.
using DetectionsByFrame = std::map<int, std::vector<Detection>>;

DetectionsByFrame read_detections(const std::filesystem::path& path, const WarningFn& warn = {});

struct EmbeddingRecord {
  int frame = 0;
  int det_index = 0;  ///< 0-based position in that frame's detection list
  std::vector<float> vector;
};

/// Binary "BTEB" (little-endian u32 dim, then u32 frame, u32 det_index, dim f32 per
/// record) or CSV "frame,det_index,v0,...". Vectors are returned as stored.
std::vector<EmbeddingRecord> read_embedding_records(const std::filesystem::path& path);
void write_embeddings(const std::filesystem::path& path, std::span<const EmbeddingRecord> records);

/// Attaches L2-normalized vectors to their detections.
void attach_embeddings(DetectionsByFrame& dets, std::span<const EmbeddingRecord> records);
void read_embeddings(const std::filesystem::path& path, DetectionsByFrame& dets);

/// Result lines sorted by frame then id, fixed-point formatting.
std::string format_results(std::vector<MotRow> rows);
void write_results(const std::filesystem::path& path, std::vector<MotRow> rows);

/// Regroups result rows into per-id series (entries sorted by frame) and back.
std::vector<TrackletSeries> rows_to_tracklets(std::span<const MotRow> rows);
std::vector<MotRow> tracklets_to_rows(std::span<const TrackletSeries> tracklets);

/// Builds evaluation frames over the union of frames in both inputs. Ground-truth rows
/// whose conf (active) field is 0 are ignored.
std::vector<EvalFrame> build_eval_frames(std::span<const MotRow> gt, std::span<const MotRow> results);

}  // namespace botsort
