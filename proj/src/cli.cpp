#include "botsort/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "botsort/error.hpp"
#include "botsort/gmc.hpp"
#include "botsort/metrics.hpp"
#include "botsort/mot_io.hpp"
#include "botsort/postprocess.hpp"
#include "botsort/tracker.hpp"
#include "detail/atomic_write.hpp"

namespace botsort {

namespace {

namespace fs = std::filesystem;

void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

struct TrackOptions {
  std::string detections;
  std::string output;
  std::string embeddings;
  std::string gmc = "none";
  std::string save_warps;
  bool no_cmc_cov = false;
  bool pred = false;
  int pred_horizon = 1;
  bool require_embeddings = false;
  int downscale = 1;
  unsigned threads = 1;
  std::uint64_t seed = 0;
  TrackerConfig cfg;
};

struct InterpOptions {
  std::string input;
  std::string output;
  int max_gap = kDefaultMaxGap;
};

struct EvalOptions {
  std::string gt;
  std::string results;
  std::string cmota_csv;
  std::string cidf1_csv;
  double iou = kDefaultEvalIou;
};

struct GmcOptions {
  std::string frames;
  std::string output;
  int downscale = 1;
  unsigned threads = 1;
  std::uint64_t seed = 0;
};

// PGM files in `dir` whose stem is a frame number, by frame.
std::map<int, fs::path> list_frames(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::map<int, fs::path> frames;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".pgm") continue;
    const std::string stem = entry.path().stem().string();
    if (stem.empty() || !std::all_of(stem.begin(), stem.end(), [](unsigned char c) { return std::isdigit(c); })) {
      continue;
    }
    const int frame = std::stoi(stem);
    if (frame < 1) continue;
    if (!frames.emplace(frame, entry.path()).second) {
      throw InvalidArgumentError("two PGM files for frame " + std::to_string(frame) + " in " + dir.string());
    }
  }
  return frames;
}

// Warps for every frame whose predecessor frame image exists.
WarpMap compute_warps(const fs::path& dir, const GmcConfig& cfg, unsigned threads) {
  const auto frames = list_frames(dir);
  std::vector<std::pair<int, fs::path>> ordered(frames.begin(), frames.end());
  WarpMap warps;
  if (ordered.size() < 2) return warps;
  const auto results = estimate_sequence(
      ordered.size(), [&](std::size_t k) { return read_pgm(ordered[k].second); }, cfg, threads);
  for (std::size_t k = 1; k < ordered.size(); ++k) {
    if (ordered[k].first != ordered[k - 1].first + 1) {
      warn("no image for frame " + std::to_string(ordered[k].first - 1) + "; frame " +
           std::to_string(ordered[k].first) + " gets the identity warp");
      continue;
    }
    if (results[k].fallback) {
      warn("frame " + std::to_string(ordered[k].first) + ": motion estimation failed (" + results[k].reason +
           "); using identity");
    }
    warps[ordered[k].first] = results[k].warp;
  }
  return warps;
}

GmcConfig gmc_config(int downscale, std::uint64_t seed) {
  GmcConfig cfg;
  cfg.downscale = downscale;
  cfg.ransac.seed = seed;
  return cfg;
}

int run_track(TrackOptions& o) {
  TrackerConfig cfg = o.cfg;
  cfg.cmc_cov = !o.no_cmc_cov;
  cfg.output_pred = o.pred;
  cfg.pred_horizon = o.pred_horizon;
  cfg.require_embeddings = o.require_embeddings;

  DetectionsByFrame dets = read_detections(o.detections, warn);
  if (!o.embeddings.empty()) {
    read_embeddings(o.embeddings, dets);
    cfg.use_reid = true;
  }

  WarpMap warps;
  if (o.gmc == "none") {
    cfg.use_cmc = false;
  } else if (o.gmc.rfind("file:", 0) == 0) {
    warps = load_warps(o.gmc.substr(5));
    cfg.use_cmc = true;
  } else if (o.gmc.rfind("compute:", 0) == 0) {
    warps = compute_warps(o.gmc.substr(8), gmc_config(o.downscale, o.seed), o.threads);
    cfg.use_cmc = true;
  } else {
    throw InvalidArgumentError("--gmc expects file:F, compute:DIR or none, got '" + o.gmc + "'");
  }
  if (!o.save_warps.empty()) save_warps(o.save_warps, warps);

  int last_frame = 0;
  if (!dets.empty()) last_frame = dets.rbegin()->first;
  if (!warps.empty()) last_frame = std::max(last_frame, warps.rbegin()->first);

  BotSort tracker(cfg);
  tracker.set_warning_handler(warn);
  std::vector<MotRow> rows;
  static const std::vector<Detection> kNone;
  for (int frame = 1; frame <= last_frame; ++frame) {
    const auto it = dets.find(frame);
    const std::vector<Detection>& frame_dets = it == dets.end() ? kNone : it->second;
    for (const TrackOutput& t : tracker.step(frame, frame_dets, warp_for(warps, frame))) {
      rows.push_back({frame, t.id, t.box, t.score, -1.0, -1.0, -1.0});
    }
  }
  write_results(o.output, std::move(rows));
  return 0;
}

int run_interp(const InterpOptions& o) {
  if (o.max_gap < 1) throw InvalidArgumentError("--max-gap must be >= 1");
  const auto rows = read_mot_rows(o.input, warn);
  std::vector<TrackletSeries> tracklets = rows_to_tracklets(rows);
  for (TrackletSeries& t : tracklets) t = interpolate(t, o.max_gap);
  write_results(o.output, tracklets_to_rows(tracklets));
  return 0;
}

void write_series_csv(const fs::path& path, const char* column, const std::vector<SeriesPoint>& series) {
  std::string out = std::string("frame,") + column + "\n";
  char buf[64];
  for (const SeriesPoint& p : series) {
    if (p.value) {
      std::snprintf(buf, sizeof buf, "%d,%.12f\n", p.frame, *p.value);
    } else {
      std::snprintf(buf, sizeof buf, "%d,NA\n", p.frame);
    }
    out += buf;
  }
  detail::write_file_atomically(path, out);
}

int run_eval(const EvalOptions& o) {
  const auto gt = read_mot_rows(o.gt, warn);
  const auto res = read_mot_rows(o.results, warn);
  const std::vector<EvalFrame> frames = build_eval_frames(gt, res);
  const std::vector<FrameCounts> counts = evaluate_clear(frames, o.iou);

  long long fp = 0, fn = 0, idsw = 0, num_gt = 0, matches = 0, num_pred = 0;
  for (const FrameCounts& c : counts) {
    fp += c.fp;
    fn += c.fn;
    idsw += c.idsw;
    num_gt += c.num_gt;
    matches += c.matches;
  }
  for (const EvalFrame& f : frames) num_pred += static_cast<long long>(f.pred.size());
  const double m = mota(counts);
  const IdScores ids = id_scores(gt_trajectories(frames), pred_trajectories(frames), o.iou);

  std::printf("frames: %zu\n", frames.size());
  std::printf("gt: %lld\npredictions: %lld\nmatches: %lld\n", num_gt, num_pred, matches);
  std::printf("FP: %lld\nFN: %lld\nIDSW: %lld\n", fp, fn, idsw);
  std::printf("MOTA: %.6f\n", m);
  std::printf("IDTP: %lld\nIDFP: %lld\nIDFN: %lld\n", ids.idtp, ids.idfp, ids.idfn);
  std::printf("IDF1: %.6f\n", ids.idf1);
  std::printf("HOTA: not computed (use an external evaluator such as TrackEval)\n");

  if (!o.cmota_csv.empty()) write_series_csv(o.cmota_csv, "cmota", cmota_series(counts));
  if (!o.cidf1_csv.empty()) write_series_csv(o.cidf1_csv, "cidf1", idf1_series(frames, o.iou));
  return 0;
}

int run_gmc(const GmcOptions& o) {
  save_warps(o.output, compute_warps(o.frames, gmc_config(o.downscale, o.seed), o.threads));
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"BoT-SORT multi-object tracker", "botsort"};
  app.require_subcommand(1);

  TrackOptions track;
  auto* t = app.add_subcommand("track", "track detections and write MOT results");
  t->add_option("--detections", track.detections, "MOT detection file")->required();
  t->add_option("--output", track.output, "result file")->required();
  t->add_option("--embeddings", track.embeddings, "appearance embeddings (BTEB or CSV); enables ReID fusion");
  t->add_option("--gmc", track.gmc, "camera motion: file:F | compute:DIR | none")->capture_default_str();
  t->add_option("--save-warps", track.save_warps, "write the warps used to this file");
  t->add_flag("--no-cmc-cov", track.no_cmc_cov, "do not warp the covariance");
  t->add_flag("--pred", track.pred, "report extrapolated boxes for freshly lost tracks");
  t->add_option("--pred-horizon", track.pred_horizon, "frames of extrapolation after loss")->capture_default_str();
  t->add_option("--tau", track.cfg.tau, "high score threshold")->capture_default_str();
  t->add_option("--eta", track.cfg.eta, "new track threshold")->capture_default_str();
  t->add_option("--low-floor", track.cfg.low_floor, "discard detections at or below")->capture_default_str();
  t->add_option("--match-first", track.cfg.match_thresh_first, "first association max cost")->capture_default_str();
  t->add_option("--match-second", track.cfg.match_thresh_second, "second association max cost")
      ->capture_default_str();
  t->add_option("--match-unconfirmed", track.cfg.match_thresh_unconfirmed, "unconfirmed association max cost")
      ->capture_default_str();
  t->add_option("--proximity", track.cfg.fusion.theta_iou, "IoU distance gate for appearance")
      ->capture_default_str();
  t->add_option("--appearance", track.cfg.fusion.theta_emb, "cosine distance gate")->capture_default_str();
  t->add_option("--buffer", track.cfg.track_buffer, "frames to keep lost tracks")->capture_default_str();
  t->add_option("--alpha", track.cfg.alpha, "appearance EMA momentum")->capture_default_str();
  t->add_flag("--require-embeddings", track.require_embeddings,
              "fail when a high-score detection has no embedding");
  t->add_option("--downscale", track.downscale, "image downscale for compute:")->capture_default_str();
  t->add_option("--threads", track.threads, "motion estimation workers")->capture_default_str();
  t->add_option("--seed", track.seed, "RANSAC seed")->capture_default_str();

  InterpOptions interp;
  auto* i = app.add_subcommand("interp", "fill short track gaps by linear interpolation");
  i->add_option("--input", interp.input, "result file")->required();
  i->add_option("--output", interp.output, "interpolated result file")->required();
  i->add_option("--max-gap", interp.max_gap, "largest frame gap to fill")->capture_default_str();

  EvalOptions eval;
  auto* e = app.add_subcommand("eval", "CLEAR MOTA, IDF1 and the cumulative MOTA series");
  e->add_option("--gt", eval.gt, "ground-truth MOT file")->required();
  e->add_option("--results", eval.results, "result MOT file")->required();
  e->add_option("--cmota-csv", eval.cmota_csv, "write cumulative MOTA per frame");
  e->add_option("--cidf1-csv", eval.cidf1_csv, "write cumulative IDF1 per frame");
  e->add_option("--iou", eval.iou, "match IoU threshold")->capture_default_str();

  GmcOptions gmc;
  auto* g = app.add_subcommand("gmc", "estimate frame-to-frame camera motion from PGM frames");
  g->add_option("--frames", gmc.frames, "directory of <frame>.pgm images")->required();
  g->add_option("--output", gmc.output, "warp file")->required();
  g->add_option("--downscale", gmc.downscale, "integer downscale before estimation")->capture_default_str();
  g->add_option("--threads", gmc.threads, "workers")->capture_default_str();
  g->add_option("--seed", gmc.seed, "RANSAC seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    std::string msg = ex.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::cerr << "error: " << msg << '\n';
    return 2;
  }

  try {
    if (t->parsed()) return run_track(track);
    if (i->parsed()) return run_interp(interp);
    if (e->parsed()) return run_eval(eval);
    if (g->parsed()) return run_gmc(gmc);
  } catch (const std::exception& ex) {
    std::string msg = ex.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::cerr << "error: " << msg << '\n';
    return 1;
  }
  return 2;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> storage = args;
  std::vector<char*> argv;
  argv.reserve(storage.size() + 1);
  for (std::string& s : storage) argv.push_back(s.data());
  argv.push_back(nullptr);
  return run_cli(static_cast<int>(storage.size()), argv.data());
}

}  // namespace botsort
