#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace botsort::testing {

SyntheticSequence panning_scene(int frames, double pan, int objects) {
  SyntheticSequence seq;
  seq.frames = frames;
  constexpr double kW = 40.0, kH = 100.0;
  const double x0 = 200.0 + pan * frames;
  for (int f = 1; f <= frames; ++f) {
    const double shift = -pan * (f - 1);
    for (int i = 0; i < objects; ++i) {
      const BBox box{x0 + pan * i + shift, 300.0 + 6.0 * i, kW, kH};
      seq.gt[f].push_back({i + 1, box});
      seq.dets[f].push_back({box, 0.9, std::nullopt});
    }
    if (f > 1) seq.warps[f] = AffineWarp::translation(-pan, 0.0);
  }
  return seq;
}

SyntheticSequence crossing_scene(int occlusion, std::uint64_t seed) {
  SyntheticSequence seq;
  constexpr int kBefore = 20, kAfter = 20, kDim = 16;
  constexpr double kW = 50.0, kH = 120.0;
  // Top-left corners before and after the occlusion. Each person's new box overlaps
  // their old one above IoU 0.5, inside the fusion proximity gate, yet the crossed
  // pairing has lower total 1 - IoU. The two people overlap below IoU 0.5 both before
  // and after, so evaluation can tell them apart.
  constexpr double kA0x = 100, kA0y = 200, kB0x = 113, kB0y = 225;
  constexpr double kA1x = 105, kA1y = 220, kB1x = 113, kB1y = 190;
  seq.frames = kBefore + occlusion + kAfter;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.02);
  auto embedding = [&](int person) {
    Embedding e(kDim);
    for (int k = 0; k < kDim; ++k) e[static_cast<std::size_t>(k)] = noise(rng);
    e[static_cast<std::size_t>(person)] += 1.0;
    double n = 0.0;
    for (double v : e) n += v * v;
    n = std::sqrt(n);
    for (double& v : e) v /= n;
    return e;
  };

  for (int f = 1; f <= seq.frames; ++f) {
    double t = 0.0;
    if (f > kBefore + occlusion) {
      t = 1.0;
    } else if (f > kBefore) {
      t = static_cast<double>(f - kBefore) / (occlusion + 1);
    }
    const BBox a{kA0x + (kA1x - kA0x) * t, kA0y + (kA1y - kA0y) * t, kW, kH};
    const BBox b{kB0x + (kB1x - kB0x) * t, kB0y + (kB1y - kB0y) * t, kW, kH};
    seq.gt[f] = {{1, a}, {2, b}};
    if (f <= kBefore || f > kBefore + occlusion) {
      seq.dets[f] = {{a, 0.9, embedding(0)}, {b, 0.85, embedding(1)}};
    }
  }
  return seq;
}

std::vector<MotRow> run_tracker(const SyntheticSequence& seq, const TrackerConfig& cfg) {
  BotSort tracker(cfg);
  std::vector<MotRow> rows;
  static const std::vector<Detection> kNone;
  for (int f = 1; f <= seq.frames; ++f) {
    const auto it = seq.dets.find(f);
    const auto& dets = it == seq.dets.end() ? kNone : it->second;
    for (const TrackOutput& t : tracker.step(f, dets, warp_for(seq.warps, f))) {
      rows.push_back({f, t.id, t.box, t.score, -1.0, -1.0, -1.0});
    }
  }
  return rows;
}

std::vector<MotRow> gt_rows(const SyntheticSequence& seq) {
  std::vector<MotRow> rows;
  for (const auto& [frame, objs] : seq.gt) {
    for (const EvalObject& o : objs) rows.push_back({frame, o.id, o.box, 1.0, -1.0, -1.0, -1.0});
  }
  return rows;
}

Score score(const SyntheticSequence& seq, const std::vector<MotRow>& results) {
  const auto gt = gt_rows(seq);
  const auto frames = build_eval_frames(gt, results);
  const auto counts = evaluate_clear(frames);
  Score s;
  s.mota = mota(counts);
  s.idf1 = idf1(gt_trajectories(frames), pred_trajectories(frames));
  for (const FrameCounts& c : counts) {
    s.idsw += c.idsw;
    s.fn += c.fn;
    s.fp += c.fp;
  }
  return s;
}

TextureField::TextureField(std::uint64_t seed, int waves, int blobs, double extent) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < waves; ++i) {
    const double period = 18.0 + 40.0 * unit(rng);
    const double angle = std::numbers::pi * unit(rng);
    const double k = 2.0 * std::numbers::pi / period;
    waves_.push_back({k * std::cos(angle), k * std::sin(angle), 2.0 * std::numbers::pi * unit(rng),
                      0.25 / waves * (0.5 + unit(rng))});
  }
  for (int i = 0; i < blobs; ++i) {
    blobs_.push_back({-0.25 * extent + 1.5 * extent * unit(rng), -0.25 * extent + 1.5 * extent * unit(rng),
                      3.0 + 6.0 * unit(rng), (unit(rng) < 0.5 ? -0.3 : 0.3) * (0.5 + unit(rng))});
  }
}

double TextureField::operator()(double x, double y) const {
  double v = 0.5;
  for (const Wave& w : waves_) v += w.amp * std::sin(w.kx * x + w.ky * y + w.phase);
  for (const Blob& b : blobs_) {
    const double dx = x - b.x, dy = y - b.y;
    const double r2 = dx * dx + dy * dy;
    if (r2 < 25.0 * b.sigma * b.sigma) v += b.amp * std::exp(-r2 / (2.0 * b.sigma * b.sigma));
  }
  return std::clamp(v, 0.0, 1.0);
}

AffineWarp inverse(const AffineWarp& a) {
  const double det = a.det();
  const double i11 = a.a22 / det, i12 = -a.a12 / det;
  const double i21 = -a.a21 / det, i22 = a.a11 / det;
  return {i11, i12, -(i11 * a.a13 + i12 * a.a23), i21, i22, -(i21 * a.a13 + i22 * a.a23)};
}

GrayImage render(const TextureField& field, int width, int height, const AffineWarp& motion) {
  const AffineWarp back = inverse(motion);
  GrayImage img(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const auto [sx, sy] = back.apply(x, y);
      img.at(x, y) = static_cast<float>(field(sx, sy));
    }
  }
  return img;
}

AffineWarp rotation_about(double degrees, double cx, double cy) {
  const double r = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(r), s = std::sin(r);
  return {c, -s, cx - c * cx + s * cy, s, c, cy - s * cx - c * cy};
}

}  // namespace botsort::testing
