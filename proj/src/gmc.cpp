#include "botsort/gmc.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "botsort/error.hpp"
#include "detail/atomic_write.hpp"

namespace botsort {

namespace {

void require_size(const GrayImage& img) {
  if (img.width < kMinImageSide || img.height < kMinImageSide) {
    throw InvalidArgumentError("image too small for motion estimation (" + std::to_string(img.width) + "x" +
                               std::to_string(img.height) + ")");
  }
}

// Sobel derivatives, scaled to intensity units per pixel. Border pixels stay zero.
void sobel(const GrayImage& img, std::vector<float>& gx, std::vector<float>& gy) {
  const int w = img.width;
  const int h = img.height;
  gx.assign(img.pixels.size(), 0.f);
  gy.assign(img.pixels.size(), 0.f);
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const float tl = img.at(x - 1, y - 1), tc = img.at(x, y - 1), tr = img.at(x + 1, y - 1);
      const float ml = img.at(x - 1, y), mr = img.at(x + 1, y);
      const float bl = img.at(x - 1, y + 1), bc = img.at(x, y + 1), br = img.at(x + 1, y + 1);
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      gx[i] = ((tr + 2 * mr + br) - (tl + 2 * ml + bl)) / 8.f;
      gy[i] = ((bl + 2 * bc + br) - (tl + 2 * tc + tr)) / 8.f;
    }
  }
}

}  // namespace

std::vector<Point2> detect_corners(const GrayImage& img, const CornerParams& params) {
  require_size(img);
  if (!(params.quality > 0.0 && params.quality < 1.0)) {
    throw InvalidArgumentError("corner quality must lie in (0, 1)");
  }
  if (params.max_corners <= 0) return {};

  const int w = img.width;
  const int h = img.height;
  std::vector<float> gx, gy;
  sobel(img, gx, gy);

  std::vector<double> score(img.pixels.size(), 0.0);
  double best = 0.0;
  for (int y = 2; y < h - 2; ++y) {
    for (int x = 2; x < w - 2; ++x) {
      double a = 0, b = 0, c = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const std::size_t i = static_cast<std::size_t>(y + dy) * w + (x + dx);
          a += gx[i] * gx[i];
          b += gx[i] * gy[i];
          c += gy[i] * gy[i];
        }
      }
      const double half_diff = 0.5 * (a - c);
      const double min_eig = 0.5 * (a + c) - std::sqrt(half_diff * half_diff + b * b);
      const double s = std::max(min_eig, 0.0);
      score[static_cast<std::size_t>(y) * w + x] = s;
      best = std::max(best, s);
    }
  }
  if (best <= 0.0) return {};

  struct Candidate {
    double score;
    int x, y;
  };
  const double floor_score = params.quality * best;
  std::vector<Candidate> cand;
  for (int y = 2; y < h - 2; ++y) {
    for (int x = 2; x < w - 2; ++x) {
      const double s = score[static_cast<std::size_t>(y) * w + x];
      if (s < floor_score || s <= 0.0) continue;
      bool local_max = true;
      for (int dy = -1; dy <= 1 && local_max; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (score[static_cast<std::size_t>(y + dy) * w + (x + dx)] > s) {
            local_max = false;
            break;
          }
        }
      }
      if (local_max) cand.push_back({s, x, y});
    }
  }
  std::stable_sort(cand.begin(), cand.end(), [](const Candidate& l, const Candidate& r) { return l.score > r.score; });

  // Greedy minimum-distance selection over a bucket grid of min_dist cells.
  const double min_dist = std::max(params.min_dist, 0.0);
  const double cell = std::max(min_dist, 1.0);
  const int gw = static_cast<int>(std::ceil(w / cell)) + 1;
  const int gh = static_cast<int>(std::ceil(h / cell)) + 1;
  std::vector<std::vector<Point2>> buckets(static_cast<std::size_t>(gw) * gh);
  std::vector<Point2> out;
  const double min_d2 = min_dist * min_dist;
  for (const Candidate& c : cand) {
    const int bx = static_cast<int>(c.x / cell);
    const int by = static_cast<int>(c.y / cell);
    bool ok = true;
    for (int yy = std::max(by - 1, 0); yy <= std::min(by + 1, gh - 1) && ok; ++yy) {
      for (int xx = std::max(bx - 1, 0); xx <= std::min(bx + 1, gw - 1) && ok; ++xx) {
        for (const Point2& p : buckets[static_cast<std::size_t>(yy) * gw + xx]) {
          const double ddx = p.x - c.x, ddy = p.y - c.y;
          if (ddx * ddx + ddy * ddy < min_d2) {
            ok = false;
            break;
          }
        }
      }
    }
    if (!ok) continue;
    const Point2 p{static_cast<double>(c.x), static_cast<double>(c.y)};
    buckets[static_cast<std::size_t>(by) * gw + bx].push_back(p);
    out.push_back(p);
    if (static_cast<int>(out.size()) >= params.max_corners) break;
  }
  return out;
}

namespace {

struct PyramidLevel {
  GrayImage img;
  GrayImage gx;
  GrayImage gy;
};

std::vector<PyramidLevel> build_pyramid(const GrayImage& base, int levels, bool with_gradients) {
  std::vector<PyramidLevel> pyr;
  pyr.push_back({base, {}, {}});
  for (int l = 1; l < levels; ++l) {
    const GrayImage& top = pyr.back().img;
    if (top.width < 8 || top.height < 8) break;
    pyr.push_back({pyr_down(top), {}, {}});
  }
  if (with_gradients) {
    for (PyramidLevel& lvl : pyr) {
      const GrayImage& im = lvl.img;
      lvl.gx = GrayImage(im.width, im.height);
      lvl.gy = GrayImage(im.width, im.height);
      for (int y = 0; y < im.height; ++y) {
        for (int x = 0; x < im.width; ++x) {
          lvl.gx.at(x, y) = 0.5f * (im.clamped(x + 1, y) - im.clamped(x - 1, y));
          lvl.gy.at(x, y) = 0.5f * (im.clamped(x, y + 1) - im.clamped(x, y - 1));
        }
      }
    }
  }
  return pyr;
}

bool window_inside(const Point2& p, int half, const GrayImage& img) {
  return std::isfinite(p.x) && std::isfinite(p.y) && p.x - half >= 0.0 && p.y - half >= 0.0 &&
         p.x + half <= img.width - 1.0 && p.y + half <= img.height - 1.0;
}

}  // namespace

std::vector<Correspondence> track_flow(const GrayImage& prev, const GrayImage& cur, const std::vector<Point2>& pts,
                                       const FlowParams& params) {
  if (prev.width != cur.width || prev.height != cur.height) {
    throw ShapeMismatchError("optical flow needs images of equal size");
  }
  if (params.levels < 1 || params.window < 3 || params.max_iters < 1 || !(params.epsilon > 0.0)) {
    throw InvalidArgumentError("invalid optical flow parameters");
  }
  const auto prev_pyr = build_pyramid(prev, params.levels, true);
  const auto cur_pyr = build_pyramid(cur, static_cast<int>(prev_pyr.size()), false);
  const int levels = static_cast<int>(prev_pyr.size());
  const int half = params.window / 2;
  const double npix = static_cast<double>((2 * half + 1) * (2 * half + 1));
  const double eps2 = params.epsilon * params.epsilon;

  std::vector<Correspondence> out;
  out.reserve(pts.size());
  const std::size_t wn = static_cast<std::size_t>(2 * half + 1) * (2 * half + 1);
  std::vector<double> tmpl(wn), tgx(wn), tgy(wn);

  for (const Point2& pt : pts) {
    double gx_total = 0.0, gy_total = 0.0;  // flow guess carried down the pyramid
    bool ok = true;
    for (int l = levels - 1; l >= 0 && ok; --l) {
      const PyramidLevel& P = prev_pyr[static_cast<std::size_t>(l)];
      const GrayImage& J = cur_pyr[static_cast<std::size_t>(l)].img;
      const double scale = std::ldexp(1.0, -l);
      const double ux = pt.x * scale;
      const double uy = pt.y * scale;

      double g11 = 0, g12 = 0, g22 = 0;
      std::size_t k = 0;
      for (int dy = -half; dy <= half; ++dy) {
        for (int dx = -half; dx <= half; ++dx, ++k) {
          const double sx = ux + dx, sy = uy + dy;
          tmpl[k] = P.img.sample(sx, sy);
          tgx[k] = P.gx.sample(sx, sy);
          tgy[k] = P.gy.sample(sx, sy);
          g11 += tgx[k] * tgx[k];
          g12 += tgx[k] * tgy[k];
          g22 += tgy[k] * tgy[k];
        }
      }
      const double half_diff = 0.5 * (g11 - g22);
      const double min_eig = 0.5 * (g11 + g22) - std::sqrt(half_diff * half_diff + g12 * g12);
      if (min_eig / npix < params.min_eigen) {
        ok = false;
        break;
      }
      const double det = g11 * g22 - g12 * g12;

      double vx = 0.0, vy = 0.0;
      bool converged = false;
      for (int it = 0; it < params.max_iters; ++it) {
        double bx = 0.0, by = 0.0;
        k = 0;
        const double ox = ux + gx_total + vx;
        const double oy = uy + gy_total + vy;
        for (int dy = -half; dy <= half; ++dy) {
          for (int dx = -half; dx <= half; ++dx, ++k) {
            const double diff = tmpl[k] - J.sample(ox + dx, oy + dy);
            bx += diff * tgx[k];
            by += diff * tgy[k];
          }
        }
        const double ex = (g22 * bx - g12 * by) / det;
        const double ey = (g11 * by - g12 * bx) / det;
        vx += ex;
        vy += ey;
        if (ex * ex + ey * ey < eps2) {
          converged = true;
          break;
        }
      }
      if (l == 0 && !converged) ok = false;
      if (l > 0) {
        gx_total = 2.0 * (gx_total + vx);
        gy_total = 2.0 * (gy_total + vy);
      } else {
        gx_total += vx;
        gy_total += vy;
      }
    }
    if (!ok) continue;
    const Point2 moved{pt.x + gx_total, pt.y + gy_total};
    if (!window_inside(pt, half, prev) || !window_inside(moved, half, cur)) continue;
    out.push_back({pt, moved});
  }
  return out;
}

namespace {

double median(std::vector<double>& v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::vector<Correspondence> reject_outliers(const std::vector<Correspondence>& c, int width, int height,
                                            const OutlierParams& params) {
  if (width <= 0 || height <= 0 || params.grid < 1) {
    throw InvalidArgumentError("outlier rejection needs a positive frame size and grid");
  }
  const int g = params.grid;
  auto cell_of = [&](const Correspondence& m) {
    const int cx = std::clamp(static_cast<int>(std::floor(m.prev.x * g / width)), 0, g - 1);
    const int cy = std::clamp(static_cast<int>(std::floor(m.prev.y * g / height)), 0, g - 1);
    return cy * g + cx;
  };

  std::vector<std::vector<std::size_t>> cells(static_cast<std::size_t>(g) * g);
  for (std::size_t i = 0; i < c.size(); ++i) cells[static_cast<std::size_t>(cell_of(c[i]))].push_back(i);

  std::vector<bool> keep(c.size(), false);
  std::vector<double> xs, ys;
  for (const auto& members : cells) {
    if (members.empty()) continue;
    xs.clear();
    ys.clear();
    for (std::size_t i : members) {
      xs.push_back(c[i].dx());
      ys.push_back(c[i].dy());
    }
    const double mx = median(xs);
    const double my = median(ys);
    for (std::size_t i : members) {
      keep[i] = std::abs(c[i].dx() - mx) <= params.tol && std::abs(c[i].dy() - my) <= params.tol;
    }
  }
  std::vector<Correspondence> out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (keep[i]) out.push_back(c[i]);
  }
  return out;
}

namespace {

// Twice the signed area below which a 3-point sample is treated as collinear.
constexpr double kMinSampleArea = 1e-3;

bool solve_three(const Correspondence& p, const Correspondence& q, const Correspondence& r, AffineWarp& out) {
  Eigen::Matrix3d a;
  a << p.prev.x, p.prev.y, 1.0, q.prev.x, q.prev.y, 1.0, r.prev.x, r.prev.y, 1.0;
  const double det = a.determinant();
  if (!(std::abs(det) > kMinSampleArea)) return false;
  const Eigen::Matrix3d inv = a.inverse();
  const Eigen::Vector3d row1 = inv * Eigen::Vector3d(p.cur.x, q.cur.x, r.cur.x);
  const Eigen::Vector3d row2 = inv * Eigen::Vector3d(p.cur.y, q.cur.y, r.cur.y);
  out = {row1(0), row1(1), row1(2), row2(0), row2(1), row2(2)};
  return out.valid();
}

double reprojection_error(const AffineWarp& a, const Correspondence& m) {
  const auto [x, y] = a.apply(m.prev.x, m.prev.y);
  return std::hypot(x - m.cur.x, y - m.cur.y);
}

// Least-squares affine over the given correspondences, in centered coordinates.
bool refit(const std::vector<Correspondence>& c, const std::vector<std::size_t>& idx, AffineWarp& out) {
  if (idx.size() < 3) return false;
  double cx = 0, cy = 0;
  for (std::size_t i : idx) {
    cx += c[i].prev.x;
    cy += c[i].prev.y;
  }
  cx /= static_cast<double>(idx.size());
  cy /= static_cast<double>(idx.size());

  Eigen::MatrixXd a(static_cast<Eigen::Index>(idx.size()), 3);
  Eigen::MatrixXd b(static_cast<Eigen::Index>(idx.size()), 2);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const Correspondence& m = c[idx[k]];
    const auto r = static_cast<Eigen::Index>(k);
    a(r, 0) = m.prev.x - cx;
    a(r, 1) = m.prev.y - cy;
    a(r, 2) = 1.0;
    b(r, 0) = m.cur.x;
    b(r, 1) = m.cur.y;
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < 3) return false;
  const Eigen::MatrixXd sol = qr.solve(b);  // 3x2: rows m1, m2, offset
  // Undo the centering: x' = m1 (x - cx) + m2 (y - cy) + t.
  out = {sol(0, 0), sol(1, 0), sol(2, 0) - sol(0, 0) * cx - sol(1, 0) * cy,
         sol(0, 1), sol(1, 1), sol(2, 1) - sol(0, 1) * cx - sol(1, 1) * cy};
  return out.valid();
}

}  // namespace

AffineWarp ransac_affine(const std::vector<Correspondence>& c, const RansacParams& params) {
  const std::size_t n = c.size();
  if (n < 3) throw NoMotionError("need at least 3 correspondences, got " + std::to_string(n));
  if (params.iters < 1 || !(params.inlier_tol > 0.0)) throw InvalidArgumentError("invalid RANSAC parameters");

  // mt19937_64 output is fully specified, and indices are drawn by plain modulo, so the
  // sample sequence is identical on every platform.
  std::mt19937_64 rng(params.seed);
  auto draw = [&] { return static_cast<std::size_t>(rng() % n); };

  bool found = false;
  AffineWarp best;
  std::size_t best_count = 0;
  double best_err = 0.0;
  for (int it = 0; it < params.iters; ++it) {
    const std::size_t i = draw();
    std::size_t j = draw();
    while (j == i) j = draw();
    std::size_t k = draw();
    while (k == i || k == j) k = draw();

    AffineWarp model;
    if (!solve_three(c[i], c[j], c[k], model)) continue;
    std::size_t count = 0;
    double err_sum = 0.0;
    for (const Correspondence& m : c) {
      const double e = reprojection_error(model, m);
      if (e <= params.inlier_tol) {
        ++count;
        err_sum += e;
      }
    }
    if (!found || count > best_count || (count == best_count && err_sum < best_err)) {
      found = true;
      best = model;
      best_count = count;
      best_err = err_sum;
    }
  }
  if (!found) throw NoMotionError("all RANSAC samples were degenerate");

  std::vector<std::size_t> inliers;
  for (std::size_t i = 0; i < n; ++i) {
    if (reprojection_error(best, c[i]) <= params.inlier_tol) inliers.push_back(i);
  }
  AffineWarp fitted;
  if (refit(c, inliers, fitted)) return fitted;
  return best;
}

GmcResult estimate(const GrayImage& prev, const GrayImage& cur, const GmcConfig& cfg) {
  if (prev.width != cur.width || prev.height != cur.height) {
    throw ShapeMismatchError("motion estimation needs frames of equal size");
  }
  if (cfg.downscale < 1) throw InvalidArgumentError("downscale factor must be >= 1");
  const int k = cfg.downscale;
  const GrayImage p = downscale(prev, k);
  const GrayImage q = downscale(cur, k);
  require_size(p);

  GmcResult res;
  try {
    const auto corners = detect_corners(p, cfg.corners);
    const auto flow = track_flow(p, q, corners, cfg.flow);
    const auto kept = reject_outliers(flow, p.width, p.height, cfg.outliers);
    const AffineWarp small = ransac_affine(kept, cfg.ransac);
    if (k == 1) {
      res.warp = small;
    } else {
      // Block-mean pixel x sits at full-resolution coordinate k x + (k - 1) / 2.
      const double c = 0.5 * (k - 1);
      res.warp = small;
      res.warp.a13 = k * small.a13 + c - (small.a11 * c + small.a12 * c);
      res.warp.a23 = k * small.a23 + c - (small.a21 * c + small.a22 * c);
    }
  } catch (const NoMotionError& e) {
    res.warp = AffineWarp::identity();
    res.fallback = true;
    res.reason = e.what();
  }
  return res;
}

std::vector<GmcResult> estimate_sequence(std::size_t count, const std::function<GrayImage(std::size_t)>& load,
                                         const GmcConfig& cfg, unsigned threads) {
  std::vector<GmcResult> out(count);
  if (count < 2) return out;
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count - 1)));

  std::atomic<std::size_t> next{1};
  std::vector<std::exception_ptr> errors(threads);
  auto worker = [&](unsigned id) {
    try {
      for (std::size_t k = next++; k < count; k = next++) out[k] = estimate(load(k - 1), load(k), cfg);
    } catch (...) {
      errors[id] = std::current_exception();
      next = count;
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

WarpMap load_warps(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  WarpMap warps;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    long long frame = 0;
    AffineWarp a;
    if (!(ss >> frame >> a.a11 >> a.a12 >> a.a13 >> a.a21 >> a.a22 >> a.a23)) {
      throw ParseError(path.string(), line_no, "expected 'frame a11 a12 a13 a21 a22 a23'");
    }
    std::string extra;
    if (ss >> extra) throw ParseError(path.string(), line_no, "trailing field '" + extra + "'");
    if (frame < 1 || frame > std::numeric_limits<int>::max()) {
      throw ParseError(path.string(), line_no, "frame must be a positive integer");
    }
    if (!a.valid()) throw ParseError(path.string(), line_no, "degenerate or non-finite warp");
    if (!warps.emplace(static_cast<int>(frame), a).second) {
      throw ParseError(path.string(), line_no, "duplicate frame " + std::to_string(frame));
    }
  }
  return warps;
}

void save_warps(const std::filesystem::path& path, const WarpMap& warps) {
  std::string content;
  char buf[256];
  for (const auto& [frame, a] : warps) {
    std::snprintf(buf, sizeof buf, "%d %.17g %.17g %.17g %.17g %.17g %.17g\n", frame, a.a11, a.a12, a.a13, a.a21,
                  a.a22, a.a23);
    content += buf;
  }
  detail::write_file_atomically(path, content);
}

AffineWarp warp_for(const WarpMap& warps, int frame) {
  const auto it = warps.find(frame);
  return it == warps.end() ? AffineWarp::identity() : it->second;
}

}  // namespace botsort
