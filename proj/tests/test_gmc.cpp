#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "botsort/error.hpp"
#include "botsort/gmc.hpp"
#include "support/synthetic.hpp"

using namespace botsort;
using botsort::testing::inverse;
using botsort::testing::render;
using botsort::testing::rotation_about;
using botsort::testing::TextureField;

namespace {

constexpr double kPi = 3.14159265358979323846;

GrayImage white_square(int side = 80, int x0 = 30, int size = 20) {
  GrayImage img(side, side, 0.0f);
  for (int y = x0; y < x0 + size; ++y)
    for (int x = x0; x < x0 + size; ++x) img.at(x, y) = 1.0f;
  return img;
}

std::vector<Correspondence> warp_points(const AffineWarp& a, int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 640);
  std::vector<Correspondence> c;
  for (int i = 0; i < n; ++i) {
    const Point2 p{u(rng), u(rng)};
    const auto q = a.apply(p.x, p.y);
    c.push_back({p, {q[0], q[1]}});
  }
  return c;
}

double max_coeff_diff(const AffineWarp& a, const AffineWarp& b) {
  return std::max({std::abs(a.a11 - b.a11), std::abs(a.a12 - b.a12), std::abs(a.a13 - b.a13),
                   std::abs(a.a21 - b.a21), std::abs(a.a22 - b.a22), std::abs(a.a23 - b.a23)});
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("botsort_gmc_" + name);
}

}  // namespace

TEST(Corners, UniformImageHasNone) {
  EXPECT_TRUE(detect_corners(GrayImage(64, 64, 0.5f)).empty());
}

TEST(Corners, SquareYieldsItsFourCorners) {
  CornerParams p;
  p.min_dist = 5;
  const auto pts = detect_corners(white_square(), p);
  ASSERT_EQ(pts.size(), 4u);
  const double cs[2] = {29.5, 49.5};
  for (double cx : cs) {
    for (double cy : cs) {
      double best = 1e9;
      for (const auto& q : pts) best = std::min(best, std::hypot(q.x - cx, q.y - cy));
      EXPECT_LE(best, 1.5) << cx << "," << cy;
    }
  }
}

TEST(Corners, CountCappedAndSpaced) {
  const GrayImage img = render(TextureField(11), 160, 120);
  CornerParams p;
  p.max_corners = 25;
  p.min_dist = 6;
  const auto pts = detect_corners(img, p);
  EXPECT_LE(pts.size(), 25u);
  EXPECT_GT(pts.size(), 0u);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      EXPECT_GE(std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y), 6.0);
}

TEST(Corners, TinyImageRejected) {
  EXPECT_THROW(detect_corners(GrayImage(10, 10, 0.0f)), InvalidArgumentError);
}

TEST(Flow, IdentityGivesZeroDisplacement) {
  const GrayImage img = render(TextureField(12), 160, 120);
  const auto pts = detect_corners(img);
  const auto c = track_flow(img, img, pts);
  ASSERT_FALSE(c.empty());
  for (const auto& k : c) {
    EXPECT_NEAR(k.dx(), 0.0, 1e-6);
    EXPECT_NEAR(k.dy(), 0.0, 1e-6);
  }
}

TEST(Flow, IntegerShiftRecovered) {
  const TextureField field(13);
  const GrayImage prev = render(field, 200, 150);
  const GrayImage cur = render(field, 200, 150, AffineWarp::translation(3, 0));
  const auto c = track_flow(prev, cur, detect_corners(prev));
  ASSERT_GT(c.size(), 20u);
  int good = 0;
  for (const auto& k : c) good += std::abs(k.dx() - 3.0) < 0.2 && std::abs(k.dy()) < 0.2;
  EXPECT_EQ(good, static_cast<int>(c.size()));
}

TEST(Flow, FlatPatchDropped) {
  const GrayImage flat(100, 100, 0.3f);
  EXPECT_TRUE(track_flow(flat, flat, {{50, 50}}).empty());
}

TEST(Outliers, ConsistentDisplacementsKept) {
  std::vector<Correspondence> c;
  for (int i = 0; i < 50; ++i) c.push_back({{double(i * 10), double(i * 7)}, {i * 10 + 2.0, i * 7 - 1.0}});
  EXPECT_EQ(reject_outliers(c, 640, 640).size(), c.size());
}

TEST(Outliers, MedianRuleDropsStray) {
  std::vector<Correspondence> c;
  for (int i = 0; i < 99; ++i) c.push_back({{10.0 + (i % 10), 10.0 + i / 10}, {15.0 + (i % 10), 10.0 + i / 10}});
  c.push_back({{12, 12}, {52, 52}});
  const auto kept = reject_outliers(c, 640, 480);
  ASSERT_EQ(kept.size(), 99u);
  for (const auto& k : kept) EXPECT_EQ(k.dx(), 5.0);
}

TEST(Outliers, SmoothRotationFieldSurvives) {
  std::mt19937_64 rng(5);
  const auto c = warp_points(rotation_about(1.0, 320, 320), 400, rng);
  EXPECT_EQ(reject_outliers(c, 640, 640).size(), c.size());
}

TEST(Ransac, ZeroMotionIsIdentity) {
  std::mt19937_64 rng(6);
  const AffineWarp a = ransac_affine(warp_points(AffineWarp::identity(), 40, rng));
  EXPECT_LT(max_coeff_diff(a, AffineWarp::identity()), 1e-9);
}

TEST(Ransac, ExactWarpRecovered) {
  std::mt19937_64 rng(7);
  const AffineWarp truth{1, 0, 5, 0, 1, -3};
  EXPECT_LT(max_coeff_diff(ransac_affine(warp_points(truth, 50, rng)), truth), 1e-6);
}

TEST(Ransac, RobustToOutliers) {
  std::mt19937_64 rng(8);
  const AffineWarp truth{1.01, 0.02, 4, -0.015, 0.99, -6};
  auto c = warp_points(truth, 200, rng);
  std::uniform_real_distribution<double> u(0, 640);
  for (int i = 0; i < 60; ++i) c.push_back({{u(rng), u(rng)}, {u(rng), u(rng)}});
  const AffineWarp est = ransac_affine(c);
  double err = 0;
  for (int i = 0; i < 200; ++i) {
    const auto q = est.apply(c[i].prev.x, c[i].prev.y);
    err += std::hypot(q[0] - c[i].cur.x, q[1] - c[i].cur.y);
  }
  EXPECT_LT(err / 200, 1e-3);
}

TEST(Ransac, SeedDeterministic) {
  std::mt19937_64 rng(9);
  auto c = warp_points({1, 0, 2, 0, 1, 1}, 100, rng);
  std::uniform_real_distribution<double> u(0, 640);
  for (int i = 0; i < 40; ++i) c.push_back({{u(rng), u(rng)}, {u(rng), u(rng)}});
  EXPECT_EQ(ransac_affine(c, {200, 1.5, 42}), ransac_affine(c, {200, 1.5, 42}));
}

TEST(Ransac, TooFewOrDegenerateThrows) {
  EXPECT_THROW(ransac_affine({{{0, 0}, {1, 1}}, {{1, 1}, {2, 2}}}), NoMotionError);
  std::vector<Correspondence> line;
  for (int i = 0; i < 10; ++i) line.push_back({{double(i), double(i)}, {i + 1.0, double(i)}});
  EXPECT_THROW(ransac_affine(line), NoMotionError);
}

TEST(Estimate, StaticSceneIsIdentity) {
  const GrayImage img = render(TextureField(14), 200, 150);
  const GmcResult r = estimate(img, img);
  EXPECT_FALSE(r.fallback);
  EXPECT_LT(max_coeff_diff(r.warp, AffineWarp::identity()), 1e-6);
}

TEST(Estimate, TranslationRecovered) {
  const TextureField field(15);
  const GmcResult r = estimate(render(field, 320, 240), render(field, 320, 240, AffineWarp::translation(7, -4)));
  ASSERT_FALSE(r.fallback);
  EXPECT_NEAR(r.warp.a13, 7.0, 0.3);
  EXPECT_NEAR(r.warp.a23, -4.0, 0.3);
}

TEST(Estimate, RotationRecovered) {
  const TextureField field(16);
  const AffineWarp rot = rotation_about(2.0, 160, 120);
  const GmcResult r = estimate(render(field, 320, 240), render(field, 320, 240, rot));
  ASSERT_FALSE(r.fallback);
  const double c = std::cos(2.0 * kPi / 180), s = std::sin(2.0 * kPi / 180);
  EXPECT_NEAR(r.warp.a11, c, 1e-2);
  EXPECT_NEAR(r.warp.a12, -s, 1e-2);
  EXPECT_NEAR(r.warp.a21, s, 1e-2);
  EXPECT_NEAR(r.warp.a22, c, 1e-2);
  EXPECT_NEAR(r.warp.a13, rot.a13, 1.0);
  EXPECT_NEAR(r.warp.a23, rot.a23, 1.0);
}

TEST(Estimate, DownscaledAgreesWithFullResolution) {
  const TextureField field(17);
  const AffineWarp motion{1.0, 0.0, 6, 0.0, 1.0, 3};
  const GrayImage a = render(field, 320, 240), b = render(field, 320, 240, motion);
  GmcConfig half;
  half.downscale = 2;
  const GmcResult full = estimate(a, b), down = estimate(a, b, half);
  ASSERT_FALSE(down.fallback);
  EXPECT_NEAR(down.warp.a13, full.warp.a13, 0.5);
  EXPECT_NEAR(down.warp.a23, full.warp.a23, 0.5);
  EXPECT_NEAR(down.warp.a11, full.warp.a11, 2e-2);
  EXPECT_NEAR(down.warp.a22, full.warp.a22, 2e-2);
}

TEST(Estimate, TexturelessFallsBackToIdentity) {
  const GrayImage flat(100, 100, 0.5f);
  const GmcResult r = estimate(flat, flat);
  EXPECT_TRUE(r.fallback);
  EXPECT_EQ(r.warp, AffineWarp::identity());
  EXPECT_FALSE(r.reason.empty());
}

TEST(Estimate, SequenceMatchesPairwiseAndThreadCount) {
  const TextureField field(18);
  std::vector<GrayImage> frames;
  for (int k = 0; k < 5; ++k) frames.push_back(render(field, 160, 120, AffineWarp::translation(2.0 * k, -k)));
  auto load = [&](std::size_t k) { return frames[k]; };
  const auto one = estimate_sequence(frames.size(), load, {}, 1);
  const auto four = estimate_sequence(frames.size(), load, {}, 4);
  ASSERT_EQ(one.size(), frames.size());
  EXPECT_EQ(one[0].warp, AffineWarp::identity());
  for (std::size_t k = 0; k < one.size(); ++k) EXPECT_EQ(one[k].warp, four[k].warp);
  EXPECT_EQ(one[3].warp, estimate(frames[2], frames[3]).warp);
}

TEST(WarpFile, ParsesFieldsAndDefaultsToIdentity) {
  const auto path = temp_file("parse.txt");
  std::ofstream(path) << "2 1 0 5 0 1 -3\n";
  const WarpMap m = load_warps(path);
  EXPECT_EQ(warp_for(m, 2), AffineWarp::translation(5, -3));
  EXPECT_EQ(warp_for(m, 7), AffineWarp::identity());
  std::filesystem::remove(path);
}

TEST(WarpFile, RoundTrip) {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-1, 1);
  WarpMap m;
  for (int f = 2; f < 40; ++f) m[f] = {1 + 0.01 * u(rng), 0.01 * u(rng), 30 * u(rng), 0.01 * u(rng), 1 + 0.01 * u(rng), 30 * u(rng)};
  const auto path = temp_file("roundtrip.txt");
  save_warps(path, m);
  const WarpMap back = load_warps(path);
  ASSERT_EQ(back.size(), m.size());
  for (const auto& [f, w] : m) EXPECT_LT(max_coeff_diff(back.at(f), w), 1e-9);
  std::filesystem::remove(path);
}

TEST(WarpFile, MalformedLineReportsLineNumber) {
  const auto path = temp_file("bad.txt");
  std::ofstream(path) << "2 1 0 5 0 1 -3\n3 1 0 oops 0 1 0\n";
  try {
    load_warps(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::filesystem::remove(path);
}

TEST(WarpFile, DegenerateWarpRejected) {
  const auto path = temp_file("degenerate.txt");
  std::ofstream(path) << "2 0 0 0 0 0 0\n";
  EXPECT_THROW(load_warps(path), Error);
  std::filesystem::remove(path);
}

TEST(Synthetic, RenderMotionConvention) {
  const TextureField field(20);
  const AffineWarp m = rotation_about(3.0, 50, 40);
  const GrayImage a = render(field, 100, 80), b = render(field, 100, 80, m);
  const auto q = m.apply(40, 30);
  EXPECT_NEAR(b.sample(q[0], q[1]), a.at(40, 30), 1e-5);
  EXPECT_LT(max_coeff_diff(inverse(m).after(m), AffineWarp::identity()), 1e-12);
}
