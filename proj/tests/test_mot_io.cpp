#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "botsort/error.hpp"
#include "botsort/mot_io.hpp"

using namespace botsort;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("botsort_io_" + name);
}

}  // namespace

TEST(MotIo, ParsesDetectionLine) {
  const auto rows = parse_mot_rows("1,-1,100.0,200.0,50.0,80.0,0.9,-1,-1,-1\n");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].frame, 1);
  EXPECT_EQ(rows[0].box, (BBox{100, 200, 50, 80}));
  EXPECT_EQ(rows[0].conf, 0.9);
}

TEST(MotIo, SevenFieldsAccepted) {
  EXPECT_EQ(parse_mot_rows("3,2,1,2,3,4,1\n").size(), 1u);
}

TEST(MotIo, MalformedLineReportsLineNumber) {
  try {
    parse_mot_rows("1,-1,1,2,3,4,0.9\n2,-1,abc,2,3,4,0.9\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_mot_rows("1,2,3\n"), ParseError);
}

TEST(MotIo, InvalidExtentDroppedWithWarning) {
  int warnings = 0;
  const auto rows =
      parse_mot_rows("1,-1,1,2,-3,4,0.9\n1,-1,1,2,3,4,0.9\n", "<t>", [&](const std::string&) { ++warnings; });
  EXPECT_EQ(rows.size(), 1u);
  EXPECT_EQ(warnings, 1);
}

TEST(MotIo, ShuffledFramesGroupedInFileOrder) {
  const auto path = temp_file("shuffled.txt");
  std::ofstream(path) << "3,-1,0,0,1,1,0.9\n1,-1,5,0,1,1,0.8\n3,-1,7,0,1,1,0.7\n1,-1,6,0,1,1,0.6\n";
  const DetectionsByFrame d = read_detections(path);
  ASSERT_EQ(d.size(), 2u);
  ASSERT_EQ(d.at(1).size(), 2u);
  EXPECT_EQ(d.at(1)[0].box.x, 5);
  EXPECT_EQ(d.at(1)[1].box.x, 6);
  EXPECT_EQ(d.at(3)[1].score, 0.7);
  EXPECT_FALSE(d.count(2));
  std::filesystem::remove(path);
}

TEST(MotIo, EmptyFileHasNoDetections) {
  const auto path = temp_file("empty.txt");
  std::ofstream(path).close();
  EXPECT_TRUE(read_detections(path).empty());
  std::filesystem::remove(path);
}

TEST(MotIo, MissingFileIsIoError) {
  EXPECT_THROW(read_detections(temp_file("does_not_exist.txt")), IoError);
}

TEST(MotIo, ScoreOutsideUnitRangeRejected) {
  const auto path = temp_file("score.txt");
  std::ofstream(path) << "1,-1,0,0,1,1,1.5\n";
  EXPECT_THROW(read_detections(path), ParseError);
  std::filesystem::remove(path);
}

TEST(Embeddings, BinaryRoundTrip) {
  std::mt19937_64 rng(41);
  std::normal_distribution<float> n;
  std::vector<EmbeddingRecord> recs;
  for (int f = 1; f <= 3; ++f)
    for (int i = 0; i < 4; ++i) {
      EmbeddingRecord r{f, i, std::vector<float>(8)};
      for (float& v : r.vector) v = n(rng);
      recs.push_back(r);
    }
  const auto path = temp_file("emb.bin");
  write_embeddings(path, recs);
  const auto back = read_embedding_records(path);
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t k = 0; k < recs.size(); ++k) {
    EXPECT_EQ(back[k].frame, recs[k].frame);
    EXPECT_EQ(back[k].det_index, recs[k].det_index);
    for (std::size_t d = 0; d < 8; ++d) EXPECT_NEAR(back[k].vector[d], recs[k].vector[d], 1e-6);
  }
  std::filesystem::remove(path);
}

TEST(Embeddings, CsvFallback) {
  const auto path = temp_file("emb.csv");
  std::ofstream(path) << "1,0,3,4\n1,1,0,2\n";
  DetectionsByFrame d;
  d[1] = {{{0, 0, 1, 1}, 0.9, std::nullopt}, {{5, 0, 1, 1}, 0.9, std::nullopt}};
  read_embeddings(path, d);
  ASSERT_TRUE(d[1][0].embedding.has_value());
  EXPECT_NEAR((*d[1][0].embedding)[0], 0.6, 1e-12);
  EXPECT_NEAR((*d[1][0].embedding)[1], 0.8, 1e-12);
  EXPECT_NEAR((*d[1][1].embedding)[1], 1.0, 1e-12);
  std::filesystem::remove(path);
}

TEST(Embeddings, AttachedByFrameAndIndex) {
  DetectionsByFrame d;
  d[2] = {{{0, 0, 1, 1}, 0.9, std::nullopt}};
  d[3] = {{{0, 0, 1, 1}, 0.9, std::nullopt}, {{5, 0, 1, 1}, 0.9, std::nullopt}};
  const std::vector<EmbeddingRecord> recs{{3, 0, {0, 2}}};
  attach_embeddings(d, recs);
  EXPECT_FALSE(d[2][0].embedding.has_value());
  ASSERT_TRUE(d[3][0].embedding.has_value());
  EXPECT_EQ(*d[3][0].embedding, (Embedding{0, 1}));
  EXPECT_FALSE(d[3][1].embedding.has_value());
}

TEST(Embeddings, DimensionMismatchRejected) {
  const auto path = temp_file("mismatch.csv");
  std::ofstream(path) << "1,0,3,4\n1,1,0,2,5\n";
  EXPECT_THROW(read_embedding_records(path), ParseError);
  std::filesystem::remove(path);
  EXPECT_THROW(write_embeddings(path, std::vector<EmbeddingRecord>{{1, 0, {1, 2}}, {1, 1, {1}}}),
               ShapeMismatchError);
}

TEST(Embeddings, BadMagicRejected) {
  const auto path = temp_file("magic.bin");
  std::ofstream(path) << "XXXX\x04\0\0\0";
  EXPECT_THROW(read_embedding_records(path), ParseError);
  std::filesystem::remove(path);
}

TEST(Embeddings, UnknownDetectionRejected) {
  DetectionsByFrame d;
  d[1] = {{{0, 0, 1, 1}, 0.9, std::nullopt}};
  const std::vector<EmbeddingRecord> recs{{1, 3, {1, 0}}};
  EXPECT_THROW(attach_embeddings(d, recs), InvalidArgumentError);
  const std::vector<EmbeddingRecord> zero{{1, 0, {0, 0}}};
  EXPECT_THROW(attach_embeddings(d, zero), InvalidArgumentError);
}

TEST(Results, SortedFixedPointLines) {
  std::vector<MotRow> rows{{2, 1, {1, 2, 3, 4}, 0.5}, {1, 2, {1.234, 2, 3, 4}, 0.9}, {1, 1, {0, 0, 1, 1}, 1.0}};
  EXPECT_EQ(format_results(rows),
            "1,1,0.00,0.00,1.00,1.00,1.000000,-1,-1,-1\n"
            "1,2,1.23,2.00,3.00,4.00,0.900000,-1,-1,-1\n"
            "2,1,1.00,2.00,3.00,4.00,0.500000,-1,-1,-1\n");
}

TEST(Results, TrackletConversionRoundTrip) {
  const std::vector<MotRow> rows{{1, 1, {0, 0, 1, 1}, 0.9}, {2, 1, {1, 0, 1, 1}, 0.8}, {1, 2, {5, 5, 1, 1}, 0.7}};
  const auto t = rows_to_tracklets(rows);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].entries.size(), 2u);
  EXPECT_EQ(format_results(tracklets_to_rows(t)), format_results(rows));
}

TEST(Results, EvalFramesIgnoreInactiveGroundTruth) {
  const std::vector<MotRow> gt{{1, 1, {0, 0, 1, 1}, 1.0}, {1, 2, {5, 5, 1, 1}, 0.0}, {3, 1, {0, 0, 1, 1}, 1.0}};
  const std::vector<MotRow> res{{2, 7, {0, 0, 1, 1}, 0.9}};
  const auto frames = build_eval_frames(gt, res);
  ASSERT_EQ(frames.size(), 3u);
  EXPECT_EQ(frames[0].gt.size(), 1u);
  EXPECT_EQ(frames[1].pred.size(), 1u);
  EXPECT_EQ(frames[2].frame, 3);
}
