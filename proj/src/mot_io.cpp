#include "botsort/mot_io.hpp"

#include <algorithm>
#include <array>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <cctype>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "botsort/error.hpp"
#include "detail/atomic_write.hpp"

namespace botsort {

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_double(std::string_view tok, double& out) {
  if (tok.empty()) return false;
  const std::string s(tok);
  char* end = nullptr;
  errno = 0;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && errno != ERANGE && std::isfinite(out);
}

bool parse_int(std::string_view tok, long long& out) {
  double v = 0.0;
  if (!parse_double(tok, v) || v != std::floor(v) || std::abs(v) > 2e9) return false;
  out = static_cast<long long>(v);
  return true;
}

// Iterates non-blank lines with their 1-based numbers.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find('\n', start);
    const std::string_view line =
        text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    ++line_no;
    if (!trim(line).empty()) fn(line_no, trim(line));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
}

}  // namespace

std::vector<MotRow> parse_mot_rows(std::string_view text, const std::string& source, const WarningFn& warn) {
  std::vector<MotRow> rows;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto f = split_fields(line, ',');
    if (f.size() < 7) throw ParseError(source, line_no, "expected at least 7 comma-separated fields");
    long long frame = 0, id = 0;
    std::array<double, 5> v{};
    if (!parse_int(f[0], frame) || frame < 1) throw ParseError(source, line_no, "bad frame '" + std::string(f[0]) + "'");
    if (!parse_int(f[1], id)) throw ParseError(source, line_no, "bad id '" + std::string(f[1]) + "'");
    for (std::size_t k = 0; k < 5; ++k) {
      if (!parse_double(f[k + 2], v[k])) {
        throw ParseError(source, line_no, "bad number '" + std::string(f[k + 2]) + "'");
      }
    }
    MotRow row;
    row.frame = static_cast<int>(frame);
    row.id = static_cast<int>(id);
    row.box = {v[0], v[1], v[2], v[3]};
    row.conf = v[4];
    double* tail[3] = {&row.x, &row.y, &row.z};
    for (std::size_t k = 7; k < f.size() && k < 10; ++k) {
      if (!parse_double(f[k], *tail[k - 7])) {
        throw ParseError(source, line_no, "bad number '" + std::string(f[k]) + "'");
      }
    }
    if (!row.box.valid()) {
      if (warn) warn(source + ":" + std::to_string(line_no) + ": dropping box with non-positive extent");
      return;
    }
    rows.push_back(row);
  });
  return rows;
}

std::vector<MotRow> read_mot_rows(const std::filesystem::path& path, const WarningFn& warn) {
  return parse_mot_rows(slurp(path), path.string(), warn);
}

DetectionsByFrame read_detections(const std::filesystem::path& path, const WarningFn& warn) {
  DetectionsByFrame out;
  for (const MotRow& r : read_mot_rows(path, warn)) {
    if (!(r.conf >= 0.0 && r.conf <= 1.0)) {
      throw ParseError(path.string(), 0,
                       "detection score " + std::to_string(r.conf) + " in frame " + std::to_string(r.frame) +
                           " outside [0, 1]");
    }
    out[r.frame].push_back({r.box, r.conf, std::nullopt});
  }
  return out;
}

namespace {

constexpr char kMagic[4] = {'B', 'T', 'E', 'B'};

std::uint32_t load_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

void store_u32(std::string& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xffu));
}

float load_f32(const unsigned char* p) {
  const std::uint32_t bits = load_u32(p);
  float f;
  static_assert(sizeof f == sizeof bits);
  std::memcpy(&f, &bits, sizeof f);
  return f;
}

std::vector<EmbeddingRecord> parse_binary_embeddings(const std::string& data, const std::string& source) {
  const auto* p = reinterpret_cast<const unsigned char*>(data.data());
  if (data.size() < 8) throw ParseError(source, 0, "truncated embedding header");
  const std::uint32_t dim = load_u32(p + 4);
  if (dim == 0) throw ParseError(source, 0, "embedding dimension is zero");
  const std::size_t rec_size = 8 + 4 * static_cast<std::size_t>(dim);
  const std::size_t body = data.size() - 8;
  if (body % rec_size != 0) throw ParseError(source, 0, "embedding file size is not a whole number of records");
  std::vector<EmbeddingRecord> out;
  out.reserve(body / rec_size);
  for (std::size_t off = 8; off < data.size(); off += rec_size) {
    EmbeddingRecord r;
    const std::uint32_t frame = load_u32(p + off);
    const std::uint32_t idx = load_u32(p + off + 4);
    if (frame > static_cast<std::uint32_t>(std::numeric_limits<int>::max()) ||
        idx > static_cast<std::uint32_t>(std::numeric_limits<int>::max())) {
      throw ParseError(source, 0, "record " + std::to_string(out.size()) + ": index out of range");
    }
    r.frame = static_cast<int>(frame);
    r.det_index = static_cast<int>(idx);
    r.vector.resize(dim);
    for (std::uint32_t k = 0; k < dim; ++k) r.vector[k] = load_f32(p + off + 8 + 4 * k);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<EmbeddingRecord> parse_csv_embeddings(const std::string& data, const std::string& source) {
  std::vector<EmbeddingRecord> out;
  std::size_t dim = 0;
  for_each_line(data, [&](std::size_t line_no, std::string_view line) {
    const auto f = split_fields(line, ',');
    long long frame = 0, idx = 0;
    if (f.size() < 3 || !parse_int(f[0], frame) || !parse_int(f[1], idx) || frame < 1 || idx < 0) {
      throw ParseError(source, line_no, "expected 'frame,det_index,v0,...'");
    }
    if (dim == 0) dim = f.size() - 2;
    if (f.size() - 2 != dim) {
      throw ParseError(source, line_no,
                       "embedding has " + std::to_string(f.size() - 2) + " values, expected " + std::to_string(dim));
    }
    EmbeddingRecord r{static_cast<int>(frame), static_cast<int>(idx), {}};
    r.vector.reserve(dim);
    for (std::size_t k = 2; k < f.size(); ++k) {
      double v = 0.0;
      if (!parse_double(f[k], v)) throw ParseError(source, line_no, "bad number '" + std::string(f[k]) + "'");
      r.vector.push_back(static_cast<float>(v));
    }
    out.push_back(std::move(r));
  });
  return out;
}

}  // namespace

std::vector<EmbeddingRecord> read_embedding_records(const std::filesystem::path& path) {
  const std::string data = slurp(path);
  if (data.size() >= 4 && std::equal(kMagic, kMagic + 4, data.begin())) {
    return parse_binary_embeddings(data, path.string());
  }
  const std::string_view head = trim(data);
  if (!head.empty() && !(std::isdigit(static_cast<unsigned char>(head.front())) || head.front() == '+')) {
    throw ParseError(path.string(), 0, "bad magic: neither a BTEB binary nor a CSV embedding file");
  }
  return parse_csv_embeddings(data, path.string());
}

void write_embeddings(const std::filesystem::path& path, std::span<const EmbeddingRecord> records) {
  std::string out(kMagic, 4);
  const std::size_t dim = records.empty() ? 0 : records.front().vector.size();
  store_u32(out, static_cast<std::uint32_t>(dim));
  for (const EmbeddingRecord& r : records) {
    if (r.vector.size() != dim) throw ShapeMismatchError("embedding records differ in dimension");
    if (r.frame < 0 || r.det_index < 0) throw InvalidArgumentError("negative embedding record index");
    store_u32(out, static_cast<std::uint32_t>(r.frame));
    store_u32(out, static_cast<std::uint32_t>(r.det_index));
    for (float v : r.vector) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      store_u32(out, bits);
    }
  }
  detail::write_file_atomically(path, out);
}

void attach_embeddings(DetectionsByFrame& dets, std::span<const EmbeddingRecord> records) {
  std::set<std::pair<int, int>> seen;
  std::size_t dim = 0;
  for (const EmbeddingRecord& r : records) {
    const std::string where = "embedding for frame " + std::to_string(r.frame) + ", detection " +
                              std::to_string(r.det_index);
    if (dim == 0) dim = r.vector.size();
    if (r.vector.size() != dim || dim == 0) throw ShapeMismatchError(where + ": inconsistent dimension");
    const auto it = dets.find(r.frame);
    if (it == dets.end() || r.det_index < 0 || static_cast<std::size_t>(r.det_index) >= it->second.size()) {
      throw InvalidArgumentError(where + ": no such detection");
    }
    if (!seen.emplace(r.frame, r.det_index).second) throw InvalidArgumentError(where + ": duplicate record");
    double sq = 0.0;
    for (float v : r.vector) {
      if (!std::isfinite(v)) throw InvalidArgumentError(where + ": non-finite value");
      sq += static_cast<double>(v) * v;
    }
    const double norm = std::sqrt(sq);
    if (!(norm > 0.0)) throw InvalidArgumentError(where + ": zero vector");
    Embedding e(dim);
    for (std::size_t k = 0; k < dim; ++k) e[k] = r.vector[k] / norm;
    it->second[static_cast<std::size_t>(r.det_index)].embedding = std::move(e);
  }
}

void read_embeddings(const std::filesystem::path& path, DetectionsByFrame& dets) {
  attach_embeddings(dets, read_embedding_records(path));
}

std::string format_results(std::vector<MotRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const MotRow& a, const MotRow& b) {
    return a.frame != b.frame ? a.frame < b.frame : a.id < b.id;
  });
  std::string out;
  char buf[256];
  for (const MotRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.2f,%.2f,%.2f,%.2f,%.6f,-1,-1,-1\n", r.frame, r.id, r.box.x, r.box.y,
                  r.box.w, r.box.h, r.conf);
    out += buf;
  }
  return out;
}

void write_results(const std::filesystem::path& path, std::vector<MotRow> rows) {
  detail::write_file_atomically(path, format_results(std::move(rows)));
}

std::vector<TrackletSeries> rows_to_tracklets(std::span<const MotRow> rows) {
  std::map<int, std::vector<TrackletEntry>> by_id;
  for (const MotRow& r : rows) by_id[r.id].push_back({r.frame, r.box, r.conf});
  std::vector<TrackletSeries> out;
  for (auto& [id, entries] : by_id) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const TrackletEntry& a, const TrackletEntry& b) { return a.frame < b.frame; });
    out.push_back({id, std::move(entries)});
  }
  return out;
}

std::vector<MotRow> tracklets_to_rows(std::span<const TrackletSeries> tracklets) {
  std::vector<MotRow> rows;
  for (const TrackletSeries& t : tracklets) {
    for (const TrackletEntry& e : t.entries) rows.push_back({e.frame, t.id, e.box, e.score, -1.0, -1.0, -1.0});
  }
  return rows;
}

std::vector<EvalFrame> build_eval_frames(std::span<const MotRow> gt, std::span<const MotRow> results) {
  std::map<int, EvalFrame> frames;
  for (const MotRow& r : gt) {
    if (r.conf == 0.0) continue;
    EvalFrame& f = frames[r.frame];
    f.frame = r.frame;
    f.gt.push_back({r.id, r.box});
  }
  for (const MotRow& r : results) {
    EvalFrame& f = frames[r.frame];
    f.frame = r.frame;
    f.pred.push_back({r.id, r.box});
  }
  std::vector<EvalFrame> out;
  out.reserve(frames.size());
  for (auto& [frame, f] : frames) out.push_back(std::move(f));
  return out;
}

}  // namespace botsort
