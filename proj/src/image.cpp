#include "botsort/image.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

#include "botsort/error.hpp"

namespace botsort {

GrayImage::GrayImage(int w, int h, float fill) : width(w), height(h) {
  if (w < 0 || h < 0) throw InvalidArgumentError("image dimensions must be non-negative");
  pixels.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill);
}

float GrayImage::clamped(int x, int y) const noexcept {
  x = std::clamp(x, 0, width - 1);
  y = std::clamp(y, 0, height - 1);
  return at(x, y);
}

float GrayImage::sample(double x, double y) const noexcept {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const int x0 = static_cast<int>(fx);
  const int y0 = static_cast<int>(fy);
  const double ax = x - fx;
  const double ay = y - fy;
  const double top = (1.0 - ax) * clamped(x0, y0) + ax * clamped(x0 + 1, y0);
  const double bot = (1.0 - ax) * clamped(x0, y0 + 1) + ax * clamped(x0 + 1, y0 + 1);
  return static_cast<float>((1.0 - ay) * top + ay * bot);
}

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in, const std::string& source) {
  std::string tok;
  while (true) {
    int c = in.peek();
    if (c == EOF) throw ParseError(source, 0, "truncated PGM header");
    if (std::isspace(c)) {
      in.get();
    } else if (c == '#') {
      std::string comment;
      std::getline(in, comment);
    } else {
      break;
    }
  }
  while (in.peek() != EOF && !std::isspace(in.peek())) tok.push_back(static_cast<char>(in.get()));
  return tok;
}

int header_int(std::istream& in, const std::string& source) {
  const std::string tok = header_token(in, source);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size() || v <= 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(source, 0, "bad PGM header field '" + tok + "'");
  }
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  const std::string source = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + source);
  if (header_token(in, source) != "P5") throw ParseError(source, 0, "not a binary PGM (P5)");
  const int w = header_int(in, source);
  const int h = header_int(in, source);
  const int maxval = header_int(in, source);
  if (maxval > 65535) throw ParseError(source, 0, "PGM maxval out of range");
  in.get();  // single whitespace before raster

  GrayImage img(w, h);
  const std::size_t n = img.pixels.size();
  const float scale = 1.0f / static_cast<float>(maxval);
  if (maxval < 256) {
    std::vector<unsigned char> raw(n);
    if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n))) {
      throw ParseError(source, 0, "truncated PGM raster");
    }
    for (std::size_t i = 0; i < n; ++i) img.pixels[i] = static_cast<float>(raw[i]) * scale;
  } else {
    std::vector<unsigned char> raw(2 * n);
    if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(2 * n))) {
      throw ParseError(source, 0, "truncated PGM raster");
    }
    for (std::size_t i = 0; i < n; ++i) {
      img.pixels[i] = static_cast<float>((raw[2 * i] << 8) | raw[2 * i + 1]) * scale;
    }
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  std::vector<unsigned char> raw(img.pixels.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    raw[i] = static_cast<unsigned char>(std::lround(std::clamp(img.pixels[i], 0.0f, 1.0f) * 255.0f));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

GrayImage pyr_down(const GrayImage& img) {
  static constexpr std::array<float, 5> kTaps{1.f / 16, 4.f / 16, 6.f / 16, 4.f / 16, 1.f / 16};
  const int w = (img.width + 1) / 2;
  const int h = (img.height + 1) / 2;

  // Horizontal pass at decimated columns, full rows.
  GrayImage rows(w, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < w; ++x) {
      float acc = 0.f;
      for (int k = 0; k < 5; ++k) acc += kTaps[k] * img.clamped(2 * x + k - 2, y);
      rows.at(x, y) = acc;
    }
  }
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float acc = 0.f;
      for (int k = 0; k < 5; ++k) acc += kTaps[k] * rows.clamped(x, 2 * y + k - 2);
      out.at(x, y) = acc;
    }
  }
  return out;
}

GrayImage downscale(const GrayImage& img, int factor) {
  if (factor < 1) throw InvalidArgumentError("downscale factor must be >= 1");
  if (factor == 1) return img;
  GrayImage out(img.width / factor, img.height / factor);
  const float norm = 1.0f / static_cast<float>(factor * factor);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      float acc = 0.f;
      for (int dy = 0; dy < factor; ++dy) {
        for (int dx = 0; dx < factor; ++dx) acc += img.at(x * factor + dx, y * factor + dy);
      }
      out.at(x, y) = acc * norm;
    }
  }
  return out;
}

}  // namespace botsort
