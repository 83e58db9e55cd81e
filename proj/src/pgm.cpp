#include "pgm.hpp"

#include <cmath>
#include <fstream>
#include <string>

namespace fusqa {

namespace {

struct RawPgm {
  int width = 0;
  int height = 0;
  int maxval = 0;
  std::vector<uint8_t> bytes;
};

void write_p5(const std::filesystem::path& path, int w, int h,
              const std::vector<uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  f << "P5\n" << w << " " << h << "\n255\n";
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw DataError("write failed for " + path.string());
}

int next_header_int(std::istream& in, const std::string& path) {
  // Skips whitespace and '#' comment lines, per the PNM spec.
  int ch = in.get();
  while (ch != EOF) {
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = in.get();
    } else if (std::isspace(ch)) {
      ch = in.get();
    } else {
      break;
    }
  }
  if (ch == EOF) throw DataError("truncated PGM header in " + path);
  std::string tok;
  while (ch != EOF && !std::isspace(ch)) {
    tok.push_back(static_cast<char>(ch));
    ch = in.get();
  }
  try {
    return std::stoi(tok);
  } catch (const std::exception&) {
    throw DataError("malformed PGM header in " + path);
  }
}

RawPgm read_p5(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot read " + path.string());
  char magic[2] = {0, 0};
  f.read(magic, 2);
  if (!f || magic[0] != 'P' || magic[1] != '5') {
    throw DataError("not a binary PGM (P5) file: " + path.string());
  }
  RawPgm pgm;
  pgm.width = next_header_int(f, path.string());
  pgm.height = next_header_int(f, path.string());
  pgm.maxval = next_header_int(f, path.string());
  if (pgm.width <= 0 || pgm.height <= 0 || pgm.maxval != 255) {
    throw DataError("unsupported PGM geometry or maxval in " + path.string());
  }
  const size_t n = static_cast<size_t>(pgm.width) * pgm.height;
  pgm.bytes.resize(n);
  f.read(reinterpret_cast<char*>(pgm.bytes.data()), static_cast<std::streamsize>(n));
  if (static_cast<size_t>(f.gcount()) != n) {
    throw DataError("truncated PGM pixel data in " + path.string());
  }
  return pgm;
}

}  // namespace

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  std::vector<uint8_t> bytes(image.data.size());
  for (size_t i = 0; i < image.data.size(); ++i) {
    const float v = std::min(1.0f, std::max(0.0f, image.data[i]));
    bytes[i] = static_cast<uint8_t>(std::lround(v * 255.0f));
  }
  write_p5(path, image.width, image.height, bytes);
}

void write_pgm(const std::filesystem::path& path, const LabelMask& mask) {
  write_p5(path, mask.width, mask.height, mask.labels);
}

GrayImage read_pgm_image(const std::filesystem::path& path, double spacing_mm) {
  const RawPgm pgm = read_p5(path);
  GrayImage img(pgm.width, pgm.height, spacing_mm);
  for (size_t i = 0; i < pgm.bytes.size(); ++i) {
    img.data[i] = static_cast<float>(pgm.bytes[i]) / 255.0f;
  }
  return img;
}

LabelMask read_pgm_mask(const std::filesystem::path& path, double spacing_mm) {
  const RawPgm pgm = read_p5(path);
  LabelMask mask(pgm.width, pgm.height, spacing_mm);
  for (size_t i = 0; i < pgm.bytes.size(); ++i) {
    if (pgm.bytes[i] >= kNumClasses) {
      throw DataError("mask label outside {0..4} in " + path.string());
    }
    mask.labels[i] = pgm.bytes[i];
  }
  return mask;
}

}  // namespace fusqa
