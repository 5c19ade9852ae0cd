#include "morphflow/pgm.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "morphflow/error.hpp"
#include "morphflow/hash.hpp"

namespace morphflow {

std::uint8_t quantize(double value) noexcept {
  const double scaled = std::round((value + 1.0) * 127.5);
  if (!(scaled > 0.0)) return 0;  // also maps NaN to 0
  if (scaled >= 255.0) return 255;
  return static_cast<std::uint8_t>(scaled);
}

double dequantize(std::uint8_t level) noexcept { return static_cast<double>(level) / 127.5 - 1.0; }

std::vector<std::uint8_t> encode_pgm(const ImageFrame& frame) {
  const std::string header =
      "P5\n" + std::to_string(frame.width()) + " " + std::to_string(frame.height()) + "\n255\n";
  std::vector<std::uint8_t> out;
  out.reserve(header.size() + frame.size());
  out.insert(out.end(), header.begin(), header.end());
  for (double v : frame.values()) out.push_back(quantize(v));
  return out;
}

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  int read_int() {
    skip_space_and_comments();
    int value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      ++pos_;
      if (++digits > 9) throw Error(Errc::invalid_argument, "PGM header value too large");
    }
    if (digits == 0) throw Error(Errc::invalid_argument, "malformed PGM header");
    return value;
  }

  std::size_t pos() const noexcept { return pos_; }
  void advance(std::size_t n) noexcept { pos_ += n; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

ImageFrame decode_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw Error(Errc::invalid_argument, "not a binary PGM (P5) file");
  }
  HeaderReader reader(bytes);
  reader.advance(2);
  const int width = reader.read_int();
  const int height = reader.read_int();
  const int maxval = reader.read_int();
  if (maxval != 255) throw Error(Errc::invalid_argument, "only 8-bit PGM (maxval 255) is supported");
  // Exactly one whitespace byte separates the header from the raster.
  if (reader.pos() >= bytes.size() || !std::isspace(bytes[reader.pos()])) {
    throw Error(Errc::invalid_argument, "malformed PGM header terminator");
  }
  reader.advance(1);
  ImageFrame frame(width, height);
  if (bytes.size() - reader.pos() < frame.size()) throw Error(Errc::invalid_argument, "truncated PGM raster");
  auto values = frame.values();
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = dequantize(bytes[reader.pos() + i]);
  return frame;
}

void write_pgm(const std::filesystem::path& path, const ImageFrame& frame) {
  const auto bytes = encode_pgm(frame);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io, "failed writing " + path.string());
}

ImageFrame read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_pgm(bytes);
}

std::uint64_t frame_hash(const ImageFrame& frame) {
  const std::string header =
      "P5\n" + std::to_string(frame.width()) + " " + std::to_string(frame.height()) + "\n255\n";
  std::uint64_t h = fnv1a64(header);
  for (double v : frame.values()) {
    h ^= quantize(v);
    h *= kFnvPrime;
  }
  return h;
}

}  // namespace morphflow
