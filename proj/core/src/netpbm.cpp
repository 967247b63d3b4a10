#include "hexplain/netpbm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "hexplain/error.hpp"

namespace hexplain {

std::string EncodeNetpbm(const Image& image) {
  image.Validate();
  if (image.channels != 1 && image.channels != 3) {
    Fail(ErrorCode::kInvalidArgument, "netpbm needs 1 or 3 channels");
  }
  std::string out = (image.channels == 1 ? "P5\n" : "P6\n") + std::to_string(image.width) + " " +
                    std::to_string(image.height) + "\n255\n";
  out.reserve(out.size() + image.pixels.size());
  for (double v : image.pixels) {
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
  }
  return out;
}

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::string_view s) : s_(s) {}

  int Number() {
    SkipSpace();
    if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      Fail(ErrorCode::kParseError, "netpbm header: expected a number");
    }
    long v = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      v = v * 10 + (s_[pos_++] - '0');
      if (v > 1 << 20) Fail(ErrorCode::kParseError, "netpbm header: number too large");
    }
    return static_cast<int>(v);
  }

  // Exactly one whitespace byte separates the header from the raster.
  std::size_t RasterStart() {
    if (pos_ >= s_.size() || !std::isspace(static_cast<unsigned char>(s_[pos_]))) {
      Fail(ErrorCode::kParseError, "netpbm header: missing separator");
    }
    return pos_ + 1;
  }

 private:
  void SkipSpace() {
    while (pos_ < s_.size()) {
      if (s_[pos_] == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view s_;
  std::size_t pos_ = 2;
};

}  // namespace

Image DecodeNetpbm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    Fail(ErrorCode::kBadMagic, "not a binary PGM/PPM file");
  }
  const int channels = bytes[1] == '5' ? 1 : 3;
  HeaderReader h(bytes);
  const int width = h.Number();
  const int height = h.Number();
  const int maxval = h.Number();
  if (width < 1 || height < 1 || maxval < 1 || maxval > 255) {
    Fail(ErrorCode::kParseError, "netpbm header: unsupported dimensions or maxval");
  }
  const std::size_t start = h.RasterStart();
  Image img(width, height, channels);
  if (bytes.size() - start < img.pixels.size()) Fail(ErrorCode::kTruncatedFile, "netpbm raster ends early");
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    img.pixels[i] = static_cast<unsigned char>(bytes[start + i]) / static_cast<double>(maxval);
  }
  return img;
}

Image MaskImage(const Image& image, const mus::IndexSet& keep, double dim) {
  Image out = image;
  std::vector<char> kept(image.num_features(), 0);
  for (auto p : keep) {
    if (p >= kept.size()) Fail(ErrorCode::kInvalidArgument, "mask pixel index out of range");
    kept[p] = 1;
  }
  for (std::size_t p = 0; p < kept.size(); ++p) {
    if (kept[p]) continue;
    for (int c = 0; c < image.channels; ++c) out.pixels[p * image.channels + c] *= dim;
  }
  return out;
}

Image TileImages(const std::vector<Image>& tiles, int columns) {
  if (tiles.empty() || columns < 1) Fail(ErrorCode::kInvalidArgument, "nothing to tile");
  const Image& first = tiles.front();
  for (const auto& t : tiles) {
    if (t.width != first.width || t.height != first.height || t.channels != first.channels) {
      Fail(ErrorCode::kDimensionMismatch, "tiles differ in shape");
    }
  }
  const int n = static_cast<int>(tiles.size());
  const int rows = (n + columns - 1) / columns;
  const int cols = std::min(columns, n);
  Image out(cols * first.width + (cols - 1), rows * first.height + (rows - 1), first.channels);
  for (int k = 0; k < n; ++k) {
    const int ox = (k % columns) * (first.width + 1);
    const int oy = (k / columns) * (first.height + 1);
    for (int y = 0; y < first.height; ++y) {
      for (int x = 0; x < first.width; ++x) {
        for (int c = 0; c < first.channels; ++c) out.at(ox + x, oy + y, c) = tiles[k].at(x, y, c);
      }
    }
  }
  return out;
}

int TileColumns(const tasks::TaskSpec& task) {
  switch (task.kind) {
    case tasks::TaskKind::kLex:
      return task.n / 2;
    case tasks::TaskKind::kRegex:
      return task.n;
    case tasks::TaskKind::kPacman:
      return task.width;
  }
  return task.n;
}

}  // namespace hexplain
