#pragma once

#include <cstddef>
#include <vector>

namespace hexplain {

// Row-major, channel-interleaved image with values in [0, 1]. A "feature"
// is a pixel location; all of its channels move together.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> pixels;

  Image() = default;
  Image(int width, int height, int channels);
  Image(int width, int height, int channels, std::vector<double> pixels);

  std::size_t num_features() const { return static_cast<std::size_t>(width) * height; }
  std::size_t size() const { return pixels.size(); }

  double& at(int x, int y, int c = 0) { return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  double at(int x, int y, int c = 0) const { return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c]; }

  // Throws kInvalidArgument on a size mismatch or a value outside [0, 1].
  void Validate() const;

  friend bool operator==(const Image&, const Image&) = default;
};

}  // namespace hexplain
