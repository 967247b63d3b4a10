#include "hexplain/image.hpp"

#include <cmath>

#include "hexplain/error.hpp"

namespace hexplain {

Image::Image(int w, int h, int c)
    : width(w), height(h), channels(c),
      pixels(static_cast<std::size_t>(w) * h * c, 0.0) {
  Validate();
}

Image::Image(int w, int h, int c, std::vector<double> px)
    : width(w), height(h), channels(c), pixels(std::move(px)) {
  Validate();
}

void Image::Validate() const {
  if (width < 1 || height < 1 || channels < 1) {
    Fail(ErrorCode::kInvalidArgument, "image dimensions must be positive");
  }
  if (pixels.size() != static_cast<std::size_t>(width) * height * channels) {
    Fail(ErrorCode::kInvalidArgument, "pixel count does not match image dimensions");
  }
  for (double v : pixels) {
    if (!(v >= 0.0 && v <= 1.0)) Fail(ErrorCode::kInvalidArgument, "pixel value outside [0, 1]");
  }
}

}  // namespace hexplain
