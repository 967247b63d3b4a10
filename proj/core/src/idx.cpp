#include <cstdint>

#include "hexplain/bench.hpp"
#include "hexplain/error.hpp"
#include "hexplain/fileio.hpp"

namespace hexplain::bench {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

class ByteReader {
 public:
  ByteReader(std::string_view data, const char* what) : data_(data), what_(what) {}

  std::uint32_t U32() {
    Need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(data_[pos_++]);
    return v;
  }

  std::string_view Bytes(std::size_t count) {
    Need(count);
    auto out = data_.substr(pos_, count);
    pos_ += count;
    return out;
  }

 private:
  void Need(std::size_t count) const {
    if (data_.size() - pos_ < count) {
      Fail(ErrorCode::kTruncatedFile, std::string(what_) + " ends early");
    }
  }

  std::string_view data_;
  const char* what_;
  std::size_t pos_ = 0;
};

}  // namespace

nn::Dataset ParseIdx(std::string_view images, std::string_view labels,
                     const std::optional<std::set<int>>& keep_labels) {
  ByteReader img(images, "IDX image file");
  ByteReader lab(labels, "IDX label file");
  if (img.U32() != kImageMagic) Fail(ErrorCode::kBadMagic, "IDX image file has wrong magic");
  if (lab.U32() != kLabelMagic) Fail(ErrorCode::kBadMagic, "IDX label file has wrong magic");
  const std::uint32_t count = img.U32();
  const std::uint32_t rows = img.U32();
  const std::uint32_t cols = img.U32();
  const std::uint32_t label_count = lab.U32();
  if (count != label_count) {
    Fail(ErrorCode::kCountMismatch, "IDX files hold " + std::to_string(count) + " images but " +
                                        std::to_string(label_count) + " labels");
  }
  if (rows == 0 || cols == 0 || rows > 1u << 14 || cols > 1u << 14) {
    Fail(ErrorCode::kMalformedInput, "IDX image dimensions out of range");
  }
  const std::size_t per_image = static_cast<std::size_t>(rows) * cols;
  nn::Dataset data;
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto px = img.Bytes(per_image);
    const int label = static_cast<unsigned char>(lab.Bytes(1)[0]);
    if (keep_labels && !keep_labels->contains(label)) continue;
    Image im(static_cast<int>(cols), static_cast<int>(rows), 1);
    for (std::size_t i = 0; i < per_image; ++i) {
      im.pixels[i] = static_cast<unsigned char>(px[i]) / 255.0;
    }
    data.push_back({std::move(im), label});
  }
  return data;
}

nn::Dataset LoadIdx(const std::string& images_path, const std::string& labels_path,
                    const std::optional<std::set<int>>& keep_labels) {
  return ParseIdx(ReadFile(images_path), ReadFile(labels_path), keep_labels);
}

}  // namespace hexplain::bench
