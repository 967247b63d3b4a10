#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hexplain/image.hpp"
#include "hexplain/mus.hpp"
#include "hexplain/tasks.hpp"

namespace hexplain {

// Binary Netpbm: P5 (grayscale, 1 channel) or P6 (RGB, 3 channels), maxval
// 255. Values are rounded to the nearest byte.
std::string EncodeNetpbm(const Image& image);
Image DecodeNetpbm(std::string_view bytes);

// Selected pixels keep their value, the rest are scaled by `dim`.
Image MaskImage(const Image& image, const mus::IndexSet& keep, double dim = 0.25);

// Lays equally sized tiles on a grid with a 1-pixel black separator.
Image TileImages(const std::vector<Image>& tiles, int columns);

// Tile layout of a task: Lex two rows of n/2, Regex one row, Pacman the grid.
int TileColumns(const tasks::TaskSpec& task);

}  // namespace hexplain
