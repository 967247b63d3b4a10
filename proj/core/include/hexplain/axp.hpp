#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "hexplain/image.hpp"
#include "hexplain/mus.hpp"
#include "hexplain/neural.hpp"
#include "hexplain/verify.hpp"

namespace hexplain::axp {

using mus::IndexSet;

enum class Heuristic { kRaster, kCentreDistance, kSaturationLightness, kComposite };

std::string HeuristicName(Heuristic h);
Heuristic ParseHeuristic(std::string_view name);

// Pixel traversal order for deletion; pixels early in the order are the
// first candidates for elimination.
struct FeatureOrder {
  std::vector<std::size_t> permutation;
  Heuristic heuristic = Heuristic::kRaster;
};

// CentreDistance: farthest from the image centre first.
// SaturationLightness: darkest first (grayscale value, max over channels).
// Composite: CentreDistance, ties broken darkest first.
// Remaining ties fall back to the pixel index.
FeatureOrder OrderFeatures(const Image& image, Heuristic heuristic);

struct AxpResult {
  IndexSet features;
  std::size_t oracle_calls = 0;
  std::size_t unknown_kept = 0;  // pixels kept only because of Unknown
  std::chrono::nanoseconds elapsed{0};
};

// Deletion-based abductive explanation for the model's answer `target` at
// `image`: start from every pixel fixed and free each one in `order`, keeping
// it unless the verifier certifies stability without it.
// Throws kPredictionMismatch if the model does not answer `target`.
AxpResult ExtractAxp(const nn::MlpModel& model, const Image& image, int target, double eps,
                     const FeatureOrder& order, const verify::VerifyOptions& options = {});

}  // namespace hexplain::axp
