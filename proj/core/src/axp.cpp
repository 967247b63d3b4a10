#include "hexplain/axp.hpp"

#include <algorithm>
#include <numeric>

#include "hexplain/error.hpp"

namespace hexplain::axp {

namespace {

double Brightness(const Image& image, std::size_t pixel) {
  double b = 0.0;
  for (int c = 0; c < image.channels; ++c) {
    b = std::max(b, image.pixels[pixel * image.channels + c]);
  }
  return b;
}

// Squared distance to the centre, doubled to stay integral.
long CentreDistance2(const Image& image, std::size_t pixel) {
  const long x = static_cast<long>(pixel % image.width);
  const long y = static_cast<long>(pixel / image.width);
  const long dx = 2 * x - (image.width - 1);
  const long dy = 2 * y - (image.height - 1);
  return dx * dx + dy * dy;
}

}  // namespace

std::string HeuristicName(Heuristic h) {
  switch (h) {
    case Heuristic::kRaster:
      return "raster";
    case Heuristic::kCentreDistance:
      return "centre-distance";
    case Heuristic::kSaturationLightness:
      return "saturation-lightness";
    case Heuristic::kComposite:
      return "composite";
  }
  return "?";
}

Heuristic ParseHeuristic(std::string_view name) {
  for (auto h : {Heuristic::kRaster, Heuristic::kCentreDistance,
                 Heuristic::kSaturationLightness, Heuristic::kComposite}) {
    if (HeuristicName(h) == name) return h;
  }
  Fail(ErrorCode::kInvalidArgument, "unknown ordering heuristic '" + std::string(name) + "'");
}

FeatureOrder OrderFeatures(const Image& image, Heuristic heuristic) {
  image.Validate();
  FeatureOrder order;
  order.heuristic = heuristic;
  order.permutation.resize(image.num_features());
  std::iota(order.permutation.begin(), order.permutation.end(), 0);
  auto by_distance = [&](std::size_t a, std::size_t b) {
    return CentreDistance2(image, a) > CentreDistance2(image, b);
  };
  auto by_brightness = [&](std::size_t a, std::size_t b) {
    return Brightness(image, a) < Brightness(image, b);
  };
  switch (heuristic) {
    case Heuristic::kRaster:
      break;
    case Heuristic::kCentreDistance:
      std::stable_sort(order.permutation.begin(), order.permutation.end(), by_distance);
      break;
    case Heuristic::kSaturationLightness:
      std::stable_sort(order.permutation.begin(), order.permutation.end(), by_brightness);
      break;
    case Heuristic::kComposite:
      std::stable_sort(order.permutation.begin(), order.permutation.end(),
                       [&](std::size_t a, std::size_t b) {
                         const long da = CentreDistance2(image, a);
                         const long db = CentreDistance2(image, b);
                         if (da != db) return da > db;
                         return by_brightness(a, b);
                       });
      break;
  }
  return order;
}

AxpResult ExtractAxp(const nn::MlpModel& model, const Image& image, int target, double eps,
                     const FeatureOrder& order, const verify::VerifyOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  if (!(eps > 0.0 && eps <= 1.0)) Fail(ErrorCode::kInvalidEpsilon, "eps must lie in (0, 1]");
  if (nn::Predict(model, image.pixels) != target) {
    Fail(ErrorCode::kPredictionMismatch, "model does not predict class " + std::to_string(target));
  }
  const std::size_t m = image.num_features();
  {
    std::vector<std::size_t> sorted = order.permutation;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (sorted[i] != i || sorted.size() != m) {
        Fail(ErrorCode::kInvalidArgument, "feature order is not a permutation of the pixels");
      }
    }
  }

  std::vector<char> fixed(m, 1);
  AxpResult result;
  verify::RobustnessQuery query;
  query.model = &model;
  query.image = &image;
  query.eps = eps;
  query.target_class = target;
  for (std::size_t candidate : order.permutation) {
    fixed[candidate] = 0;
    query.fixed.clear();
    for (std::size_t f = 0; f < m; ++f) {
      if (fixed[f]) query.fixed.push_back(f);
    }
    const auto verdict = verify::DecideStable(query, options);
    ++result.oracle_calls;
    if (verdict.stable()) continue;
    fixed[candidate] = 1;
    if (verdict.unknown()) ++result.unknown_kept;
  }
  for (std::size_t f = 0; f < m; ++f) {
    if (fixed[f]) result.features.push_back(f);
  }
  result.elapsed = std::chrono::steady_clock::now() - start;
  return result;
}

}  // namespace hexplain::axp
