#include <algorithm>
#include <array>
#include <cmath>

#include "hexplain/bench.hpp"
#include "hexplain/error.hpp"
#include "hexplain/random.hpp"

namespace hexplain::bench {

namespace {

struct Point {
  double u, v;
};

double SegmentDistance(Point p, Point a, Point b) {
  const double dx = b.u - a.u, dy = b.v - a.v;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.u - a.u) * dx + (p.v - a.v) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.u - (a.u + t * dx), p.v - (a.v + t * dy));
}

bool InTriangle(Point p, Point a, Point b, Point c) {
  auto side = [](Point p1, Point p2, Point p3) {
    return (p1.u - p3.u) * (p2.v - p3.v) - (p2.u - p3.u) * (p1.v - p3.v);
  };
  const double d1 = side(p, a, b), d2 = side(p, b, c), d3 = side(p, c, a);
  const bool neg = d1 < 0 || d2 < 0 || d3 < 0;
  const bool pos = d1 > 0 || d2 > 0 || d3 > 0;
  return !(neg && pos);
}

// Shape membership in unit glyph coordinates; `j` holds jitter offsets.
bool Inside(Symbol s, Point p, const std::array<double, 4>& j) {
  const double cx = 0.5 + j[0], cy = 0.5 + j[1];
  switch (s) {
    case Symbol::kDigit0: {
      const double d = std::hypot((p.u - cx) / 0.30, (p.v - cy) / 0.38);
      return d >= 0.62 && d <= 1.25;
    }
    case Symbol::kDigit1:
      return SegmentDistance(p, {0.5 + j[0], 0.12 + j[1]}, {0.5 + j[2], 0.88 + j[3]}) <= 0.11;
    case Symbol::kEmpty:
      return false;
    case Symbol::kGhost: {
      const double du = p.u - cx, dv = p.v - cy;
      if (std::hypot(du + 0.13, dv + 0.05) < 0.07 || std::hypot(du - 0.13, dv + 0.05) < 0.07) {
        return false;  // eyes
      }
      if (dv <= 0.0) return std::hypot(du, dv) <= 0.36;
      if (dv > 0.36 || std::abs(du) > 0.36) return false;
      return !(dv > 0.24 && std::abs(du) < 0.08);
    }
    case Symbol::kActor: {
      const double du = p.u - cx, dv = p.v - cy;
      if (std::hypot(du, dv) > 0.4) return false;
      return !(du > 0.0 && std::abs(std::atan2(dv, du)) < 0.6);
    }
    case Symbol::kFlag: {
      const double px = 0.28 + j[0], py = j[1];
      if (std::abs(p.u - px) <= 0.05 && p.v >= 0.1 + py && p.v <= 0.9 + py) return true;
      return InTriangle(p, {px, 0.12 + py}, {px + 0.54, 0.28 + py}, {px, 0.44 + py});
    }
  }
  return false;
}

std::array<double, 3> Tint(Symbol s, int channels) {
  if (channels == 1) {
    switch (s) {
      case Symbol::kGhost:
        return {0.55, 0.55, 0.55};
      case Symbol::kFlag:
        return {0.8, 0.8, 0.8};
      default:
        return {1.0, 1.0, 1.0};
    }
  }
  switch (s) {
    case Symbol::kGhost:
      return {1.0, 0.3, 0.3};
    case Symbol::kActor:
      return {1.0, 0.9, 0.1};
    case Symbol::kFlag:
      return {0.3, 1.0, 0.3};
    default:
      return {1.0, 1.0, 1.0};
  }
}

constexpr int kSupersample = 4;

}  // namespace

std::string SymbolName(Symbol s) {
  switch (s) {
    case Symbol::kDigit0:
      return "digit0";
    case Symbol::kDigit1:
      return "digit1";
    case Symbol::kEmpty:
      return "empty";
    case Symbol::kGhost:
      return "ghost";
    case Symbol::kActor:
      return "actor";
    case Symbol::kFlag:
      return "flag";
  }
  return "?";
}

void GlyphParams::Validate() const {
  if (width < 1 || height < 1 || (channels != 1 && channels != 3)) {
    Fail(ErrorCode::kInvalidArgument, "glyph needs positive size and 1 or 3 channels");
  }
  if (!(jitter >= 0.0) || !(noise >= 0.0 && noise < 0.3)) {
    Fail(ErrorCode::kInvalidArgument, "glyph jitter must be >= 0 and noise in [0, 0.3)");
  }
}

Image RenderGlyph(const GlyphParams& params) {
  params.Validate();
  Rng rng(params.seed);
  std::array<double, 4> j{};
  for (double& x : j) x = rng.Uniform(-params.jitter, params.jitter);
  const auto tint = Tint(params.symbol, params.channels);

  Image img(params.width, params.height, params.channels);
  for (int y = 0; y < params.height; ++y) {
    for (int x = 0; x < params.width; ++x) {
      int hits = 0;
      for (int sy = 0; sy < kSupersample; ++sy) {
        for (int sx = 0; sx < kSupersample; ++sx) {
          const Point p{(x + (sx + 0.5) / kSupersample) / params.width,
                        (y + (sy + 0.5) / kSupersample) / params.height};
          hits += Inside(params.symbol, p, j) ? 1 : 0;
        }
      }
      const double coverage = static_cast<double>(hits) / (kSupersample * kSupersample);
      for (int c = 0; c < params.channels; ++c) img.at(x, y, c) = coverage * tint[c];
    }
  }
  if (params.noise > 0.0) {
    for (double& v : img.pixels) v = std::clamp(v + rng.Uniform(-params.noise, params.noise), 0.0, 1.0);
  }
  return img;
}

Symbol SymbolForLabel(const tasks::TaskSpec& task, int label) {
  if (task.kind != tasks::TaskKind::kPacman) {
    if (label == 0) return Symbol::kDigit0;
    if (label == 1) return Symbol::kDigit1;
  } else {
    switch (label) {
      case tasks::kEmpty:
        return Symbol::kEmpty;
      case tasks::kGhost:
        return Symbol::kGhost;
      case tasks::kActor:
        return Symbol::kActor;
      case tasks::kFlag:
        return Symbol::kFlag;
      default:
        break;
    }
  }
  Fail(ErrorCode::kInvalidArgument, "label " + std::to_string(label) + " has no glyph for this task");
}

}  // namespace hexplain::bench
