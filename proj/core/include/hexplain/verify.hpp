#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hexplain/image.hpp"
#include "hexplain/mus.hpp"
#include "hexplain/neural.hpp"

namespace hexplain::verify {

using mus::IndexSet;

// Axis-aligned input region, lower <= upper componentwise, inside [0, 1].
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t size() const { return lower.size(); }
  bool Contains(std::span<const double> x) const;
  void Validate() const;
};

struct LogitBounds {
  std::vector<double> lower;
  std::vector<double> upper;
};

// Interval bound propagation: sound per-logit bounds over `box`.
LogitBounds IbpBounds(const nn::MlpModel& model, const Box& box);

// Sound lower bound of min over the box of (logit_target - max_{k != target}
// logit_k). The last layer is folded into per-class difference rows, which
// is never looser than subtracting the IbpBounds intervals.
double MarginLowerBound(const nn::MlpModel& model, const Box& box, int target);

// Margin bound from back-substituting linear ReLU relaxations down to the
// input (hidden-layer bounds are computed the same way, intersected with
// IBP). `slope` receives the input coefficients of the weakest class row.
struct LinearBound {
  double margin = 0.0;
  std::vector<double> slope;
};
LinearBound LinearMarginBound(const nn::MlpModel& model, const Box& box, int target);

enum class Norm { kLinf };

// Is the model's answer `target_class` constant over every point that agrees
// with `image` on the `fixed` pixels and stays within `eps` (L-inf) of it
// elsewhere? eps = 1 lets the free pixels range over all of [0, 1].
struct RobustnessQuery {
  const nn::MlpModel* model = nullptr;
  const Image* image = nullptr;
  IndexSet fixed;  // pixel (feature) indices
  double eps = 1.0;
  Norm norm = Norm::kLinf;
  int target_class = 0;

  // Throws kInvalidEpsilon, kDimensionMismatch or kInvalidArgument.
  void Validate() const;
  Box MakeBox() const;
  // Input coordinates (pixel-channel positions) left free by the query.
  std::vector<std::size_t> FreeCoordinates() const;
};

struct VerifyOptions {
  double delta_min = 1e-3;       // smallest free width still worth splitting
  std::size_t max_boxes = 20000;  // node budget per query
  int root_attack_steps = 30;
  int box_attack_steps = 4;
  int random_corners = 4;
  int bound_iterations = 10;  // multiplier ascent steps per node (doubled at the root)
  std::uint64_t seed = 0x5eed;
};

struct StabilityVerdict {
  enum class Kind { kStable, kCounterexample, kUnknown };

  Kind kind = Kind::kUnknown;
  std::vector<double> point;  // counterexample input, when kCounterexample
  std::string reason;         // why the search stopped, when kUnknown
  std::size_t boxes = 0;      // sub-boxes examined

  bool stable() const { return kind == Kind::kStable; }
  bool counterexample() const { return kind == Kind::kCounterexample; }
  bool unknown() const { return kind == Kind::kUnknown; }
};

std::string KindName(StabilityVerdict::Kind kind);

// Branch and bound over the query box. A node is a sub-box plus fixed
// phases for some hidden ReLUs; it is closed when IBP or the optimised
// linear relaxation certifies a strictly positive margin, or when its
// region is empty. Open nodes are split on an unstable ReLU while one
// remains, then on an input coordinate. A counterexample is re-checked with
// the forward pass before it is returned. Unknown is reported when a node
// whose free widths are all below delta_min, or the node budget, is reached
// unresolved.
StabilityVerdict DecideStable(const RobustnessQuery& query, const VerifyOptions& options = {});

// Exhaustive check on the `levels`-point grid of every free coordinate.
// Throws kTooLarge when levels^free exceeds kBruteForceLimit.
inline constexpr double kBruteForceLimit = 1e7;
StabilityVerdict BruteForceStable(const RobustnessQuery& query, int levels);

}  // namespace hexplain::verify
