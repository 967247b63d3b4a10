#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hexplain/mus.hpp"

namespace hexplain::shap {

using mus::IndexSet;

// Scalar model output on a complete feature vector.
using ValueFunction = std::function<double(std::span<const double>)>;

struct Attribution {
  std::vector<double> phi;
  double base_value = 0.0;  // f(baseline)
  double value = 0.0;       // f(v)
  std::size_t nsamples = 0;
  std::uint64_t seed = 0;

  // |base_value + sum(phi) - value|
  double EfficiencyResidual() const;
};

// Kernel SHAP. Coalition z switches feature i to v_i when z_i = 1 and to
// baseline_i otherwise. The empty and full coalitions enter as equality
// constraints (phi_0 = f(baseline), sum phi = f(v) - f(baseline)); the
// remaining coalitions are fitted by Shapley-kernel weighted least squares.
// When nsamples >= 2^m - 2 every coalition is enumerated and the result is
// exact; otherwise paired coalitions are sampled with size drawn from the
// kernel's size marginal. Throws kDegenerateSystem if the sampled design
// does not determine the solution.
Attribution KernelShap(const ValueFunction& f, std::span<const double> v,
                       std::span<const double> baseline, std::size_t nsamples, std::uint64_t seed);

// Exact Shapley values by subset enumeration (m <= 12, else kTooManyFeatures).
Attribution ExactShapley(const ValueFunction& f, std::span<const double> v,
                         std::span<const double> baseline);

// Cumulative attribution-mass cut-off used to turn attributions into sets.
struct SelectionRule {
  double tau = 0.9;
  void Validate() const;
};

// Smallest prefix of features sorted by |phi| (descending, index tie-break)
// whose mass reaches tau * sum |phi|. Empty when all attributions are zero.
IndexSet SelectExplanation(const Attribution& attribution, const SelectionRule& rule);

}  // namespace hexplain::shap
