#include "hexplain/attribution.hpp"

#include <Eigen/Dense>
#include <bit>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hexplain/error.hpp"
#include "hexplain/random.hpp"

namespace hexplain::shap {

namespace {

double Binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r *= static_cast<double>(n - k + i) / i;
  return r;
}

// Shapley kernel weight of one coalition of size s out of m.
double KernelWeight(int m, int s) {
  return static_cast<double>(m - 1) / (Binomial(m, s) * s * (m - s));
}

std::vector<double> Compose(std::span<const double> v, std::span<const double> baseline,
                            const std::vector<char>& on) {
  std::vector<double> x(baseline.begin(), baseline.end());
  for (std::size_t i = 0; i < on.size(); ++i) {
    if (on[i]) x[i] = v[i];
  }
  return x;
}

void CheckShapes(std::span<const double> v, std::span<const double> baseline) {
  if (v.size() != baseline.size()) {
    Fail(ErrorCode::kDimensionMismatch, "point and baseline differ in length");
  }
}

}  // namespace

double Attribution::EfficiencyResidual() const {
  return std::abs(base_value + std::accumulate(phi.begin(), phi.end(), 0.0) - value);
}

Attribution KernelShap(const ValueFunction& f, std::span<const double> v,
                       std::span<const double> baseline, std::size_t nsamples, std::uint64_t seed) {
  CheckShapes(v, baseline);
  const int m = static_cast<int>(v.size());
  if (nsamples < static_cast<std::size_t>(m) + 2) {
    Fail(ErrorCode::kInvalidArgument, "kernel SHAP needs nsamples >= m + 2");
  }
  Attribution out;
  out.nsamples = nsamples;
  out.seed = seed;
  out.base_value = f(baseline);
  out.value = f(v);
  const double delta = out.value - out.base_value;
  if (m == 0) return out;
  if (m == 1) {
    out.phi = {delta};
    return out;
  }

  // Coalitions as rows of Z with weights w.
  std::vector<std::vector<char>> coalitions;
  std::vector<double> weights;
  const bool enumerate = m < 31 && nsamples + 2 >= (std::size_t{1} << m);
  if (enumerate) {
    for (std::uint32_t mask = 1; mask + 1 < (1u << m); ++mask) {
      std::vector<char> z(m);
      for (int i = 0; i < m; ++i) z[i] = (mask >> i) & 1;
      coalitions.push_back(std::move(z));
      weights.push_back(KernelWeight(m, std::popcount(mask)));
    }
  } else {
    std::vector<double> size_mass(m, 0.0);
    for (int s = 1; s < m; ++s) size_mass[s] = 1.0 / (static_cast<double>(s) * (m - s));
    const double total = std::accumulate(size_mass.begin(), size_mass.end(), 0.0);
    Rng rng(seed);
    std::vector<int> idx(m);
    while (coalitions.size() < nsamples) {
      double u = rng.Uniform() * total;
      int s = 1;
      while (s < m - 1 && u >= size_mass[s]) u -= size_mass[s++];
      std::iota(idx.begin(), idx.end(), 0);
      for (int k = 0; k < s; ++k) std::swap(idx[k], idx[k + rng.Below(m - k)]);
      std::vector<char> z(m, 0);
      for (int k = 0; k < s; ++k) z[idx[k]] = 1;
      std::vector<char> complement(m);
      for (int i = 0; i < m; ++i) complement[i] = !z[i];
      coalitions.push_back(std::move(z));
      weights.push_back(1.0);
      if (coalitions.size() < nsamples) {
        coalitions.push_back(std::move(complement));
        weights.push_back(1.0);
      }
    }
  }

  // Eliminate the last feature through the efficiency constraint:
  //   y - z_last * delta = sum_{i < last} (z_i - z_last) phi_i
  const int last = m - 1;
  const Eigen::Index rows = static_cast<Eigen::Index>(coalitions.size());
  Eigen::MatrixXd a(rows, last);
  Eigen::VectorXd t(rows), w(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& z = coalitions[r];
    const double y = f(Compose(v, baseline, z)) - out.base_value;
    t(r) = y - (z[last] ? delta : 0.0);
    for (int i = 0; i < last; ++i) a(r, i) = static_cast<double>(z[i]) - static_cast<double>(z[last]);
    w(r) = weights[r];
  }
  const Eigen::MatrixXd normal = a.transpose() * w.asDiagonal() * a;
  const Eigen::VectorXd rhs = a.transpose() * w.asDiagonal() * t;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(normal);
  qr.setThreshold(1e-10);
  if (qr.rank() < last) {
    Fail(ErrorCode::kDegenerateSystem, "sampled coalitions leave the regression rank-deficient (rank " +
                                           std::to_string(qr.rank()) + " of " + std::to_string(last) + ")");
  }
  const Eigen::VectorXd sol = qr.solve(rhs);
  out.phi.resize(m);
  double partial = 0.0;
  for (int i = 0; i < last; ++i) partial += out.phi[i] = sol(i);
  out.phi[last] = delta - partial;
  return out;
}

Attribution ExactShapley(const ValueFunction& f, std::span<const double> v,
                         std::span<const double> baseline) {
  CheckShapes(v, baseline);
  const int m = static_cast<int>(v.size());
  if (m > 12) Fail(ErrorCode::kTooManyFeatures, "exact Shapley values need m <= 12");
  const std::uint32_t full = 1u << m;
  std::vector<double> value(full);
  for (std::uint32_t mask = 0; mask < full; ++mask) {
    std::vector<char> z(m);
    for (int i = 0; i < m; ++i) z[i] = (mask >> i) & 1;
    value[mask] = f(Compose(v, baseline, z));
  }
  std::vector<double> factorial(m + 1, 1.0);
  for (int i = 1; i <= m; ++i) factorial[i] = factorial[i - 1] * i;

  Attribution out;
  out.base_value = value[0];
  out.value = value[full - 1];
  out.nsamples = full;
  out.phi.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    const std::uint32_t bit = 1u << i;
    for (std::uint32_t mask = 0; mask < full; ++mask) {
      if (mask & bit) continue;
      const int s = std::popcount(mask);
      const double weight = factorial[s] * factorial[m - s - 1] / factorial[m];
      out.phi[i] += weight * (value[mask | bit] - value[mask]);
    }
  }
  return out;
}

void SelectionRule::Validate() const {
  if (!(tau > 0.0 && tau <= 1.0)) Fail(ErrorCode::kInvalidArgument, "tau must lie in (0, 1]");
}

IndexSet SelectExplanation(const Attribution& attribution, const SelectionRule& rule) {
  rule.Validate();
  const auto& phi = attribution.phi;
  double total = 0.0;
  for (double p : phi) total += std::abs(p);
  if (total == 0.0) return {};
  std::vector<std::size_t> order(phi.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(phi[a]) > std::abs(phi[b]);
  });
  IndexSet chosen;
  double mass = 0.0;
  const double goal = rule.tau * total;
  for (std::size_t i : order) {
    if (mass >= goal || phi[i] == 0.0) break;
    chosen.push_back(i);
    mass += std::abs(phi[i]);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace hexplain::shap
