#include "hexplain/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <tuple>

#include "hexplain/error.hpp"
#include "hexplain/random.hpp"

namespace hexplain::verify {

namespace {

using nn::Activation;
using nn::DenseLayer;

// Certified margins must clear this to absorb floating-point rounding in the
// bound computation.
constexpr double kMarginSlack = 1e-9;

void PropagateLayer(const DenseLayer& layer, const std::vector<double>& lo,
                    const std::vector<double>& hi, std::vector<double>& out_lo,
                    std::vector<double>& out_hi) {
  out_lo.assign(layer.bias.begin(), layer.bias.end());
  out_hi.assign(layer.bias.begin(), layer.bias.end());
  for (int r = 0; r < layer.out; ++r) {
    const double* row = layer.weights.data() + static_cast<std::size_t>(r) * layer.in;
    double l = out_lo[r], h = out_hi[r];
    for (int c = 0; c < layer.in; ++c) {
      const double w = row[c];
      if (w >= 0.0) {
        l += w * lo[c];
        h += w * hi[c];
      } else {
        l += w * hi[c];
        h += w * lo[c];
      }
    }
    if (layer.activation == Activation::kRelu) {
      l = std::max(l, 0.0);
      h = std::max(h, 0.0);
    }
    out_lo[r] = l;
    out_hi[r] = h;
  }
}

void CheckBox(const nn::MlpModel& model, const Box& box) {
  box.Validate();
  if (static_cast<int>(box.size()) != model.input_dim()) {
    Fail(ErrorCode::kDimensionMismatch, "box dimension does not match the model input");
  }
}

bool Misclassified(const nn::MlpModel& model, std::span<const double> x, int target) {
  return nn::Predict(model, x) != target;
}

// Phase of a hidden neuron in a branch-and-bound node.
enum Phase : signed char { kOpen = 0, kActive = 1, kInactive = -1 };
using Phases = std::vector<std::vector<signed char>>;  // [hidden layer][neuron]

// Per-node parameters of the relaxation: lower ReLU slopes for unstable
// neurons and Lagrange multipliers for phase constraints. Every admissible
// value (alpha in [0, 1], beta >= 0) yields a sound bound.
struct Multipliers {
  std::vector<std::vector<double>> alpha, beta;
};

// Record of one back-substitution, enough to evaluate its gradient.
struct Pass {
  double bound = 0.0;
  std::vector<double> slope;                   // input coefficients
  std::vector<double> corner;                  // minimising box corner
  std::vector<std::vector<double>> lambda;     // coefficients on a_l
  std::vector<std::vector<double>> d, e;       // chosen relaxation a = d z + e
  std::vector<std::vector<double>> z;          // z_l along the chosen pieces
};

// Linear relaxation of the network over one node: a box plus phase
// constraints. Layer l computes z_l = W_l a_{l-1} + b_l, with a_{-1} = x and
// a_l = relu(z_l) below the output layer. Hidden pre-activation bounds are
// IBP intersected with back-substitution, then clamped by the phases.
class Relaxation {
 public:
  Relaxation(const std::vector<DenseLayer>& layers, const Box& box, const Phases* phases)
      : layers_(layers), box_(box), phases_(phases) {
    const std::size_t hidden = layers_.size() - 1;
    lo_.resize(hidden);
    hi_.resize(hidden);
    std::vector<double> ilo = box.lower, ihi = box.upper;
    for (std::size_t l = 0; l < hidden; ++l) {
      DenseLayer affine = layers_[l];
      affine.activation = Activation::kIdentity;
      PropagateLayer(affine, ilo, ihi, lo_[l], hi_[l]);
      if (l > 0) {
        std::vector<double> row(layers_[l].out, 0.0);
        for (int j = 0; j < layers_[l].out; ++j) {
          row[j] = 1.0;
          lo_[l][j] = std::max(lo_[l][j], Backward(row, l, nullptr, nullptr));
          row[j] = -1.0;
          hi_[l][j] = std::min(hi_[l][j], -Backward(row, l, nullptr, nullptr));
          row[j] = 0.0;
        }
      }
      if (phases_ != nullptr) {
        for (int j = 0; j < layers_[l].out; ++j) {
          if ((*phases_)[l][j] == kActive) {
            if (hi_[l][j] < -kMarginSlack) empty_ = true;
            lo_[l][j] = std::max(lo_[l][j], 0.0);
            hi_[l][j] = std::max(hi_[l][j], 0.0);
          } else if ((*phases_)[l][j] == kInactive) {
            if (lo_[l][j] > kMarginSlack) empty_ = true;
            hi_[l][j] = std::min(hi_[l][j], 0.0);
            lo_[l][j] = std::min(lo_[l][j], 0.0);
          }
        }
      }
      ilo = lo_[l];
      ihi = hi_[l];
      for (double& v : ilo) v = std::max(v, 0.0);
      for (double& v : ihi) v = std::max(v, 0.0);
    }
  }

  // The node's region is provably empty.
  bool empty() const { return empty_; }
  std::size_t hidden() const { return lo_.size(); }
  const std::vector<double>& lo(std::size_t l) const { return lo_[l]; }
  const std::vector<double>& hi(std::size_t l) const { return hi_[l]; }
  bool Unstable(std::size_t l, std::size_t j) const { return lo_[l][j] < 0.0 && hi_[l][j] > 0.0; }

  Multipliers DefaultMultipliers() const {
    Multipliers m;
    for (std::size_t l = 0; l < hidden(); ++l) {
      m.alpha.emplace_back(lo_[l].size());
      m.beta.emplace_back(lo_[l].size(), 0.0);
      for (std::size_t j = 0; j < lo_[l].size(); ++j) m.alpha[l][j] = hi_[l][j] > -lo_[l][j] ? 1.0 : 0.0;
    }
    return m;
  }

  // Lower bound of mu . z_layer over the node. Without multipliers the
  // default slopes are used and phase constraints are not dualised.
  double Backward(std::vector<double> mu, std::size_t layer, const Multipliers* m, Pass* pass) const {
    double constant = 0.0;
    std::vector<double> lambda;
    if (pass != nullptr) {
      pass->lambda.assign(layer, {});
      pass->d.assign(layer, {});
      pass->e.assign(layer, {});
    }
    for (std::size_t l = layer + 1; l-- > 0;) {
      if (l < layer && m != nullptr && phases_ != nullptr) {
        for (std::size_t j = 0; j < mu.size(); ++j) {
          if ((*phases_)[l][j] == kActive) mu[j] -= m->beta[l][j];
          if ((*phases_)[l][j] == kInactive) mu[j] += m->beta[l][j];
        }
      }
      const DenseLayer& w = layers_[l];
      lambda.assign(w.in, 0.0);
      for (int r = 0; r < w.out; ++r) {
        if (mu[r] == 0.0) continue;
        constant += mu[r] * w.bias[r];
        const double* row = w.weights.data() + static_cast<std::size_t>(r) * w.in;
        for (int c = 0; c < w.in; ++c) lambda[c] += mu[r] * row[c];
      }
      if (l == 0) break;
      const std::size_t h = l - 1;
      const auto& L = lo_[h];
      const auto& U = hi_[h];
      std::vector<double> d(lambda.size(), 0.0), e(lambda.size(), 0.0);
      mu.assign(lambda.size(), 0.0);
      for (std::size_t j = 0; j < lambda.size(); ++j) {
        if (U[j] <= 0.0) {
          continue;
        } else if (L[j] >= 0.0) {
          d[j] = 1.0;
        } else if (lambda[j] >= 0.0) {
          d[j] = m != nullptr ? m->alpha[h][j] : (U[j] > -L[j] ? 1.0 : 0.0);
        } else {
          d[j] = U[j] / (U[j] - L[j]);
          e[j] = -d[j] * L[j];
        }
        mu[j] = lambda[j] * d[j];
        constant += lambda[j] * e[j];
      }
      if (pass != nullptr) {
        pass->lambda[h] = lambda;
        pass->d[h] = std::move(d);
        pass->e[h] = std::move(e);
      }
    }
    double bound = constant;
    for (std::size_t c = 0; c < lambda.size(); ++c) {
      bound += lambda[c] * (lambda[c] >= 0.0 ? box_.lower[c] : box_.upper[c]);
    }
    if (pass != nullptr) {
      pass->bound = bound;
      pass->corner.resize(lambda.size());
      for (std::size_t c = 0; c < lambda.size(); ++c) {
        pass->corner[c] = lambda[c] >= 0.0 ? box_.lower[c] : box_.upper[c];
      }
      // Replay the chosen linear pieces forward from the corner.
      pass->z.assign(layer, {});
      std::vector<double> a = pass->corner;
      for (std::size_t l = 0; l < layer; ++l) {
        const DenseLayer& w = layers_[l];
        auto& z = pass->z[l];
        z.assign(w.bias.begin(), w.bias.end());
        for (int r = 0; r < w.out; ++r) {
          const double* row = w.weights.data() + static_cast<std::size_t>(r) * w.in;
          for (int c = 0; c < w.in; ++c) z[r] += row[c] * a[c];
        }
        a.resize(z.size());
        for (std::size_t j = 0; j < z.size(); ++j) a[j] = pass->d[l][j] * z[j] + pass->e[l][j];
      }
      pass->slope = std::move(lambda);
    }
    return bound;
  }

  // Maximises the bound of row `mu` over the multipliers by projected Adam
  // ascent, starting from `m`. Every iterate is a valid bound, so the best
  // one is kept (together with its multipliers, written back to `m`).
  void Optimise(const std::vector<double>& mu, int iterations, Multipliers& m, Pass& best) const {
    const std::size_t top = layers_.size() - 1;
    Multipliers cur = m;
    Pass pass;
    best.bound = -std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> ma(hidden()), va(hidden()), mb(hidden()), vb(hidden());
    for (std::size_t l = 0; l < hidden(); ++l) {
      ma[l].assign(lo_[l].size(), 0.0);
      va[l] = mb[l] = vb[l] = ma[l];
    }
    constexpr double kB1 = 0.9, kB2 = 0.999, kTiny = 1e-12;
    double lr = 0.1;
    for (int it = 0; it <= iterations; ++it) {
      Backward(mu, top, &cur, &pass);
      if (pass.bound > best.bound) {
        best = pass;
        m = cur;
      }
      if (it == iterations || phases_ == nullptr) break;
      const double c1 = 1.0 - std::pow(kB1, it + 1), c2 = 1.0 - std::pow(kB2, it + 1);
      for (std::size_t l = 0; l < hidden(); ++l) {
        for (std::size_t j = 0; j < lo_[l].size(); ++j) {
          const double zj = pass.z[l][j];
          const signed char ph = (*phases_)[l][j];
          if (ph != kOpen) {
            const double g = ph == kActive ? -zj : zj;
            mb[l][j] = kB1 * mb[l][j] + (1 - kB1) * g;
            vb[l][j] = kB2 * vb[l][j] + (1 - kB2) * g * g;
            cur.beta[l][j] = std::max(0.0, cur.beta[l][j] + lr * (mb[l][j] / c1) / (std::sqrt(vb[l][j] / c2) + kTiny));
          } else if (Unstable(l, j) && pass.lambda[l][j] >= 0.0) {
            const double g = pass.lambda[l][j] * zj;
            ma[l][j] = kB1 * ma[l][j] + (1 - kB1) * g;
            va[l][j] = kB2 * va[l][j] + (1 - kB2) * g * g;
            cur.alpha[l][j] = std::clamp(cur.alpha[l][j] + lr * (ma[l][j] / c1) / (std::sqrt(va[l][j] / c2) + kTiny), 0.0, 1.0);
          }
        }
      }
      lr *= 0.95;
    }
  }

 private:
  const std::vector<DenseLayer>& layers_;
  const Box& box_;
  const Phases* phases_;
  std::vector<std::vector<double>> lo_, hi_;
  bool empty_ = false;
};

std::vector<double> MarginRow(int outputs, int target, int k) {
  std::vector<double> row(outputs, 0.0);
  row[target] = 1.0;
  row[k] = -1.0;
  return row;
}

class BranchAndBound {
 public:
  BranchAndBound(const RobustnessQuery& q, const VerifyOptions& opt)
      : model_(*q.model), target_(q.target_class), opt_(opt), rng_(opt.seed) {
    free_ = q.FreeCoordinates();
  }

  StabilityVerdict Run(Box root) {
    const auto& layers = model_.layers();
    Node first{std::move(root), {}, {}, true};
    for (std::size_t l = 0; l + 1 < layers.size(); ++l) first.phases.emplace_back(layers[l].out, kOpen);

    StabilityVerdict verdict;
    std::vector<Node> stack;
    stack.push_back(std::move(first));
    bool unresolved = false;
    while (!stack.empty()) {
      if (verdict.boxes >= opt_.max_boxes) {
        verdict.kind = StabilityVerdict::Kind::kUnknown;
        verdict.reason = "box budget exhausted";
        return verdict;
      }
      Node node = std::move(stack.back());
      stack.pop_back();
      ++verdict.boxes;

      if (MarginLowerBound(model_, node.box, target_) > kMarginSlack) continue;
      const Relaxation relax(layers, node.box, &node.phases);
      if (relax.empty()) continue;

      // Weakest margin row under optimised multipliers.
      if (node.rows.empty()) node.rows.assign(model_.output_dim(), relax.DefaultMultipliers());
      Pass weakest;
      weakest.bound = std::numeric_limits<double>::infinity();
      const int iterations = node.root ? 2 * opt_.bound_iterations : opt_.bound_iterations;
      for (int k = 0; k < model_.output_dim(); ++k) {
        if (k == target_) continue;
        Pass pass;
        relax.Optimise(MarginRow(model_.output_dim(), target_, k), iterations, node.rows[k], pass);
        if (pass.bound < weakest.bound) weakest = std::move(pass);
      }
      if (weakest.bound > kMarginSlack) continue;

      std::vector<double> gradient;
      std::optional<std::vector<double>> cex;
      if (node.root) {
        cex = Attack(node.box, std::nullopt, opt_.root_attack_steps, opt_.random_corners, gradient);
      }
      if (!cex) cex = Attack(node.box, weakest.corner, opt_.box_attack_steps, 0, gradient);
      if (cex) {
        verdict.kind = StabilityVerdict::Kind::kCounterexample;
        verdict.point = std::move(*cex);
        return verdict;
      }

      // Prefer splitting the open unstable neuron whose relaxation costs
      // the weakest row most; without one, split an input coordinate.
      std::size_t best_l = 0, best_j = 0;
      double best_score = -1.0;
      for (std::size_t l = 0; l < relax.hidden(); ++l) {
        for (std::size_t j = 0; j < relax.lo(l).size(); ++j) {
          if (node.phases[l][j] != kOpen || !relax.Unstable(l, j)) continue;
          const double L = relax.lo(l)[j], U = relax.hi(l)[j];
          const double score = (std::abs(weakest.lambda[l][j]) + 1e-6) * U * -L / (U - L);
          if (score > best_score) {
            best_score = score;
            best_l = l;
            best_j = j;
          }
        }
      }
      if (best_score >= 0.0) {
        Node active{node.box, node.phases, node.rows, false};
        Node inactive{std::move(node.box), std::move(node.phases), std::move(node.rows), false};
        active.phases[best_l][best_j] = kActive;
        inactive.phases[best_l][best_j] = kInactive;
        stack.push_back(std::move(inactive));
        stack.push_back(std::move(active));
        continue;
      }

      // Input split where width times the input slope of the weakest row
      // is largest; width, then |gradient|, break ties. Coordinates
      // narrower than delta_min are never split.
      constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
      std::size_t split = kNone;
      double best_input = -1.0, best_width = -1.0, best_grad = -1.0;
      for (std::size_t i : free_) {
        const double width = node.box.upper[i] - node.box.lower[i];
        if (width < opt_.delta_min) continue;
        const double score = width * std::abs(weakest.slope[i]);
        const double g = gradient.empty() ? 0.0 : std::abs(gradient[i]);
        if (std::tie(score, width, g) > std::tie(best_input, best_width, best_grad)) {
          best_input = score;
          best_width = width;
          best_grad = g;
          split = i;
        }
      }
      if (split == kNone) {
        // Phase multipliers may not have converged on a narrow sliver; the
        // phase-free relaxation of such a box can be tight on its own.
        if (LinearMarginBound(model_, node.box, target_).margin > kMarginSlack) continue;
        unresolved = true;
        continue;
      }
      const double mid = 0.5 * (node.box.lower[split] + node.box.upper[split]);
      Node left{node.box, node.phases, node.rows, false};
      Node right{std::move(node.box), std::move(node.phases), std::move(node.rows), false};
      left.box.upper[split] = mid;
      right.box.lower[split] = mid;
      stack.push_back(std::move(right));
      stack.push_back(std::move(left));
    }
    if (unresolved) {
      verdict.kind = StabilityVerdict::Kind::kUnknown;
      verdict.reason = "resolution exhausted below delta_min";
    } else {
      verdict.kind = StabilityVerdict::Kind::kStable;
    }
    return verdict;
  }

 private:
  struct Node {
    Box box;
    Phases phases;
    std::vector<Multipliers> rows;  // per output class, warm start
    bool root = false;
  };

  // Projected sign-gradient ascent on the cross-entropy of the target class
  // from `start` (default: the box centre), then, with corners > 0, the
  // gradient-sign corner and a few random corners. Leaves the start point's
  // input gradient in `gradient`.
  std::optional<std::vector<double>> Attack(const Box& box, std::optional<std::vector<double>> start,
                                            int steps, int corners, std::vector<double>& gradient) {
    const std::size_t n = box.size();
    std::vector<double> x(n);
    if (start) {
      x = std::move(*start);
    } else {
      for (std::size_t i = 0; i < n; ++i) x[i] = 0.5 * (box.lower[i] + box.upper[i]);
    }
    if (Misclassified(model_, x, target_)) return x;
    gradient = nn::Grad(model_, x, target_).input;

    std::vector<double> corner(n);
    if (corners > 0) {
      for (std::size_t i = 0; i < n; ++i) {
        corner[i] = gradient[i] > 0.0 ? box.upper[i] : (gradient[i] < 0.0 ? box.lower[i] : x[i]);
      }
      if (Misclassified(model_, corner, target_)) return corner;
    }

    std::vector<double> g = gradient;
    for (int step = 0; step < steps; ++step) {
      const double scale = 0.5 / (1.0 + step);
      for (std::size_t i : free_) {
        const double width = box.upper[i] - box.lower[i];
        if (g[i] > 0.0) x[i] += scale * width;
        if (g[i] < 0.0) x[i] -= scale * width;
        x[i] = std::clamp(x[i], box.lower[i], box.upper[i]);
      }
      if (Misclassified(model_, x, target_)) return x;
      g = nn::Grad(model_, x, target_).input;
    }

    for (int k = 0; k < corners; ++k) {
      for (std::size_t i = 0; i < n; ++i) corner[i] = box.lower[i];
      for (std::size_t i : free_) corner[i] = rng_.Coin() ? box.upper[i] : box.lower[i];
      if (Misclassified(model_, corner, target_)) return corner;
    }
    return std::nullopt;
  }

  const nn::MlpModel& model_;
  int target_;
  const VerifyOptions& opt_;
  Rng rng_;
  std::vector<std::size_t> free_;
};

}  // namespace

bool Box::Contains(std::span<const double> x) const {
  if (x.size() != size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lower[i] || x[i] > upper[i]) return false;
  }
  return true;
}

void Box::Validate() const {
  if (lower.size() != upper.size()) Fail(ErrorCode::kDimensionMismatch, "box bounds differ in length");
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!(lower[i] <= upper[i]) || lower[i] < 0.0 || upper[i] > 1.0) {
      Fail(ErrorCode::kInvalidArgument, "box coordinate " + std::to_string(i) + " is not within [0, 1]");
    }
  }
}

LogitBounds IbpBounds(const nn::MlpModel& model, const Box& box) {
  CheckBox(model, box);
  LogitBounds b{box.lower, box.upper};
  std::vector<double> lo, hi;
  for (const auto& layer : model.layers()) {
    PropagateLayer(layer, b.lower, b.upper, lo, hi);
    b.lower.swap(lo);
    b.upper.swap(hi);
  }
  return b;
}

double MarginLowerBound(const nn::MlpModel& model, const Box& box, int target) {
  CheckBox(model, box);
  const auto& layers = model.layers();
  std::vector<double> lo = box.lower, hi = box.upper, nlo, nhi;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    PropagateLayer(layers[l], lo, hi, nlo, nhi);
    lo.swap(nlo);
    hi.swap(nhi);
  }
  const DenseLayer& last = layers.back();
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < last.out; ++k) {
    if (k == target) continue;
    double bound = last.bias[target] - last.bias[k];
    for (int c = 0; c < last.in; ++c) {
      const double d = last.w(target, c) - last.w(k, c);
      bound += d >= 0.0 ? d * lo[c] : d * hi[c];
    }
    worst = std::min(worst, bound);
  }
  return worst;
}

LinearBound LinearMarginBound(const nn::MlpModel& model, const Box& box, int target) {
  CheckBox(model, box);
  const Relaxation relax(model.layers(), box, nullptr);
  const std::size_t top = model.layers().size() - 1;
  LinearBound out;
  out.margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < model.output_dim(); ++k) {
    if (k == target) continue;
    Pass pass;
    relax.Backward(MarginRow(model.output_dim(), target, k), top, nullptr, &pass);
    if (pass.bound < out.margin) {
      out.margin = pass.bound;
      out.slope = std::move(pass.slope);
    }
  }
  if (out.slope.empty()) out.slope.assign(box.size(), 0.0);
  return out;
}

void RobustnessQuery::Validate() const {
  if (model == nullptr || image == nullptr) Fail(ErrorCode::kInvalidArgument, "query needs a model and an image");
  if (!(eps > 0.0 && eps <= 1.0)) Fail(ErrorCode::kInvalidEpsilon, "eps must lie in (0, 1]");
  if (static_cast<int>(image->pixels.size()) != model->input_dim()) {
    Fail(ErrorCode::kDimensionMismatch, "image size does not match the model input");
  }
  if (target_class < 0 || target_class >= model->output_dim()) {
    Fail(ErrorCode::kInvalidArgument, "target class out of range");
  }
  for (std::size_t f : fixed) {
    if (f >= image->num_features()) Fail(ErrorCode::kInvalidArgument, "fixed feature index out of range");
  }
}

std::vector<std::size_t> RobustnessQuery::FreeCoordinates() const {
  std::vector<char> is_fixed(image->num_features(), 0);
  for (std::size_t f : fixed) is_fixed[f] = 1;
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < is_fixed.size(); ++f) {
    if (is_fixed[f]) continue;
    for (int c = 0; c < image->channels; ++c) out.push_back(f * image->channels + c);
  }
  return out;
}

Box RobustnessQuery::MakeBox() const {
  Validate();
  Box box{image->pixels, image->pixels};
  for (std::size_t i : FreeCoordinates()) {
    box.lower[i] = std::max(0.0, image->pixels[i] - eps);
    box.upper[i] = std::min(1.0, image->pixels[i] + eps);
  }
  return box;
}

std::string KindName(StabilityVerdict::Kind kind) {
  switch (kind) {
    case StabilityVerdict::Kind::kStable:
      return "stable";
    case StabilityVerdict::Kind::kCounterexample:
      return "counterexample";
    case StabilityVerdict::Kind::kUnknown:
      return "unknown";
  }
  return "?";
}

StabilityVerdict DecideStable(const RobustnessQuery& query, const VerifyOptions& options) {
  if (!(options.delta_min > 0.0)) Fail(ErrorCode::kInvalidArgument, "delta_min must be positive");
  Box root = query.MakeBox();
  auto verdict = BranchAndBound(query, options).Run(std::move(root));
  if (verdict.counterexample()) {
    const Box box = query.MakeBox();
    if (!box.Contains(verdict.point) || !Misclassified(*query.model, verdict.point, query.target_class)) {
      Fail(ErrorCode::kInternal, "counterexample failed re-validation");
    }
  }
  return verdict;
}

StabilityVerdict BruteForceStable(const RobustnessQuery& query, int levels) {
  if (levels < 1) Fail(ErrorCode::kInvalidArgument, "grid needs at least one level");
  const Box box = query.MakeBox();
  const auto free = query.FreeCoordinates();
  if (static_cast<double>(free.size()) * std::log10(static_cast<double>(levels)) >
      std::log10(kBruteForceLimit) + 1e-12) {
    Fail(ErrorCode::kTooLarge, std::to_string(levels) + "^" + std::to_string(free.size()) +
                                   " grid points exceed the brute-force limit");
  }
  const auto& model = *query.model;
  const auto& layers = model.layers();
  const DenseLayer& first = layers.front();

  auto level_value = [&](std::size_t coord, int k) {
    if (levels == 1) return 0.5 * (box.lower[coord] + box.upper[coord]);
    return box.lower[coord] + (box.upper[coord] - box.lower[coord]) * k / (levels - 1);
  };

  std::vector<double> x = box.lower;
  for (std::size_t coord : free) x[coord] = level_value(coord, 0);
  // First-layer pre-activations are updated incrementally as one coordinate
  // changes at a time (odometer order).
  std::vector<double> z0(first.bias.begin(), first.bias.end());
  for (int r = 0; r < first.out; ++r) {
    for (int c = 0; c < first.in; ++c) z0[r] += first.w(r, c) * x[c];
  }

  StabilityVerdict verdict;
  std::vector<int> digit(free.size(), 0);
  std::vector<double> cur, next;
  while (true) {
    ++verdict.boxes;
    cur = z0;
    if (first.activation == Activation::kRelu) {
      for (double& v : cur) v = std::max(v, 0.0);
    }
    for (std::size_t l = 1; l < layers.size(); ++l) {
      const auto& layer = layers[l];
      next.assign(layer.bias.begin(), layer.bias.end());
      for (int r = 0; r < layer.out; ++r) {
        double acc = next[r];
        for (int c = 0; c < layer.in; ++c) acc += layer.w(r, c) * cur[c];
        next[r] = layer.activation == Activation::kRelu ? std::max(acc, 0.0) : acc;
      }
      cur.swap(next);
    }
    if (nn::Argmax(cur) != query.target_class && Misclassified(model, x, query.target_class)) {
      verdict.kind = StabilityVerdict::Kind::kCounterexample;
      verdict.point = x;
      return verdict;
    }
    std::size_t pos = 0;
    while (pos < free.size() && digit[pos] == levels - 1) ++pos;
    if (pos == free.size()) break;
    for (std::size_t k = 0; k < pos; ++k) {
      const std::size_t coord = free[k];
      const double v = level_value(coord, 0);
      const double delta = v - x[coord];
      for (int r = 0; r < first.out; ++r) z0[r] += first.w(r, static_cast<int>(coord)) * delta;
      x[coord] = v;
      digit[k] = 0;
    }
    const std::size_t coord = free[pos];
    ++digit[pos];
    const double v = level_value(coord, digit[pos]);
    const double delta = v - x[coord];
    for (int r = 0; r < first.out; ++r) z0[r] += first.w(r, static_cast<int>(coord)) * delta;
    x[coord] = v;
    if (verdict.boxes % 4096 == 0) {  // shed accumulated rounding drift
      for (int r = 0; r < first.out; ++r) {
        double acc = first.bias[r];
        for (int c = 0; c < first.in; ++c) acc += first.w(r, c) * x[c];
        z0[r] = acc;
      }
    }
  }
  verdict.kind = StabilityVerdict::Kind::kStable;
  return verdict;
}

}  // namespace hexplain::verify
