#include <gtest/gtest.h>

#include <algorithm>

#include "hexplain/error.hpp"
#include "hexplain/neural.hpp"
#include "hexplain/random.hpp"
#include "hexplain/verify.hpp"
#include "support.hpp"

namespace hexplain::verify {
namespace {

using nn::Activation;
using nn::DenseLayer;
using nn::MlpModel;

Image RandomImage(Rng& rng, int w, int h, int channels = 1) {
  Image img(w, h, channels);
  for (auto& v : img.pixels) v = rng.Uniform();
  return img;
}

Box RandomBox(Rng& rng, int n) {
  Box b;
  for (int i = 0; i < n; ++i) {
    double a = rng.Uniform(), c = rng.Uniform();
    if (rng.Below(5) == 0) c = a;
    b.lower.push_back(std::min(a, c));
    b.upper.push_back(std::max(a, c));
  }
  return b;
}

std::vector<double> SampleIn(Rng& rng, const Box& b) {
  std::vector<double> x(b.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.Uniform(b.lower[i], b.upper[i]);
  return x;
}

double Margin(const std::vector<double>& z, int target) {
  double other = -1e300;
  for (std::size_t k = 0; k < z.size(); ++k) {
    if (static_cast<int>(k) != target) other = std::max(other, z[k]);
  }
  return z[target] - other;
}

// Two logits with z1 - z0 = 2x - 1: class 1 exactly when x > 0.5.
MlpModel StepNet() {
  return MlpModel({DenseLayer{1, 2, {-1.0, 1.0}, {0.5, -0.5}, Activation::kIdentity}});
}

MlpModel ConstantNet(int in) {
  DenseLayer h{in, 3, std::vector<double>(3 * in, 0.0), {0.2, 0.0, 0.1}, Activation::kRelu};
  DenseLayer o{3, 2, {1, 0, 0, 0, 1, 0}, {0.5, 0.0}, Activation::kIdentity};
  return MlpModel({h, o});
}

TEST(Ibp, PointBoxEqualsForward) {
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const auto model = MlpModel::Random(6, {7, 5}, 3, rng.NextU64());
    Box b;
    b.lower = SampleIn(rng, Box{std::vector<double>(6, 0.0), std::vector<double>(6, 1.0)});
    b.upper = b.lower;
    const auto z = nn::Forward(model, b.lower);
    const auto bounds = IbpBounds(model, b);
    for (std::size_t k = 0; k < z.size(); ++k) {
      EXPECT_NEAR(bounds.lower[k], z[k], 1e-9);
      EXPECT_NEAR(bounds.upper[k], z[k], 1e-9);
    }
  }
}

TEST(Ibp, ConstantNetwork) {
  const auto model = ConstantNet(4);
  Rng rng(2);
  const auto b = RandomBox(rng, 4);
  const auto bounds = IbpBounds(model, b);
  EXPECT_NEAR(bounds.lower[0], 0.7, 1e-12);
  EXPECT_NEAR(bounds.upper[0], 0.7, 1e-12);
  EXPECT_NEAR(bounds.lower[1], 0.0, 1e-12);
  EXPECT_NEAR(bounds.upper[1], 0.0, 1e-12);
}

TEST(Ibp, MonteCarloSoundness) {
  Rng rng(3);
  std::size_t violations = 0;
  for (int t = 0; t < 100; ++t) {
    const int in = 2 + static_cast<int>(rng.Below(10));
    const auto model = MlpModel::Random(in, {8, 6}, 3, rng.NextU64());
    const auto box = RandomBox(rng, in);
    const auto bounds = IbpBounds(model, box);
    const int target = static_cast<int>(rng.Below(3));
    const double margin_lb = MarginLowerBound(model, box, target);
    const auto linear = LinearMarginBound(model, box, target);
    EXPECT_EQ(linear.slope.size(), static_cast<std::size_t>(in));
    for (int s = 0; s < 100; ++s) {
      const auto x = SampleIn(rng, box);
      const auto z = nn::Forward(model, x);
      for (std::size_t k = 0; k < z.size(); ++k) {
        violations += z[k] < bounds.lower[k] - 1e-12 || z[k] > bounds.upper[k] + 1e-12;
      }
      const double m = Margin(z, target);
      violations += m < margin_lb - 1e-12;
      violations += m < linear.margin - 1e-9;
    }
  }
  EXPECT_EQ(violations, 0u);
}

TEST(Ibp, DimensionMismatch) {
  const auto model = MlpModel::Random(3, {2}, 2, 1);
  Box b{{0, 0}, {1, 1}};
  EXPECT_THROW(IbpBounds(model, b), Error);
}

TEST(DecideStable, AllFixedIsStable) {
  Rng rng(4);
  const auto model = MlpModel::Random(9, {6}, 2, 5);
  const auto img = RandomImage(rng, 3, 3);
  RobustnessQuery q{&model, &img, testing::AllIndices(9), 1.0, Norm::kLinf, nn::Predict(model, img.pixels)};
  EXPECT_TRUE(DecideStable(q).stable());
  EXPECT_TRUE(BruteForceStable(q, 3).stable());
}

TEST(DecideStable, ConstantNetworkIsStable) {
  const auto model = ConstantNet(4);
  Rng rng(5);
  const auto img = RandomImage(rng, 2, 2);
  RobustnessQuery q{&model, &img, {}, 1.0, Norm::kLinf, 0};
  EXPECT_TRUE(DecideStable(q).stable());
  EXPECT_TRUE(BruteForceStable(q, 5).stable());
}

TEST(DecideStable, StepNetCounterexample) {
  const auto model = StepNet();
  const Image img(1, 1, 1, {0.2});
  RobustnessQuery q{&model, &img, {}, 0.4, Norm::kLinf, 0};
  // A 0.01-spaced scan of [0, 0.6] finds a flip.
  bool flip = false;
  for (int i = 0; i <= 60; ++i) flip = flip || nn::Predict(model, std::vector<double>{i * 0.01}) != 0;
  ASSERT_TRUE(flip);
  const auto v = DecideStable(q);
  ASSERT_TRUE(v.counterexample());
  EXPECT_GE(v.point[0], 0.5);
  EXPECT_LE(v.point[0], 0.6 + 1e-12);
  EXPECT_NE(nn::Predict(model, v.point), 0);
  q.eps = 0.25;
  EXPECT_TRUE(DecideStable(q).stable());
}

TEST(DecideStable, RejectsBadQueries) {
  const auto model = StepNet();
  const Image img(1, 1, 1, {0.2});
  for (double eps : {0.0, -0.1, 1.5}) {
    RobustnessQuery q{&model, &img, {}, eps, Norm::kLinf, 0};
    try {
      DecideStable(q);
      FAIL() << eps;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidEpsilon);
    }
  }
  RobustnessQuery q{&model, &img, {3}, 0.5, Norm::kLinf, 0};
  EXPECT_THROW(DecideStable(q), Error);
  const Image wrong(2, 1, 1, {0.2, 0.3});
  RobustnessQuery q2{&model, &wrong, {}, 0.5, Norm::kLinf, 0};
  EXPECT_THROW(DecideStable(q2), Error);
}

TEST(BruteForce, TooLarge) {
  const auto model = MlpModel::Random(30, {4}, 2, 1);
  Rng rng(6);
  const auto img = RandomImage(rng, 30, 1);
  RobustnessQuery q{&model, &img, {}, 1.0, Norm::kLinf, nn::Predict(model, img.pixels)};
  try {
    BruteForceStable(q, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooLarge);
  }
}

TEST(BoxMaking, FreeCoordinatesRespectEpsilonAndChannels) {
  const auto model = MlpModel::Random(12, {3}, 2, 1);
  Image img(2, 2, 3);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = 0.1 * static_cast<double>(i % 10);
  RobustnessQuery q{&model, &img, {1, 3}, 0.25, Norm::kLinf, 0};
  const auto box = q.MakeBox();
  EXPECT_EQ(q.FreeCoordinates(), (std::vector<std::size_t>{0, 1, 2, 6, 7, 8}));
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const bool free = i < 3 || (i >= 6 && i < 9);
    if (free) {
      EXPECT_DOUBLE_EQ(box.lower[i], std::max(0.0, img.pixels[i] - 0.25));
      EXPECT_DOUBLE_EQ(box.upper[i], std::min(1.0, img.pixels[i] + 0.25));
    } else {
      EXPECT_EQ(box.lower[i], img.pixels[i]);
      EXPECT_EQ(box.upper[i], img.pixels[i]);
    }
  }
  q.eps = 1.0;
  const auto full = q.MakeBox();
  EXPECT_EQ(full.lower[0], 0.0);
  EXPECT_EQ(full.upper[0], 1.0);
}

// Randomised audit against the grid oracle; also checks every returned
// counterexample and that verdicts are not all of one kind.
TEST(DecideStable, AgreesWithGridOracle) {
  Rng rng(7);
  std::size_t stable = 0, cex = 0, unknown = 0;
  for (int t = 0; t < 200; ++t) {
    const int side = 3;
    const auto model = MlpModel::Random(side * side, {8, 6}, 2 + static_cast<int>(rng.Below(2)), rng.NextU64());
    const auto img = RandomImage(rng, side, side);
    RobustnessQuery q;
    q.model = &model;
    q.image = &img;
    q.target_class = nn::Predict(model, img.pixels);
    q.eps = std::vector<double>{0.05, 0.1, 0.3, 1.0}[rng.Below(4)];
    const int free = 1 + static_cast<int>(rng.Below(8));
    auto order = testing::AllIndices(side * side);
    rng.Shuffle(order);
    q.fixed.assign(order.begin() + free, order.end());
    std::sort(q.fixed.begin(), q.fixed.end());
    const auto v = DecideStable(q);
    const auto oracle = BruteForceStable(q, 5);
    if (v.stable()) {
      ++stable;
      ASSERT_TRUE(oracle.stable()) << "query " << t;
    } else if (v.counterexample()) {
      ++cex;
      EXPECT_TRUE(q.MakeBox().Contains(v.point));
      EXPECT_NE(nn::Predict(model, v.point), q.target_class);
    } else {
      ++unknown;
    }
    if (oracle.counterexample()) {
      EXPECT_NE(nn::Predict(model, oracle.point), q.target_class);
      EXPECT_FALSE(v.stable());
    }
  }
  EXPECT_GT(stable, 20u);
  EXPECT_GT(cex, 5u);
  EXPECT_EQ(unknown, 0u);
}

TEST(DecideStable, StableIsMonotoneInEpsilon) {
  Rng rng(8);
  for (int t = 0; t < 60; ++t) {
    const auto model = MlpModel::Random(16, {10}, 2, rng.NextU64());
    const auto img = RandomImage(rng, 4, 4);
    RobustnessQuery q{&model, &img, {}, 0.3, Norm::kLinf, nn::Predict(model, img.pixels)};
    for (std::size_t i = 0; i < 16; ++i) {
      if (rng.Coin()) q.fixed.push_back(i);
    }
    if (!DecideStable(q).stable()) continue;
    for (double eps : {0.2, 0.1, 0.01}) {
      q.eps = eps;
      EXPECT_TRUE(DecideStable(q).stable()) << t << " eps " << eps;
    }
  }
}

TEST(DecideStable, BudgetExhaustionIsUnknown) {
  Rng rng(9);
  VerifyOptions opts;
  opts.max_boxes = 1;
  opts.root_attack_steps = 0;
  opts.random_corners = 0;
  std::size_t unknown = 0;
  for (int t = 0; t < 30; ++t) {
    const auto model = MlpModel::Random(9, {12, 12}, 2, rng.NextU64());
    const auto img = RandomImage(rng, 3, 3);
    RobustnessQuery q{&model, &img, {}, 1.0, Norm::kLinf, nn::Predict(model, img.pixels)};
    const auto v = DecideStable(q, opts);
    if (v.unknown()) {
      ++unknown;
      EXPECT_FALSE(v.reason.empty());
    }
    if (v.stable()) EXPECT_TRUE(BruteForceStable(q, 3).stable());
  }
  EXPECT_GT(unknown, 0u);
}

}  // namespace
}  // namespace hexplain::verify
