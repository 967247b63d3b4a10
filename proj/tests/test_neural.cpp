#include <gtest/gtest.h>

#include <cmath>

#include "hexplain/bench.hpp"
#include "hexplain/error.hpp"
#include "hexplain/neural.hpp"
#include "hexplain/random.hpp"
#include "support.hpp"

namespace hexplain::nn {
namespace {

// Straightforward triple loop, kept separate from the library's evaluator.
std::vector<double> NaiveForward(const MlpModel& model, const std::vector<double>& x) {
  std::vector<double> cur = x;
  for (const auto& L : model.layers()) {
    std::vector<double> next(L.out);
    for (int r = 0; r < L.out; ++r) {
      long double acc = L.bias[r];
      for (int c = 0; c < L.in; ++c) acc += static_cast<long double>(L.weights[r * L.in + c]) * cur[c];
      double v = static_cast<double>(acc);
      if (L.activation == Activation::kRelu && v < 0) v = 0;
      next[r] = v;
    }
    cur = std::move(next);
  }
  return cur;
}

double NaiveLoss(const MlpModel& model, const std::vector<double>& x, int target) {
  const auto z = NaiveForward(model, x);
  double mx = z[0];
  for (double v : z) mx = std::max(mx, v);
  double s = 0;
  for (double v : z) s += std::exp(v - mx);
  return std::log(s) + mx - z[target];
}

std::vector<double> RandomInput(Rng& rng, int n) {
  std::vector<double> x(n);
  for (auto& v : x) v = rng.Uniform();
  return x;
}

double RelErr(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

TEST(Forward, MatchesNaiveEvaluator) {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const int in = 1 + static_cast<int>(rng.Below(30));
    std::vector<int> hidden(rng.Below(3));
    for (auto& h : hidden) h = 1 + static_cast<int>(rng.Below(12));
    const int out = 2 + static_cast<int>(rng.Below(3));
    const auto model = MlpModel::Random(in, hidden, out, rng.NextU64());
    const auto x = RandomInput(rng, in);
    const auto a = Forward(model, x);
    const auto b = NaiveForward(model, x);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-12);
  }
}

TEST(Forward, ConstantNetwork) {
  DenseLayer L{4, 3, std::vector<double>(12, 0.0), {1.0, 0.0, 0.0}, Activation::kIdentity};
  const MlpModel model({L});
  Rng rng(2);
  for (int t = 0; t < 10; ++t) EXPECT_EQ(Predict(model, RandomInput(rng, 4)), 0);
  const auto g = Grad(model, RandomInput(rng, 4), 1);
  for (double v : g.input) EXPECT_EQ(v, 0.0);
}

TEST(Forward, IdentityNetwork) {
  const MlpModel model({DenseLayer{1, 1, {1.0}, {0.0}, Activation::kIdentity}});
  const std::vector<double> x{0.37};
  EXPECT_EQ(Forward(model, x)[0], 0.37);
}

TEST(Forward, ArgmaxTieBreaksLow) {
  const std::vector<double> z{1.0, 3.0, 3.0};
  EXPECT_EQ(Argmax(z), 1);
}

TEST(Forward, DimensionMismatch) {
  const auto model = MlpModel::Random(4, {3}, 2, 1);
  try {
    Forward(model, std::vector<double>(5, 0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
  EXPECT_THROW(Grad(model, std::vector<double>(3, 0.0), 0), Error);
  EXPECT_THROW(Grad(model, std::vector<double>(4, 0.0), 2), Error);
}

TEST(Loss, NonNegativeAndZeroOnlyWhenExact) {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> z(3);
    for (auto& v : z) v = rng.Uniform(-5, 5);
    const double l = CrossEntropy(z, static_cast<int>(rng.Below(3)));
    EXPECT_GE(l, 0.0);
    EXPECT_GT(l, 1e-9);
  }
  const std::vector<double> exact{200.0, 0.0};
  EXPECT_LE(CrossEntropy(exact, 0), 1e-9);
  const auto p = Softmax(exact);
  EXPECT_NEAR(p[0] + p[1], 1.0, 1e-15);
}

TEST(Grad, MatchesCentralDifferences) {
  Rng rng(4);
  const double h = 1e-5;
  double worst = 0;
  for (int t = 0; t < 20; ++t) {
    const int in = 3 + static_cast<int>(rng.Below(8));
    auto model = MlpModel::Random(in, {6, 5}, 3, rng.NextU64());
    const auto x = RandomInput(rng, in);
    const int target = static_cast<int>(rng.Below(3));
    const auto g = Grad(model, x, target);
    EXPECT_NEAR(g.loss, NaiveLoss(model, x, target), 1e-12);
    for (std::size_t l = 0; l < model.layers().size(); ++l) {
      auto& L = model.mutable_layers()[l];
      for (std::size_t k = 0; k < L.weights.size(); ++k) {
        const double w0 = L.weights[k];
        L.weights[k] = w0 + h;
        const double up = NaiveLoss(model, x, target);
        L.weights[k] = w0 - h;
        const double down = NaiveLoss(model, x, target);
        L.weights[k] = w0;
        worst = std::max(worst, RelErr(g.layers[l].weights[k], (up - down) / (2 * h)));
      }
      for (std::size_t k = 0; k < L.bias.size(); ++k) {
        const double b0 = L.bias[k];
        L.bias[k] = b0 + h;
        const double up = NaiveLoss(model, x, target);
        L.bias[k] = b0 - h;
        const double down = NaiveLoss(model, x, target);
        L.bias[k] = b0;
        worst = std::max(worst, RelErr(g.layers[l].bias[k], (up - down) / (2 * h)));
      }
    }
    for (int i = 0; i < in; ++i) {
      auto xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      worst = std::max(worst, RelErr(g.input[i], (NaiveLoss(model, xp, target) - NaiveLoss(model, xm, target)) / (2 * h)));
    }
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Grad, SmallStepDecreasesLoss) {
  Rng rng(5);
  auto model = MlpModel::Random(6, {8}, 2, 77);
  const auto x = RandomInput(rng, 6);
  const auto g = Grad(model, x, 1);
  for (std::size_t l = 0; l < model.layers().size(); ++l) {
    auto& L = model.mutable_layers()[l];
    for (std::size_t k = 0; k < L.weights.size(); ++k) L.weights[k] -= 1e-3 * g.layers[l].weights[k];
    for (std::size_t k = 0; k < L.bias.size(); ++k) L.bias[k] -= 1e-3 * g.layers[l].bias[k];
  }
  EXPECT_LT(CrossEntropy(Forward(model, x), 1), g.loss);
}

TEST(Train, SeparableToySet) {
  Dataset data;
  Rng rng(6);
  for (int i = 0; i < 200; ++i) {
    const double a = rng.Uniform(), b = rng.Uniform();
    if (std::abs(a - b) < 0.05) continue;
    data.push_back({Image(2, 1, 1, {a, b}), a > b ? 1 : 0});
  }
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.hidden = {};
  cfg.learning_rate = 0.5;
  const auto model = Train(data, cfg);
  EXPECT_GE(Accuracy(model, data), 0.99);
}

TEST(Train, GlyphDigitsHeldOut) {
  const auto task = tasks::TaskSpec::Lex(2);
  const auto train = bench::MakeGlyphDataset(task, 2000, 11);
  const auto test = bench::MakeGlyphDataset(task, 500, 12);
  TrainConfig cfg;
  cfg.hidden = {10, 10};
  const auto model = Train(train, cfg);
  EXPECT_GE(Accuracy(model, test), 0.97);
}

TEST(Train, Deterministic) {
  const auto data = bench::MakeGlyphDataset(tasks::TaskSpec::Lex(2), 300, 13);
  TrainConfig cfg;
  cfg.epochs = 3;
  const auto a = Train(data, cfg);
  const auto b = Train(data, cfg);
  EXPECT_TRUE(a == b);
  cfg.seed = 2;
  EXPECT_FALSE(Train(data, cfg) == a);
  const auto x = data.front().image.pixels;
  EXPECT_EQ(Forward(a, x), Forward(b, x));
}

TEST(Train, Errors) {
  try {
    Train({}, TrainConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyDataset);
  }
  Dataset mixed{{Image(2, 1, 1, {0, 1}), 0}, {Image(3, 1, 1, {0, 1, 0}), 1}};
  EXPECT_THROW(Train(mixed, TrainConfig{}), Error);
  Dataset bad_label{{Image(2, 1, 1, {0, 1}), 5}};
  EXPECT_THROW(Train(bad_label, TrainConfig{}), Error);
}

TEST(ModelFile, RoundTrip) {
  const auto model = MlpModel::Random(7, {5, 4}, 3, 99);
  EXPECT_TRUE(ModelFromJson(ModelToJson(model)) == model);
  const auto dir = testing::ScratchDir("model");
  SaveModel((dir / "m.json").string(), model);
  EXPECT_TRUE(LoadModel((dir / "m.json").string()) == model);
}

TEST(ModelFile, RejectsBadDocuments) {
  for (const char* text : {"not json", "{\"schema\":\"other\"}", "{\"schema\":\"hexplain-mlp/1\"}"}) {
    try {
      ModelFromJson(text);
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kParseError) << text;
    }
  }
  EXPECT_THROW(ModelFromJson("{\"schema\":\"hexplain-mlp/1\",\"layers\":[]}"), Error);
  EXPECT_THROW(LoadModel("/nonexistent/model.json"), Error);
}

}  // namespace
}  // namespace hexplain::nn
