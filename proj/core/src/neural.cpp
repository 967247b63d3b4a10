#include "hexplain/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hexplain/error.hpp"
#include "hexplain/random.hpp"

namespace hexplain::nn {

namespace {

void CheckInput(const MlpModel& model, std::size_t size) {
  if (static_cast<int>(size) != model.input_dim()) {
    Fail(ErrorCode::kDimensionMismatch, "model expects " + std::to_string(model.input_dim()) +
                                            " inputs, got " + std::to_string(size));
  }
}

void Affine(const DenseLayer& layer, std::span<const double> in, std::vector<double>& out) {
  out.assign(layer.bias.begin(), layer.bias.end());
  for (int r = 0; r < layer.out; ++r) {
    const double* row = layer.weights.data() + static_cast<std::size_t>(r) * layer.in;
    double acc = out[r];
    for (int c = 0; c < layer.in; ++c) acc += row[c] * in[c];
    out[r] = acc;
  }
}

void Activate(Activation act, std::vector<double>& v) {
  if (act == Activation::kRelu) {
    for (double& x : v) x = x > 0.0 ? x : 0.0;
  }
}

std::vector<double> StableSoftmax(std::span<const double> logits) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) sum += p[i] = std::exp(logits[i] - peak);
  for (double& x : p) x /= sum;
  return p;
}

DenseLayer ZerosLike(const DenseLayer& layer) {
  DenseLayer z;
  z.in = layer.in;
  z.out = layer.out;
  z.activation = layer.activation;
  z.weights.assign(layer.weights.size(), 0.0);
  z.bias.assign(layer.bias.size(), 0.0);
  return z;
}

// Accumulates d loss / d params into `acc` and returns the loss.
double Backprop(const MlpModel& model, std::span<const double> x, int target,
                std::vector<DenseLayer>& acc, std::vector<double>* input_grad) {
  const auto& layers = model.layers();
  if (target < 0 || target >= model.output_dim()) {
    Fail(ErrorCode::kInvalidArgument, "target class out of range");
  }
  std::vector<std::vector<double>> acts{std::vector<double>(x.begin(), x.end())};
  std::vector<std::vector<double>> pre;
  for (const auto& layer : layers) {
    std::vector<double> z;
    Affine(layer, acts.back(), z);
    pre.push_back(z);
    Activate(layer.activation, z);
    acts.push_back(std::move(z));
  }
  const auto& logits = acts.back();
  const double loss = CrossEntropy(logits, target);

  std::vector<double> delta = StableSoftmax(logits);
  delta[target] -= 1.0;
  for (int l = static_cast<int>(layers.size()) - 1; l >= 0; --l) {
    const auto& layer = layers[l];
    if (layer.activation == Activation::kRelu) {
      for (int r = 0; r < layer.out; ++r) {
        if (pre[l][r] <= 0.0) delta[r] = 0.0;
      }
    }
    const auto& a_prev = acts[l];
    auto& g = acc[l];
    for (int r = 0; r < layer.out; ++r) {
      g.bias[r] += delta[r];
      double* grow = g.weights.data() + static_cast<std::size_t>(r) * layer.in;
      for (int c = 0; c < layer.in; ++c) grow[c] += delta[r] * a_prev[c];
    }
    if (l == 0 && input_grad == nullptr) break;
    std::vector<double> prev(layer.in, 0.0);
    for (int r = 0; r < layer.out; ++r) {
      const double* row = layer.weights.data() + static_cast<std::size_t>(r) * layer.in;
      for (int c = 0; c < layer.in; ++c) prev[c] += row[c] * delta[r];
    }
    delta = std::move(prev);
  }
  if (input_grad != nullptr) *input_grad = std::move(delta);
  return loss;
}

}  // namespace

MlpModel::MlpModel(std::vector<DenseLayer> layers) : layers_(std::move(layers)) { Validate(); }

void MlpModel::Validate() const {
  if (layers_.empty()) Fail(ErrorCode::kDimensionMismatch, "model has no layers");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.in < 1 || l.out < 1 ||
        l.weights.size() != static_cast<std::size_t>(l.in) * l.out ||
        l.bias.size() != static_cast<std::size_t>(l.out)) {
      Fail(ErrorCode::kDimensionMismatch, "layer " + std::to_string(i) + " has inconsistent shape");
    }
    if (i > 0 && layers_[i - 1].out != l.in) {
      Fail(ErrorCode::kDimensionMismatch, "layer " + std::to_string(i) + " does not chain");
    }
  }
  if (layers_.back().activation != Activation::kIdentity) {
    Fail(ErrorCode::kDimensionMismatch, "output layer must be linear");
  }
}

bool operator==(const MlpModel& a, const MlpModel& b) {
  if (a.layers_.size() != b.layers_.size()) return false;
  for (std::size_t i = 0; i < a.layers_.size(); ++i) {
    const auto& x = a.layers_[i];
    const auto& y = b.layers_[i];
    if (x.in != y.in || x.out != y.out || x.activation != y.activation ||
        x.weights != y.weights || x.bias != y.bias) {
      return false;
    }
  }
  return true;
}

MlpModel MlpModel::Random(int input_dim, const std::vector<int>& hidden, int output_dim,
                          std::uint64_t seed) {
  Rng rng(seed);
  std::vector<DenseLayer> layers;
  int in = input_dim;
  for (std::size_t i = 0; i <= hidden.size(); ++i) {
    DenseLayer l;
    l.in = in;
    l.out = i < hidden.size() ? hidden[i] : output_dim;
    l.activation = i < hidden.size() ? Activation::kRelu : Activation::kIdentity;
    const double s = 1.0 / std::sqrt(static_cast<double>(in));
    l.weights.resize(static_cast<std::size_t>(l.in) * l.out);
    for (double& w : l.weights) w = rng.Uniform(-s, s);
    l.bias.resize(l.out);
    for (double& b : l.bias) b = rng.Uniform(-s, s);
    in = l.out;
    layers.push_back(std::move(l));
  }
  return MlpModel(std::move(layers));
}

std::vector<double> Forward(const MlpModel& model, std::span<const double> x) {
  CheckInput(model, x.size());
  std::vector<double> cur(x.begin(), x.end());
  std::vector<double> next;
  for (const auto& layer : model.layers()) {
    Affine(layer, cur, next);
    Activate(layer.activation, next);
    cur.swap(next);
  }
  return cur;
}

int Argmax(std::span<const double> logits) {
  int best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = static_cast<int>(i);
  }
  return best;
}

double CrossEntropy(std::span<const double> logits, int target) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - peak);
  return std::log(sum) - (logits[target] - peak);
}

Gradients Grad(const MlpModel& model, std::span<const double> x, int target) {
  CheckInput(model, x.size());
  Gradients g;
  for (const auto& layer : model.layers()) g.layers.push_back(ZerosLike(layer));
  g.loss = Backprop(model, x, target, g.layers, &g.input);
  return g;
}

void TrainConfig::Validate() const {
  if (!(learning_rate > 0.0) || epochs < 1 || batch_size < 1 || num_classes < 2) {
    Fail(ErrorCode::kInvalidArgument, "training configuration must be positive");
  }
  for (int h : hidden) {
    if (h < 1) Fail(ErrorCode::kInvalidArgument, "hidden layer width must be positive");
  }
}

MlpModel Train(const Dataset& data, const TrainConfig& cfg) {
  cfg.Validate();
  if (data.empty()) Fail(ErrorCode::kEmptyDataset, "cannot train on an empty dataset");
  const std::size_t dim = data.front().image.pixels.size();
  for (const auto& ex : data) {
    if (ex.image.pixels.size() != dim) Fail(ErrorCode::kDimensionMismatch, "dataset images differ in size");
    if (ex.label < 0 || ex.label >= cfg.num_classes) Fail(ErrorCode::kInvalidArgument, "label out of range");
  }

  MlpModel model = MlpModel::Random(static_cast<int>(dim), cfg.hidden, cfg.num_classes,
                                    SubSeed(cfg.seed, "init"));
  Rng shuffle_rng(SubSeed(cfg.seed, "shuffle"));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<DenseLayer> acc;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.Shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      acc.clear();
      for (const auto& layer : model.layers()) acc.push_back(ZerosLike(layer));
      for (std::size_t k = start; k < end; ++k) {
        const auto& ex = data[order[k]];
        Backprop(model, ex.image.pixels, ex.label, acc, nullptr);
      }
      const double step = cfg.learning_rate / static_cast<double>(end - start);
      auto& layers = model.mutable_layers();
      for (std::size_t l = 0; l < layers.size(); ++l) {
        for (std::size_t i = 0; i < layers[l].weights.size(); ++i) layers[l].weights[i] -= step * acc[l].weights[i];
        for (std::size_t i = 0; i < layers[l].bias.size(); ++i) layers[l].bias[i] -= step * acc[l].bias[i];
      }
    }
  }
  return model;
}

double Accuracy(const MlpModel& model, const Dataset& data) {
  if (data.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& ex : data) correct += Predict(model, ex.image.pixels) == ex.label ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

std::vector<double> Softmax(std::span<const double> logits) { return StableSoftmax(logits); }

}  // namespace hexplain::nn
