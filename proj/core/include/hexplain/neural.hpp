#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hexplain/image.hpp"

namespace hexplain::nn {

enum class Activation { kRelu, kIdentity };

// Fully connected layer: out = act(W * in + b), W row-major (out x in).
struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<double> weights;
  std::vector<double> bias;
  Activation activation = Activation::kRelu;

  double w(int row, int col) const { return weights[static_cast<std::size_t>(row) * in + col]; }
};

class MlpModel {
 public:
  MlpModel() = default;
  explicit MlpModel(std::vector<DenseLayer> layers);

  // Scaled uniform(-s, s) initialisation with s = 1 / sqrt(fan_in); hidden
  // layers use ReLU, the output layer is linear.
  static MlpModel Random(int input_dim, const std::vector<int>& hidden, int output_dim,
                         std::uint64_t seed);

  int input_dim() const { return layers_.empty() ? 0 : layers_.front().in; }
  int output_dim() const { return layers_.empty() ? 0 : layers_.back().out; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }

  void Validate() const;

  friend bool operator==(const MlpModel& a, const MlpModel& b);

 private:
  std::vector<DenseLayer> layers_;
};

std::vector<double> Forward(const MlpModel& model, std::span<const double> x);
inline std::vector<double> Forward(const MlpModel& model, const Image& x) {
  return Forward(model, x.pixels);
}

// Index of the largest logit, lowest index on ties.
int Argmax(std::span<const double> logits);
inline int Predict(const MlpModel& model, std::span<const double> x) {
  return Argmax(Forward(model, x));
}

std::vector<double> Softmax(std::span<const double> logits);

// Softmax cross-entropy of `logits` against class `target`.
double CrossEntropy(std::span<const double> logits, int target);

struct Gradients {
  double loss = 0.0;
  std::vector<DenseLayer> layers;  // same shapes as the model; d loss / d W, b
  std::vector<double> input;       // d loss / d x
};

Gradients Grad(const MlpModel& model, std::span<const double> x, int target);

struct LabeledImage {
  Image image;
  int label = 0;
};
using Dataset = std::vector<LabeledImage>;

struct TrainConfig {
  double learning_rate = 0.05;
  int epochs = 30;
  int batch_size = 16;
  std::uint64_t seed = 1;
  std::vector<int> hidden{10, 10};
  int num_classes = 2;

  void Validate() const;
};

// Mini-batch SGD on softmax cross-entropy. Bit-reproducible for a seed.
MlpModel Train(const Dataset& data, const TrainConfig& cfg);

double Accuracy(const MlpModel& model, const Dataset& data);

// Model files: JSON document with schema "hexplain-mlp/1".
inline constexpr const char* kModelSchema = "hexplain-mlp/1";
std::string ModelToJson(const MlpModel& model);
MlpModel ModelFromJson(const std::string& text);
void SaveModel(const std::string& path, const MlpModel& model);
MlpModel LoadModel(const std::string& path);

}  // namespace hexplain::nn
