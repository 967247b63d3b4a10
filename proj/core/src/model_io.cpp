#include <nlohmann/json.hpp>

#include "hexplain/error.hpp"
#include "hexplain/fileio.hpp"
#include "hexplain/neural.hpp"

namespace hexplain::nn {

using nlohmann::json;

std::string ModelToJson(const MlpModel& model) {
  json layers = json::array();
  for (const auto& l : model.layers()) {
    layers.push_back({{"in", l.in},
                      {"out", l.out},
                      {"activation", l.activation == Activation::kRelu ? "relu" : "identity"},
                      {"weights", l.weights},
                      {"bias", l.bias}});
  }
  json doc = {{"schema", kModelSchema},
              {"input_dim", model.input_dim()},
              {"output_dim", model.output_dim()},
              {"layers", std::move(layers)}};
  return doc.dump(1) + "\n";
}

MlpModel ModelFromJson(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParseError, std::string("model file: ") + e.what());
  }
  try {
    if (doc.at("schema").get<std::string>() != kModelSchema) {
      Fail(ErrorCode::kParseError, "model file has schema '" +
                                       doc.at("schema").get<std::string>() + "'");
    }
    std::vector<DenseLayer> layers;
    for (const auto& jl : doc.at("layers")) {
      DenseLayer l;
      l.in = jl.at("in").get<int>();
      l.out = jl.at("out").get<int>();
      const auto act = jl.at("activation").get<std::string>();
      if (act == "relu") {
        l.activation = Activation::kRelu;
      } else if (act == "identity") {
        l.activation = Activation::kIdentity;
      } else {
        Fail(ErrorCode::kParseError, "unknown activation '" + act + "'");
      }
      l.weights = jl.at("weights").get<std::vector<double>>();
      l.bias = jl.at("bias").get<std::vector<double>>();
      layers.push_back(std::move(l));
    }
    MlpModel model(std::move(layers));
    if (model.input_dim() != doc.at("input_dim").get<int>() ||
        model.output_dim() != doc.at("output_dim").get<int>()) {
      Fail(ErrorCode::kDimensionMismatch, "declared model dimensions disagree with its layers");
    }
    return model;
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParseError, std::string("model file: ") + e.what());
  }
}

void SaveModel(const std::string& path, const MlpModel& model) {
  WriteFileAtomic(path, ModelToJson(model));
}

MlpModel LoadModel(const std::string& path) { return ModelFromJson(ReadFile(path)); }

}  // namespace hexplain::nn
