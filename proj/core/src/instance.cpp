#include <nlohmann/json.hpp>

#include <set>

#include "hexplain/bench.hpp"
#include "hexplain/error.hpp"
#include "hexplain/fileio.hpp"
#include "hexplain/random.hpp"

namespace hexplain::bench {

using nlohmann::json;

namespace {

constexpr int kPacmanGhosts = 8;

json ImageToJson(const Image& img) {
  return {{"width", img.width}, {"height", img.height}, {"channels", img.channels},
          {"pixels", img.pixels}};
}

Image ImageFromJson(const json& j) {
  Image img(j.at("width").get<int>(), j.at("height").get<int>(), j.at("channels").get<int>(),
            j.at("pixels").get<std::vector<double>>());
  img.Validate();
  return img;
}

json ParseDocument(const std::string& text, const char* schema, const char* what) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParseError, std::string(what) + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("schema") || !doc["schema"].is_string() ||
      doc["schema"].get<std::string>() != schema) {
    Fail(ErrorCode::kParseError, std::string(what) + ": expected schema " + schema);
  }
  return doc;
}

}  // namespace

void Instance::Validate() const {
  task.Validate();
  if (images.size() != static_cast<std::size_t>(task.n)) {
    Fail(ErrorCode::kMalformedInput, "instance needs one image per input");
  }
  tasks::ValidateInput(task, labels);
  for (const auto& img : images) {
    img.Validate();
    if (img.width != images[0].width || img.height != images[0].height ||
        img.channels != images[0].channels) {
      Fail(ErrorCode::kMalformedInput, "instance images differ in shape");
    }
  }
}

tasks::SymbolicInput GenerateLabels(const tasks::TaskSpec& task, std::uint64_t seed) {
  task.Validate();
  Rng rng(seed);
  tasks::SymbolicInput labels(task.n, 0);
  if (task.kind != tasks::TaskKind::kPacman) {
    for (int& b : labels) b = rng.Coin() ? 1 : 0;
    return labels;
  }
  std::vector<int> cells(task.n);
  for (int i = 0; i < task.n; ++i) cells[i] = i;
  rng.Shuffle(cells);
  labels[cells[0]] = tasks::kActor;
  labels[cells[1]] = tasks::kFlag;
  const int ghosts = std::min(kPacmanGhosts, task.n - 2);
  for (int g = 0; g < ghosts; ++g) labels[cells[2 + g]] = tasks::kGhost;
  return labels;
}

Instance RenderInstance(const tasks::TaskSpec& task, const tasks::SymbolicInput& labels,
                        std::uint64_t seed, const GlyphConfig& glyphs) {
  tasks::ValidateInput(task, labels);
  Instance inst;
  inst.task = task;
  inst.labels = labels;
  inst.seed = seed;
  const int size = glyphs.size_for(task);
  for (int i = 0; i < task.n; ++i) {
    GlyphParams p;
    p.symbol = SymbolForLabel(task, labels[i]);
    p.width = p.height = size;
    p.channels = glyphs.channels;
    p.jitter = glyphs.jitter;
    p.noise = glyphs.noise;
    p.seed = SubSeed(seed, static_cast<std::uint64_t>(i));
    inst.images.push_back(RenderGlyph(p));
  }
  return inst;
}

Instance GenerateInstance(const tasks::TaskSpec& task, std::uint64_t seed,
                          const GlyphConfig& glyphs) {
  return RenderInstance(task, GenerateLabels(task, SubSeed(seed, "labels")), seed, glyphs);
}

std::vector<Instance> GenerateBenchmarkSet(const tasks::TaskSpec& task, std::size_t count,
                                           std::uint64_t seed, const GlyphConfig& glyphs) {
  task.Validate();
  // Distinct label strings available; saturates for large tasks.
  std::uint64_t space = ~std::uint64_t{0};
  if (task.kind != tasks::TaskKind::kPacman && task.n < 63) space = std::uint64_t{1} << task.n;

  std::vector<Instance> out;
  std::set<tasks::SymbolicInput> used;
  for (std::uint64_t attempt = 0; out.size() < count; ++attempt) {
    if (used.size() >= space) used.clear();
    const std::uint64_t s = SubSeed(seed, attempt);
    auto labels = GenerateLabels(task, SubSeed(s, "labels"));
    if (!used.insert(labels).second) continue;
    out.push_back(RenderInstance(task, labels, s, glyphs));
  }
  return out;
}

nn::Dataset MakeGlyphDataset(const tasks::TaskSpec& task, std::size_t count, std::uint64_t seed,
                             const GlyphConfig& glyphs) {
  task.Validate();
  Rng rng(SubSeed(seed, "classes"));
  nn::Dataset data;
  data.reserve(count);
  const int size = glyphs.size_for(task);
  for (std::size_t k = 0; k < count; ++k) {
    const int label = static_cast<int>(rng.Below(task.num_labels()));
    GlyphParams p;
    p.symbol = SymbolForLabel(task, label);
    p.width = p.height = size;
    p.channels = glyphs.channels;
    p.jitter = glyphs.jitter;
    p.noise = glyphs.noise;
    p.seed = SubSeed(seed, static_cast<std::uint64_t>(k));
    data.push_back({RenderGlyph(p), label});
  }
  return data;
}

int DecisionClass(const tasks::TaskSpec& task, const tasks::Decision& d) {
  if (task.kind != tasks::TaskKind::kPacman) return d.value() ? 1 : 0;
  return d.reachable() ? *d.length() : 0;
}

int NumDecisionClasses(const tasks::TaskSpec& task) {
  return task.kind == tasks::TaskKind::kPacman ? task.n : 2;
}

Image FlattenInstance(const std::vector<Image>& images) {
  if (images.empty()) Fail(ErrorCode::kInvalidArgument, "no images to flatten");
  // Row-major images of equal width concatenate into one tall image.
  std::vector<double> pixels;
  int height = 0;
  for (const auto& img : images) {
    if (img.width != images[0].width || img.channels != images[0].channels) {
      Fail(ErrorCode::kDimensionMismatch, "images differ in shape");
    }
    height += img.height;
    pixels.insert(pixels.end(), img.pixels.begin(), img.pixels.end());
  }
  Image out(images[0].width, height, images[0].channels, std::move(pixels));
  return out;
}

nn::Dataset MakeWholeInstanceDataset(const tasks::TaskSpec& task, std::size_t count,
                                     std::uint64_t seed, const GlyphConfig& glyphs) {
  nn::Dataset data;
  data.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const auto inst = GenerateInstance(task, SubSeed(seed, static_cast<std::uint64_t>(k)), glyphs);
    data.push_back({FlattenInstance(inst.images),
                    DecisionClass(task, tasks::EvalTask(task, inst.labels))});
  }
  return data;
}

std::string InstanceToJson(const Instance& instance) {
  json images = json::array();
  for (const auto& img : instance.images) images.push_back(ImageToJson(img));
  json doc = {{"schema", kInstanceSchema},
              {"task", instance.task.Name()},
              {"seed", instance.seed},
              {"labels", instance.labels},
              {"images", std::move(images)}};
  return doc.dump(1) + "\n";
}

Instance InstanceFromJson(const std::string& text) {
  const json doc = ParseDocument(text, kInstanceSchema, "instance file");
  Instance inst;
  try {
    inst.task = tasks::TaskSpec::Parse(doc.at("task").get<std::string>());
    inst.seed = doc.at("seed").get<std::uint64_t>();
    inst.labels = doc.at("labels").get<std::vector<int>>();
    for (const auto& j : doc.at("images")) inst.images.push_back(ImageFromJson(j));
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParseError, std::string("instance file: ") + e.what());
  }
  inst.Validate();
  return inst;
}

void SaveInstance(const std::string& path, const Instance& instance) {
  WriteFileAtomic(path, InstanceToJson(instance));
}

Instance LoadInstance(const std::string& path) { return InstanceFromJson(ReadFile(path)); }

std::string DatasetToJson(const nn::Dataset& data) {
  json items = json::array();
  for (const auto& item : data) {
    json j = ImageToJson(item.image);
    j["label"] = item.label;
    items.push_back(std::move(j));
  }
  json doc = {{"schema", kDatasetSchema}, {"items", std::move(items)}};
  return doc.dump(1) + "\n";
}

nn::Dataset DatasetFromJson(const std::string& text) {
  const json doc = ParseDocument(text, kDatasetSchema, "dataset file");
  nn::Dataset data;
  try {
    for (const auto& j : doc.at("items")) data.push_back({ImageFromJson(j), j.at("label").get<int>()});
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParseError, std::string("dataset file: ") + e.what());
  }
  return data;
}

}  // namespace hexplain::bench
