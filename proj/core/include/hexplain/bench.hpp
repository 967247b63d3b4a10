#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hexplain/image.hpp"
#include "hexplain/neural.hpp"
#include "hexplain/tasks.hpp"

namespace hexplain::bench {

enum class Symbol { kDigit0, kDigit1, kEmpty, kGhost, kActor, kFlag };

std::string SymbolName(Symbol s);

struct GlyphParams {
  Symbol symbol = Symbol::kDigit0;
  int width = 10;
  int height = 10;
  int channels = 1;
  double jitter = 0.0;  // max offset of stroke anchors, in glyph-widths
  double noise = 0.0;   // additive uniform noise amplitude, [0, 0.3)
  std::uint64_t seed = 0;

  void Validate() const;
};

// Parametric sprite (4x4 supersampled coverage) plus seeded noise, clamped
// to [0, 1]. Deterministic in all fields.
Image RenderGlyph(const GlyphParams& params);

// Symbol drawn for neural label `label` of a task (digit or grid cell).
Symbol SymbolForLabel(const tasks::TaskSpec& task, int label);

// Rendering settings shared by instance and dataset generation.
struct GlyphConfig {
  int digit_size = 10;  // digits are digit_size x digit_size
  int cell_size = 8;    // grid cells are cell_size x cell_size
  int channels = 1;
  double jitter = 0.05;
  double noise = 0.1;

  int size_for(const tasks::TaskSpec& task) const {
    return task.kind == tasks::TaskKind::kPacman ? cell_size : digit_size;
  }
};

struct Instance {
  tasks::TaskSpec task;
  std::vector<Image> images;
  tasks::SymbolicInput labels;  // ground truth used to render the images
  std::uint64_t seed = 0;

  void Validate() const;
  friend bool operator==(const Instance&, const Instance&) = default;
};

// Lex/Regex: n uniform random bits. Pacman: actor, flag and up to eight
// ghosts on distinct uniformly chosen cells. Deterministic in the seed.
tasks::SymbolicInput GenerateLabels(const tasks::TaskSpec& task, std::uint64_t seed);
Instance RenderInstance(const tasks::TaskSpec& task, const tasks::SymbolicInput& labels,
                        std::uint64_t seed, const GlyphConfig& glyphs = {});
Instance GenerateInstance(const tasks::TaskSpec& task, std::uint64_t seed,
                          const GlyphConfig& glyphs = {});

// `count` instances whose label strings are pairwise distinct for as long
// as the label space allows; once every combination has been used the
// uniqueness bookkeeping starts over.
std::vector<Instance> GenerateBenchmarkSet(const tasks::TaskSpec& task, std::size_t count,
                                           std::uint64_t seed, const GlyphConfig& glyphs = {});

// Labelled single glyphs for training the per-input network, classes drawn
// uniformly from the task's label alphabet.
nn::Dataset MakeGlyphDataset(const tasks::TaskSpec& task, std::size_t count,
                             std::uint64_t seed, const GlyphConfig& glyphs = {});

// Flattened whole instances labelled by their symbolic decision, for the
// end-to-end baseline network. Class = decision value (Lex/Regex) or path
// length with 0 standing for unreachable (Pacman).
nn::Dataset MakeWholeInstanceDataset(const tasks::TaskSpec& task, std::size_t count,
                                     std::uint64_t seed, const GlyphConfig& glyphs = {});
int DecisionClass(const tasks::TaskSpec& task, const tasks::Decision& d);
int NumDecisionClasses(const tasks::TaskSpec& task);
Image FlattenInstance(const std::vector<Image>& images);

// Structured text documents.
inline constexpr const char* kInstanceSchema = "hexplain-instance/1";
inline constexpr const char* kDatasetSchema = "hexplain-dataset/1";
std::string InstanceToJson(const Instance& instance);
Instance InstanceFromJson(const std::string& text);
void SaveInstance(const std::string& path, const Instance& instance);
Instance LoadInstance(const std::string& path);
std::string DatasetToJson(const nn::Dataset& data);
nn::Dataset DatasetFromJson(const std::string& text);

// MNIST-style IDX files: big-endian magic 0x00000803 (unsigned-byte images,
// dims n x rows x cols) and 0x00000801 (unsigned-byte labels, dim n). Pixels
// are scaled by 1/255. With `keep_labels`, only those labels are retained.
nn::Dataset LoadIdx(const std::string& images_path, const std::string& labels_path,
                    const std::optional<std::set<int>>& keep_labels = std::nullopt);
nn::Dataset ParseIdx(std::string_view images, std::string_view labels,
                     const std::optional<std::set<int>>& keep_labels = std::nullopt);

}  // namespace hexplain::bench
