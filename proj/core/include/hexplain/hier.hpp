#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hexplain/attribution.hpp"
#include "hexplain/axp.hpp"
#include "hexplain/bench.hpp"
#include "hexplain/neural.hpp"
#include "hexplain/tasks.hpp"
#include "hexplain/verify.hpp"

namespace hexplain::hier {

using mus::IndexSet;
using bench::Instance;

// A per-input classifier shared by all n inputs, composed with a task.
struct PipelineModel {
  nn::MlpModel neural;
  tasks::TaskSpec task;

  // Throws kDimensionMismatch unless the network emits one logit per label.
  void Validate() const;
};

struct Prediction {
  tasks::Decision decision;
  tasks::SymbolicInput labels;
};

// Per-input argmax labels, then the symbolic decision. Predicted labels
// that violate the task's input format raise kMalformedInput.
Prediction Predict(const PipelineModel& pipeline, const Instance& inst);

enum class MethodKind { kHXFormal, kHXShap, kPipelineShap, kNNShap };

struct Method {
  MethodKind kind = MethodKind::kHXFormal;
  double eps = 1.0;  // HXFormal only

  static Method HXFormal(double eps) { return {MethodKind::kHXFormal, eps}; }
  static Method HXShap() { return {MethodKind::kHXShap, 1.0}; }
  static Method PipelineShap() { return {MethodKind::kPipelineShap, 1.0}; }
  static Method NNShap() { return {MethodKind::kNNShap, 1.0}; }

  // "hx-formal", "hx-shap", "pipeline-shap", "nn-shap".
  std::string Tag() const;
  static MethodKind ParseTag(std::string_view tag);
  // Tag plus the radius for HXFormal, e.g. "hx-formal(eps=0.3)".
  std::string Label() const;

  friend bool operator==(const Method&, const Method&) = default;
};

struct ExplainOptions {
  verify::VerifyOptions verify;
  axp::Heuristic heuristic = axp::Heuristic::kComposite;
  shap::SelectionRule selection;
  std::size_t shap_samples = 2048;           // per input, HXShap
  std::size_t whole_shap_samples = 4096;     // PipelineShap / NNShap
  std::uint64_t seed = 0;
  int threads = 1;                           // stage-2 workers
  const nn::MlpModel* whole_model = nullptr;  // required by NNShap
};

struct Timings {
  std::chrono::nanoseconds symbolic{0};
  std::chrono::nanoseconds neural{0};
  std::chrono::nanoseconds total{0};
};

struct ExplanationReport {
  tasks::TaskSpec task;
  Method method;
  tasks::Decision decision = tasks::Decision::Boolean(false);
  tasks::SymbolicInput labels;
  IndexSet symbolic_set;                     // Y
  std::map<std::size_t, IndexSet> per_input;  // j -> X_j, keys = Y
  std::size_t union_size = 0;                // sum of |X_j|
  std::size_t pixels_per_input = 0;          // m
  std::size_t unknown_kept = 0;
  Timings timings;

  // Throws kInternal if keys, sizes or index ranges disagree.
  void Validate() const;
};

ExplanationReport ExplainHierarchical(const PipelineModel& pipeline, const Instance& inst,
                                      const Method& method, const ExplainOptions& options = {});

// Desk-scale certificate for an HXFormal report: Y is sufficient and each
// proper subset obtained by dropping one element is not; every X_j is stable
// on the `levels`-point grid and dropping any one pixel admits a grid
// counterexample. Throws kTooLarge when a grid exceeds the brute-force
// limit and kInvalidArgument for non-HXFormal reports or unknown_kept > 0.
bool VerifyMinimality(const PipelineModel& pipeline, const Instance& inst,
                      const ExplanationReport& report, int levels);

inline constexpr const char* kReportSchema = "hexplain-report/1";
// With `with_timings` false the timing fields are written as zero, making
// the document a pure function of the inputs.
std::string ReportToJson(const ExplanationReport& report, bool with_timings = true);
ExplanationReport ReportFromJson(const std::string& text);
void SaveReport(const std::string& path, const ExplanationReport& report, bool with_timings = true);
ExplanationReport LoadReport(const std::string& path);

struct Range {
  double min = 0.0, avg = 0.0, max = 0.0;
};

struct MethodStats {
  std::string method;  // Method::Label()
  std::size_t count = 0;
  Range union_size;
  Range symbolic_pct;  // |Y| / n
  Range size_pct;      // |X| / (n m)
  double avg_seconds = 0.0;
};

struct StatsTable {
  tasks::TaskSpec task;
  std::vector<MethodStats> rows;  // in order of first appearance

  std::string ToText() const;
  std::string ToCsv() const;
};

// Throws kEmptyInput for no reports, kInvalidArgument for mixed tasks.
StatsTable Summarize(const std::vector<ExplanationReport>& reports);

}  // namespace hexplain::hier
