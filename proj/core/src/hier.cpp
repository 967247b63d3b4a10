#include "hexplain/hier.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <numeric>
#include <sstream>
#include <thread>

#include "hexplain/error.hpp"
#include "hexplain/random.hpp"

namespace hexplain::hier {

namespace {

using Clock = std::chrono::steady_clock;

// Runs job(i) for i in [0, count) on up to `threads` workers. Results are
// written by index, so the outcome does not depend on scheduling; the first
// failure by index is rethrown.
void ParallelFor(std::size_t count, int threads, const std::function<void(std::size_t)>& job) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min<std::size_t>(count, std::max(threads, 1));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

Image Masked(const Image& image, std::span<const double> mask) {
  Image out = image;
  for (std::size_t p = 0; p < mask.size(); ++p) {
    for (int c = 0; c < image.channels; ++c) out.pixels[p * image.channels + c] *= mask[p];
  }
  return out;
}

// Kernel SHAP over masks; a rank-deficient sample is retried with twice as
// many coalitions a few times before giving up.
shap::Attribution ShapWithRetry(const shap::ValueFunction& f, std::size_t m, std::size_t nsamples,
                                std::uint64_t seed) {
  const std::vector<double> ones(m, 1.0), zeros(m, 0.0);
  nsamples = std::max(nsamples, m + 2);
  for (int attempt = 0;; ++attempt) {
    try {
      return shap::KernelShap(f, ones, zeros, nsamples, SubSeed(seed, static_cast<std::uint64_t>(attempt)));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateSystem || attempt == 3) throw;
      nsamples *= 2;
    }
  }
}

IndexSet Without(const IndexSet& set, std::size_t drop) {
  IndexSet out;
  for (auto x : set) {
    if (x != drop) out.push_back(x);
  }
  return out;
}

}  // namespace

void PipelineModel::Validate() const {
  task.Validate();
  if (neural.output_dim() != task.num_labels()) {
    Fail(ErrorCode::kDimensionMismatch, "network has " + std::to_string(neural.output_dim()) +
                                            " outputs but task " + task.Name() + " has " +
                                            std::to_string(task.num_labels()) + " labels");
  }
}

Prediction Predict(const PipelineModel& pipeline, const Instance& inst) {
  pipeline.Validate();
  if (inst.task != pipeline.task) Fail(ErrorCode::kDimensionMismatch, "instance task differs from pipeline task");
  if (inst.images.size() != static_cast<std::size_t>(inst.task.n)) {
    Fail(ErrorCode::kDimensionMismatch, "instance needs one image per input");
  }
  Prediction out{tasks::Decision::Boolean(false), {}};
  for (const auto& img : inst.images) {
    if (static_cast<int>(img.size()) != pipeline.neural.input_dim()) {
      Fail(ErrorCode::kDimensionMismatch, "image size does not match the network input");
    }
    out.labels.push_back(nn::Predict(pipeline.neural, img.pixels));
  }
  tasks::ValidateInput(pipeline.task, out.labels);
  out.decision = tasks::EvalTask(pipeline.task, out.labels);
  return out;
}

std::string Method::Tag() const {
  switch (kind) {
    case MethodKind::kHXFormal:
      return "hx-formal";
    case MethodKind::kHXShap:
      return "hx-shap";
    case MethodKind::kPipelineShap:
      return "pipeline-shap";
    case MethodKind::kNNShap:
      return "nn-shap";
  }
  return "?";
}

MethodKind Method::ParseTag(std::string_view tag) {
  if (tag == "hx-formal") return MethodKind::kHXFormal;
  if (tag == "hx-shap") return MethodKind::kHXShap;
  if (tag == "pipeline-shap") return MethodKind::kPipelineShap;
  if (tag == "nn-shap") return MethodKind::kNNShap;
  Fail(ErrorCode::kInvalidArgument, "unknown method '" + std::string(tag) + "'");
}

std::string Method::Label() const {
  if (kind != MethodKind::kHXFormal) return Tag();
  std::ostringstream os;
  os << Tag() << "(eps=" << eps << ")";
  return os.str();
}

void ExplanationReport::Validate() const {
  std::size_t total = 0;
  if (per_input.size() != symbolic_set.size()) Fail(ErrorCode::kInternal, "per-input keys differ from Y");
  for (auto j : symbolic_set) {
    auto it = per_input.find(j);
    if (it == per_input.end()) Fail(ErrorCode::kInternal, "per-input keys differ from Y");
    for (auto p : it->second) {
      if (p >= pixels_per_input) Fail(ErrorCode::kInternal, "pixel index out of range");
    }
    total += it->second.size();
  }
  if (total != union_size) Fail(ErrorCode::kInternal, "union size disagrees with per-input sets");
  if (labels.size() != static_cast<std::size_t>(task.n)) Fail(ErrorCode::kInternal, "label count differs from n");
}

ExplanationReport ExplainHierarchical(const PipelineModel& pipeline, const Instance& inst,
                                      const Method& method, const ExplainOptions& options) {
  const auto start = Clock::now();
  const Prediction pred = Predict(pipeline, inst);
  const auto& task = pipeline.task;

  ExplanationReport report;
  report.task = task;
  report.method = method;
  report.decision = pred.decision;
  report.labels = pred.labels;
  report.pixels_per_input = inst.images.front().num_features();
  const std::size_t m = report.pixels_per_input;

  if (method.kind == MethodKind::kHXFormal || method.kind == MethodKind::kHXShap) {
    const auto mode = task.kind == tasks::TaskKind::kLex ? tasks::SymbolicMode::kSmallestMus
                                                         : tasks::SymbolicMode::kDeletion;
    report.symbolic_set = tasks::ExplainSymbolic(task, pred.labels, pred.decision, mode);
    const auto stage1 = Clock::now();
    report.timings.symbolic = stage1 - start;

    const auto& Y = report.symbolic_set;
    std::vector<IndexSet> sets(Y.size());
    std::vector<std::size_t> unknown(Y.size(), 0);
    ParallelFor(Y.size(), options.threads, [&](std::size_t k) {
      const std::size_t j = Y[k];
      const Image& img = inst.images[j];
      const int target = pred.labels[j];
      if (method.kind == MethodKind::kHXFormal) {
        const auto order = axp::OrderFeatures(img, options.heuristic);
        auto res = axp::ExtractAxp(pipeline.neural, img, target, method.eps, order, options.verify);
        sets[k] = std::move(res.features);
        unknown[k] = res.unknown_kept;
      } else {
        const shap::ValueFunction f = [&](std::span<const double> mask) {
          return nn::Softmax(nn::Forward(pipeline.neural, Masked(img, mask)))[target];
        };
        const auto attr = ShapWithRetry(f, m, options.shap_samples, SubSeed(options.seed, j));
        sets[k] = shap::SelectExplanation(attr, options.selection);
      }
    });
    for (std::size_t k = 0; k < Y.size(); ++k) {
      report.union_size += sets[k].size();
      report.unknown_kept += unknown[k];
      report.per_input[Y[k]] = std::move(sets[k]);
    }
    report.timings.neural = Clock::now() - stage1;
  } else {
    const std::size_t n = inst.images.size();
    shap::ValueFunction f;
    if (method.kind == MethodKind::kPipelineShap) {
      f = [&](std::span<const double> mask) {
        tasks::SymbolicInput labels(n);
        for (std::size_t j = 0; j < n; ++j) {
          labels[j] = nn::Predict(pipeline.neural, Masked(inst.images[j], mask.subspan(j * m, m)).pixels);
        }
        try {
          tasks::ValidateInput(task, labels);
        } catch (const Error&) {
          return 0.0;
        }
        return tasks::EvalTask(task, labels) == pred.decision ? 1.0 : 0.0;
      };
    } else {
      if (options.whole_model == nullptr) {
        Fail(ErrorCode::kInvalidArgument, "nn-shap needs a whole-instance model");
      }
      const nn::MlpModel& whole = *options.whole_model;
      const Image flat = bench::FlattenInstance(inst.images);
      if (static_cast<std::size_t>(whole.input_dim()) != flat.size()) {
        Fail(ErrorCode::kDimensionMismatch, "whole-instance model input does not match the instance");
      }
      const int cls = nn::Predict(whole, flat.pixels);
      f = [&whole, flat, cls](std::span<const double> mask) {
        return nn::Softmax(nn::Forward(whole, Masked(flat, mask)))[cls];
      };
    }
    const auto attr = ShapWithRetry(f, n * m, options.whole_shap_samples, SubSeed(options.seed, "whole"));
    const IndexSet chosen = shap::SelectExplanation(attr, options.selection);
    report.symbolic_set.resize(n);
    std::iota(report.symbolic_set.begin(), report.symbolic_set.end(), std::size_t{0});
    for (std::size_t j = 0; j < n; ++j) report.per_input[j];
    for (auto k : chosen) report.per_input[k / m].push_back(k % m);
    report.union_size = chosen.size();
    report.timings.neural = Clock::now() - start;
  }
  report.timings.total = Clock::now() - start;
  report.Validate();
  return report;
}

bool VerifyMinimality(const PipelineModel& pipeline, const Instance& inst,
                      const ExplanationReport& report, int levels) {
  if (report.method.kind != MethodKind::kHXFormal) {
    Fail(ErrorCode::kInvalidArgument, "only hx-formal reports can be certified");
  }
  if (report.unknown_kept != 0) {
    Fail(ErrorCode::kInvalidArgument, "report kept pixels on Unknown verdicts");
  }
  report.Validate();
  const Prediction pred = Predict(pipeline, inst);
  if (pred.labels != report.labels || !(pred.decision == report.decision)) return false;

  const auto& task = pipeline.task;
  const auto& Y = report.symbolic_set;
  if (!tasks::Sufficient(task, pred.labels, Y, pred.decision)) return false;
  for (auto y : Y) {
    if (tasks::Sufficient(task, pred.labels, Without(Y, y), pred.decision)) return false;
  }

  for (const auto& [j, X] : report.per_input) {
    verify::RobustnessQuery q;
    q.model = &pipeline.neural;
    q.image = &inst.images[j];
    q.eps = report.method.eps;
    q.target_class = pred.labels[j];
    q.fixed = X;
    if (!verify::BruteForceStable(q, levels).stable()) return false;
    for (auto p : X) {
      q.fixed = Without(X, p);
      if (verify::BruteForceStable(q, levels).stable()) return false;
    }
  }
  return true;
}

}  // namespace hexplain::hier
