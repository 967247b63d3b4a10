// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>

#include "hexplain/attribution.hpp"
#include "hexplain/bench.hpp"
#include "hexplain/error.hpp"
#include "hexplain/hier.hpp"
#include "hexplain/logic.hpp"
#include "hexplain/mus.hpp"
#include "hexplain/neural.hpp"
#include "hexplain/random.hpp"
#include "hexplain/tasks.hpp"
#include "hexplain/verify.hpp"
#include "support.hpp"

namespace hexplain {
namespace {

using Clock = std::chrono::steady_clock;
using mus::IndexSet;
using tasks::TaskSpec;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double Seconds(Clock::time_point since) { return std::chrono::duration<double>(Clock::now() - since).count(); }

std::string Fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

bench::GlyphConfig SmallGlyphs() {
  bench::GlyphConfig g;
  g.digit_size = 4;
  return g;
}

nn::MlpModel TrainDigits(const bench::GlyphConfig& glyphs, std::uint64_t seed) {
  const auto data = bench::MakeGlyphDataset(TaskSpec::Lex(2), 2000, SubSeed(seed, "data"), glyphs);
  nn::TrainConfig cfg;
  cfg.seed = SubSeed(seed, "train");
  return nn::Train(data, cfg);
}

// --- 1 ---------------------------------------------------------------------

Outcome ComparatorExample() {
  const auto model = TrainDigits(SmallGlyphs(), 1);
  const auto start = Clock::now();

  logic::WcnfFormula f(6);
  const auto enc = logic::EncodeComparator({{1, 2, 3}, {4, 5, 6}, true}, 6);
  f.EnsureVars(enc.num_vars);
  for (const auto& c : enc.clauses) f.AddHard(c);
  for (int lit : {-1, -2, -3, 4, -5, 6}) f.AddSoft(logic::Clause{lit});
  const IndexSet mus = mus::SmallestMus(f).mus;

  const hier::PipelineModel pipeline{model, TaskSpec::Lex(6)};
  const auto inst = bench::RenderInstance(pipeline.task, {0, 0, 0, 1, 0, 1}, 11, SmallGlyphs());
  const auto report = hier::ExplainHierarchical(pipeline, inst, hier::Method::HXFormal(0.3));
  const double secs = Seconds(start);

  const bool ok = mus == IndexSet{0, 3} && report.labels == tasks::SymbolicInput{0, 0, 0, 1, 0, 1} &&
                  report.symbolic_set == IndexSet{0, 3} && secs < 1.0;
  return {ok, Fmt("smallest MUS %s, hierarchical Y %s, %.3f s", mus == IndexSet{0, 3} ? "{~a, x}" : "other",
                  report.symbolic_set == IndexSet{0, 3} ? "{0,3}" : "other", secs)};
}

// --- 2 ---------------------------------------------------------------------

Outcome MusOracle() {
  const auto start = Clock::now();
  Rng rng(2);
  std::size_t bad_deletion = 0, bad_smallest = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t m = 2 + rng.Below(11);
    const auto f = testing::RandomUnsatWcnf(rng, 4 + static_cast<int>(rng.Below(3)), m, rng.Below(4));
    const auto del = mus::DeletionMus(f).mus;
    bad_deletion += !testing::IsMus(f, del);
    // Minimum MUS size by enumeration of subsets in order of size.
    std::size_t best = m + 1;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
      const auto s = testing::SubsetFromMask(mask, m);
      if (s.size() < best && !testing::BruteForceSat(f, s)) best = s.size();
    }
    const auto small = mus::SmallestMus(f).mus;
    bad_smallest += small.size() != best || !testing::IsMus(f, small);
  }
  const double secs = Seconds(start);
  return {bad_deletion == 0 && bad_smallest == 0 && secs < 120,
          Fmt("200 formulas, deletion violations %zu, smallest violations %zu, %.1f s", bad_deletion,
              bad_smallest, secs)};
}

// --- 3 ---------------------------------------------------------------------

Outcome Certification() {
  const auto model = TrainDigits(SmallGlyphs(), 3);
  const auto start = Clock::now();
  const hier::PipelineModel pipeline{model, TaskSpec::Lex(6)};
  const auto corpus = bench::GenerateBenchmarkSet(pipeline.task, 30, 3, SmallGlyphs());
  std::size_t applicable = 0, failures = 0, skipped = 0;
  for (const auto& inst : corpus) {
    const auto report = hier::ExplainHierarchical(pipeline, inst, hier::Method::HXFormal(1.0));
    if (report.unknown_kept != 0) {
      ++skipped;
      continue;
    }
    ++applicable;
    failures += !hier::VerifyMinimality(pipeline, inst, report, 3);
  }
  const double secs = Seconds(start);
  return {applicable >= 20 && failures == 0 && secs < 600,
          Fmt("%zu certified reports (%zu with unknowns skipped), %zu failures, %.1f s", applicable, skipped,
              failures, secs)};
}

// --- 4 ---------------------------------------------------------------------

Outcome VerifierAudit() {
  const auto start = Clock::now();
  Rng rng(4);
  std::size_t violations = 0, stable = 0, cex = 0, unknown = 0;
  for (int t = 0; t < 500; ++t) {
    const int side = 3;
    const auto model = nn::MlpModel::Random(side * side, {8, 8}, 2 + static_cast<int>(rng.Below(2)), rng.NextU64());
    Image img(side, side, 1);
    for (auto& v : img.pixels) v = rng.Uniform();
    verify::RobustnessQuery q;
    q.model = &model;
    q.image = &img;
    q.target_class = nn::Predict(model, img.pixels);
    q.eps = std::vector<double>{0.05, 0.1, 0.2, 0.5, 1.0}[rng.Below(5)];
    auto order = testing::AllIndices(side * side);
    rng.Shuffle(order);
    const std::size_t free = 1 + rng.Below(8);
    q.fixed.assign(order.begin() + static_cast<std::ptrdiff_t>(free), order.end());
    std::sort(q.fixed.begin(), q.fixed.end());
    const auto v = verify::DecideStable(q);
    stable += v.stable();
    cex += v.counterexample();
    unknown += v.unknown();
    if (v.stable() && verify::BruteForceStable(q, 5).counterexample()) ++violations;
  }
  const double secs = Seconds(start);
  return {violations == 0 && secs < 300,
          Fmt("500 queries (%zu stable, %zu counterexample, %zu unknown), %zu violations, %.1f s", stable, cex,
              unknown, violations, secs)};
}

// --- 5 ---------------------------------------------------------------------

Outcome SymbolicRanges() {
  const auto lex = TaskSpec::Lex(6);
  double lex_min = 1e9, lex_sum = 0;
  for (const auto& inst : bench::GenerateBenchmarkSet(lex, 100, 5)) {
    const auto c = tasks::EvalTask(lex, inst.labels);
    const auto Y = tasks::ExplainSymbolic(lex, inst.labels, c, tasks::SymbolicMode::kSmallestMus);
    const double pct = 100.0 * static_cast<double>(Y.size()) / lex.n;
    lex_min = std::min(lex_min, pct);
    lex_sum += pct;
  }
  const auto pac = TaskSpec::Pacman();
  std::size_t grids = 0, pac_min = 1000, pac_max = 0;
  double pac_sum = 0;
  for (std::uint64_t s = 0; grids < 100; ++s) {
    const auto labels = bench::GenerateLabels(pac, SubSeed(5, s));
    const auto c = tasks::ShortestPath(pac, labels);
    if (!c.reachable()) continue;  // not part of the ">= d" corpus
    const auto Y = tasks::ExplainSymbolic(pac, labels, c, tasks::SymbolicMode::kDeletion);
    pac_min = std::min(pac_min, Y.size());
    pac_max = std::max(pac_max, Y.size());
    pac_sum += static_cast<double>(Y.size());
    ++grids;
  }
  const double lex_avg = lex_sum / 100, pac_avg = pac_sum / 100;
  const bool hard = std::abs(lex_min - 100.0 / 3) < 1e-9 && pac_min == 2 && pac_max <= 10;
  const bool lex_avg_ok = std::abs(lex_avg - 41.83) <= 10;
  const bool pac_avg_ok = std::abs(pac_avg - 4.44) <= 2;
  return {hard, Fmt("lex min %.2f%%, pacman min %zu max %zu cells; informational: lex avg %.2f%% (%s), pacman avg "
                    "%.2f cells (%s)",
                    lex_min, pac_min, pac_max, lex_avg, lex_avg_ok ? "within 10pp of 41.83" : "outside 10pp of 41.83",
                    pac_avg, pac_avg_ok ? "within 2 of 4.44" : "outside 2 of 4.44")};
}

// --- 6 ---------------------------------------------------------------------

Outcome SizeOrdering() {
  const auto start = Clock::now();
  const bench::GlyphConfig glyphs;
  const auto model = TrainDigits(glyphs, 6);
  const hier::PipelineModel pipeline{model, TaskSpec::Lex(6)};
  const auto corpus = bench::GenerateBenchmarkSet(pipeline.task, 50, 6, glyphs);
  double small = 0, full = 0;
  std::size_t unknowns = 0;
  for (const auto& inst : corpus) {
    const auto a = hier::ExplainHierarchical(pipeline, inst, hier::Method::HXFormal(0.3));
    const auto b = hier::ExplainHierarchical(pipeline, inst, hier::Method::HXFormal(1.0));
    small += static_cast<double>(a.union_size) / 50;
    full += static_cast<double>(b.union_size) / 50;
    unknowns += a.unknown_kept + b.unknown_kept;
  }
  return {small < full, Fmt("avg union eps=0.3: %.2f px, eps=1: %.2f px (of %d per instance), %zu unknown pixels kept, "
                            "%.1f s",
                            small, full, 6 * glyphs.digit_size * glyphs.digit_size, unknowns, Seconds(start))};
}

// --- 7 ---------------------------------------------------------------------

Outcome ShapAxioms() {
  const auto start = Clock::now();
  Rng rng(7);
  double worst_eff = 0, worst_diff = 0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t m = 1 + rng.Below(10);
    std::vector<double> table(std::size_t{1} << m);
    for (auto& v : table) v = rng.Uniform(-1, 1);
    const shap::ValueFunction f = [&table](std::span<const double> x) {
      std::uint64_t mask = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] > 0.5) mask |= std::uint64_t{1} << i;
      }
      return table[mask];
    };
    const std::vector<double> v(m, 1.0), b(m, 0.0);
    const auto exact = shap::ExactShapley(f, v, b);
    const auto kernel = shap::KernelShap(f, v, b, std::max<std::size_t>(std::size_t{1} << m, m + 2), rng.NextU64());
    // A small sampled budget can leave the regression rank-deficient; grow it.
    shap::Attribution sampled;
    for (std::size_t budget = m + 2 + rng.Below(20);; budget *= 2) {
      try {
        sampled = shap::KernelShap(f, v, b, budget, rng.NextU64());
        break;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateSystem) throw;
      }
    }
    for (std::size_t i = 0; i < m; ++i) worst_diff = std::max(worst_diff, std::abs(kernel.phi[i] - exact.phi[i]));
    for (const shap::Attribution* a : {&exact, &kernel, static_cast<const shap::Attribution*>(&sampled)}) worst_eff = std::max(worst_eff, a->EfficiencyResidual());
  }
  const double secs = Seconds(start);
  return {worst_eff <= 1e-6 && worst_diff <= 1e-6 && secs < 120,
          Fmt("max efficiency residual %.2e, max |kernel - exact| %.2e, %.2f s", worst_eff, worst_diff, secs)};
}

// --- 8 ---------------------------------------------------------------------

// Loss through an evaluator written independently of the library.
double ReferenceLoss(const nn::MlpModel& model, const std::vector<double>& x, int target) {
  std::vector<double> cur = x;
  for (const auto& L : model.layers()) {
    std::vector<double> next(L.out);
    for (int r = 0; r < L.out; ++r) {
      long double acc = L.bias[r];
      for (int c = 0; c < L.in; ++c) acc += static_cast<long double>(L.w(r, c)) * cur[c];
      next[r] = L.activation == nn::Activation::kRelu ? std::max(0.0, static_cast<double>(acc)) : static_cast<double>(acc);
    }
    cur = std::move(next);
  }
  const double mx = *std::max_element(cur.begin(), cur.end());
  double s = 0;
  for (double v : cur) s += std::exp(v - mx);
  return std::log(s) + mx - cur[target];
}

Outcome GradientCheck() {
  const auto start = Clock::now();
  Rng rng(8);
  const double h = 1e-5;
  double worst = 0;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); };
  for (int t = 0; t < 20; ++t) {
    const int in = 2 + static_cast<int>(rng.Below(10));
    auto model = nn::MlpModel::Random(in, {1 + static_cast<int>(rng.Below(10)), 1 + static_cast<int>(rng.Below(10))},
                                      2 + static_cast<int>(rng.Below(3)), rng.NextU64());
    std::vector<double> x(in);
    for (auto& v : x) v = rng.Uniform();
    const int target = static_cast<int>(rng.Below(model.output_dim()));
    const auto g = nn::Grad(model, x, target);
    for (std::size_t l = 0; l < model.layers().size(); ++l) {
      auto& L = model.mutable_layers()[l];
      for (auto* param : {&L.weights, &L.bias}) {
        const auto& grad = param == &L.weights ? g.layers[l].weights : g.layers[l].bias;
        for (std::size_t k = 0; k < param->size(); ++k) {
          const double p0 = (*param)[k];
          (*param)[k] = p0 + h;
          const double up = ReferenceLoss(model, x, target);
          (*param)[k] = p0 - h;
          const double down = ReferenceLoss(model, x, target);
          (*param)[k] = p0;
          worst = std::max(worst, rel(grad[k], (up - down) / (2 * h)));
        }
      }
    }
    for (int i = 0; i < in; ++i) {
      auto xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      worst = std::max(worst, rel(g.input[i], (ReferenceLoss(model, xp, target) - ReferenceLoss(model, xm, target)) / (2 * h)));
    }
  }
  const double secs = Seconds(start);
  return {worst < 1e-4 && secs < 60, Fmt("20 nets, max relative error %.2e, %.2f s", worst, secs)};
}

// --- 9 ---------------------------------------------------------------------

Outcome IbpSoundness() {
  Rng rng(9);
  std::size_t violations = 0, samples = 0;
  for (int t = 0; t < 100; ++t) {
    const int in = 2 + static_cast<int>(rng.Below(15));
    const auto model = nn::MlpModel::Random(in, {10, 8}, 3, rng.NextU64());
    verify::Box box;
    for (int i = 0; i < in; ++i) {
      const double a = rng.Uniform(), b = rng.Uniform();
      box.lower.push_back(std::min(a, b));
      box.upper.push_back(std::max(a, b));
    }
    const auto bounds = verify::IbpBounds(model, box);
    for (int s = 0; s < 100; ++s) {
      std::vector<double> x(in);
      for (int i = 0; i < in; ++i) x[i] = rng.Uniform(box.lower[i], box.upper[i]);
      const auto z = nn::Forward(model, x);
      for (std::size_t k = 0; k < z.size(); ++k) violations += z[k] < bounds.lower[k] || z[k] > bounds.upper[k];
      ++samples;
    }
  }
  return {violations == 0 && samples == 10000, Fmt("%zu samples, %zu violations", samples, violations)};
}

// --- 10 --------------------------------------------------------------------

Outcome PacmanMonotonicity() {
  const auto task = TaskSpec::Pacman();
  Rng rng(10);
  std::size_t violations = 0;
  constexpr int kInf = 1 << 30;
  auto length = [](const tasks::Decision& d) { return d.reachable() ? *d.length() : kInf; };
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto grid = bench::GenerateLabels(task, SubSeed(10, s));
    std::vector<std::size_t> ghosts;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid[i] == tasks::kGhost) ghosts.push_back(i);
    }
    // A random strict subset of the ghosts stays.
    auto reduced = grid;
    const std::size_t drop = 1 + rng.Below(ghosts.size());
    rng.Shuffle(ghosts);
    for (std::size_t k = 0; k < drop; ++k) reduced[ghosts[k]] = tasks::kEmpty;
    violations += length(tasks::ShortestPath(task, reduced)) > length(tasks::ShortestPath(task, grid));
  }
  return {violations == 0, Fmt("1000 pairs, %zu violations", violations)};
}

}  // namespace
}  // namespace hexplain

int main() {
  using namespace hexplain;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"comparator example reproduction", ComparatorExample},
      {"MUS oracle equivalence", MusOracle},
      {"minimality certification", Certification},
      {"verifier soundness audit", VerifierAudit},
      {"symbolic explanation ranges", SymbolicRanges},
      {"explanation size ordering", SizeOrdering},
      {"SHAP axioms", ShapAxioms},
      {"gradient check", GradientCheck},
      {"IBP soundness", IbpSoundness},
      {"Pacman monotonicity", PacmanMonotonicity},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
