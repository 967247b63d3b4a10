#include <benchmark/benchmark.h>

#include "hexplain/attribution.hpp"
#include "hexplain/mus.hpp"
#include "hexplain/neural.hpp"
#include "hexplain/random.hpp"
#include "hexplain/sat_solver.hpp"
#include "hexplain/verify.hpp"
#include "support.hpp"

namespace hexplain {
namespace {

// Random 3-SAT near the phase transition (ratio 4.26).
void BM_SolveRandom3Sat(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(1);
  std::vector<logic::Clause> clauses;
  for (int i = 0; i < n * 426 / 100; ++i) clauses.push_back(testing::RandomClause(rng, n, 3));
  for (auto _ : state) {
    logic::Solver s(n);
    s.AddClauses(clauses);
    benchmark::DoNotOptimize(s.Solve());
  }
}
BENCHMARK(BM_SolveRandom3Sat)->Arg(50)->Arg(100)->Arg(150);

void BM_SmallestMus(benchmark::State& state) {
  Rng rng(2);
  const auto f = testing::RandomUnsatWcnf(rng, 8, static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(mus::SmallestMus(f));
}
BENCHMARK(BM_SmallestMus)->Arg(8)->Arg(12)->Arg(16);

void BM_DecideStable(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto model = nn::MlpModel::Random(side * side, {16, 16}, 3, 3);
  Rng rng(3);
  Image img(side, side, 1);
  for (auto& v : img.pixels) v = rng.Uniform();
  verify::RobustnessQuery q;
  q.model = &model;
  q.image = &img;
  q.target_class = nn::Predict(model, img.pixels);
  q.eps = 0.1;
  for (std::size_t p = side; p < img.size(); ++p) q.fixed.push_back(p);  // first row free
  for (auto _ : state) benchmark::DoNotOptimize(verify::DecideStable(q));
}
BENCHMARK(BM_DecideStable)->Arg(4)->Arg(8);

void BM_KernelShap(benchmark::State& state) {
  const std::size_t m = static_cast<std::size_t>(state.range(0));
  const auto model = nn::MlpModel::Random(static_cast<int>(m), {16}, 2, 4);
  const shap::ValueFunction f = [&model](std::span<const double> x) { return nn::Forward(model, x)[0]; };
  const std::vector<double> v(m, 1.0), b(m, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(shap::KernelShap(f, v, b, 4 * m + 64, 5));
}
BENCHMARK(BM_KernelShap)->Arg(16)->Arg(64);

}  // namespace
}  // namespace hexplain
BENCHMARK_MAIN();
