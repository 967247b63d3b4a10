#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hexplain/logic.hpp"
#include "hexplain/mus.hpp"
#include "hexplain/random.hpp"

namespace hexplain::testing {

// Random clause over variables 1..num_vars with `width` distinct variables.
inline logic::Clause RandomClause(Rng& rng, int num_vars, int width) {
  std::vector<int> vars;
  while (static_cast<int>(vars.size()) < width) {
    const int v = 1 + static_cast<int>(rng.Below(num_vars));
    bool dup = false;
    for (int u : vars) dup = dup || u == v;
    if (!dup) vars.push_back(v);
  }
  std::vector<logic::Literal> lits;
  for (int v : vars) lits.push_back(rng.Coin() ? logic::Literal::Neg(v) : logic::Literal::Pos(v));
  return logic::Clause(std::move(lits));
}

// Assignment indexed by variable (slot 0 unused) from the bits of `mask`.
inline std::vector<bool> AssignmentFromMask(std::uint64_t mask, int num_vars) {
  std::vector<bool> a(num_vars + 1, false);
  for (int v = 1; v <= num_vars; ++v) a[v] = ((mask >> (v - 1)) & 1) != 0;
  return a;
}

// Truth-table satisfiability of the hard clauses plus the soft clauses in
// `soft_subset` plus the unit `assumptions`.
inline bool BruteForceSat(const logic::WcnfFormula& f, const mus::IndexSet& soft_subset,
                          const std::vector<logic::Literal>& assumptions = {}) {
  const int n = f.num_vars();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    const auto a = AssignmentFromMask(mask, n);
    bool ok = true;
    for (const auto& c : f.hard()) ok = ok && c.SatisfiedBy(a);
    for (auto i : soft_subset) ok = ok && f.soft()[i].SatisfiedBy(a);
    for (auto l : assumptions) ok = ok && a[l.var()] != l.negated();
    if (ok) return true;
  }
  return false;
}

inline mus::IndexSet AllIndices(std::size_t n) {
  mus::IndexSet out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  return out;
}

inline mus::IndexSet SubsetFromMask(std::uint64_t mask, std::size_t n) {
  mus::IndexSet out;
  for (std::size_t i = 0; i < n; ++i) {
    if ((mask >> i) & 1) out.push_back(i);
  }
  return out;
}

// Exhaustive MUS check: the set is unsatisfiable with H and dropping any
// single element makes it satisfiable (monotonicity covers smaller subsets).
inline bool IsMus(const logic::WcnfFormula& f, const mus::IndexSet& set) {
  if (BruteForceSat(f, set)) return false;
  for (std::size_t k = 0; k < set.size(); ++k) {
    mus::IndexSet rest;
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (i != k) rest.push_back(set[i]);
    }
    if (!BruteForceSat(f, rest)) return false;
  }
  return true;
}

// Random unsatisfiable WCNF with `num_soft` soft clauses; redrawn until the
// whole formula is unsatisfiable.
inline logic::WcnfFormula RandomUnsatWcnf(Rng& rng, int num_vars, std::size_t num_soft,
                                          std::size_t num_hard) {
  for (;;) {
    logic::WcnfFormula f(num_vars);
    for (std::size_t i = 0; i < num_hard; ++i) f.AddHard(RandomClause(rng, num_vars, 3));
    for (std::size_t i = 0; i < num_soft; ++i) {
      f.AddSoft(RandomClause(rng, num_vars, 1 + static_cast<int>(rng.Below(2))));
    }
    if (!BruteForceSat(f, AllIndices(num_soft))) return f;
  }
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path ScratchDir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("hexplain-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace hexplain::testing
