#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hexplain/logic.hpp"

namespace hexplain::logic {

struct SatResult {
  enum class Status { kSat, kUnsat };

  Status status = Status::kUnsat;
  // Total assignment indexed by variable (slot 0 unused); only for kSat.
  std::vector<bool> model;
  // Subset of the assumptions that is already unsatisfiable with the
  // clauses; only for kUnsat. Not necessarily minimal.
  std::vector<Literal> core;

  bool sat() const { return status == Status::kSat; }
};

// Incremental CDCL solver: two watched literals, first-UIP clause learning,
// VSIDS branching with phase saving, Luby restarts, and solving under
// assumption literals. Clauses may be added between Solve() calls.
class Solver {
 public:
  explicit Solver(int num_vars = 0);

  int num_vars() const { return num_vars_; }
  int NewVar();
  void EnsureVars(int count);

  void AddClause(const Clause& clause);
  void AddClauses(std::span<const Clause> clauses) {
    for (const Clause& c : clauses) AddClause(c);
  }

  SatResult Solve(std::span<const Literal> assumptions = {});

  std::uint64_t conflicts() const { return conflicts_; }
  std::uint64_t solve_calls() const { return solve_calls_; }

 private:
  using Lit = int;  // 2 * (var - 1) + sign
  static constexpr int kNoReason = -1;
  static constexpr std::int8_t kTrue = 1, kFalse = 0, kUndef = 2;

  struct Watcher {
    int cref;
    Lit blocker;
  };

  static Lit Encode(Literal lit) { return 2 * (lit.var() - 1) + (lit.negated() ? 1 : 0); }
  static Literal Decode(Lit lit) {
    const int var = (lit >> 1) + 1;
    return Literal((lit & 1) ? -var : var);
  }
  static int VarOf(Lit lit) { return lit >> 1; }

  std::int8_t Value(Lit lit) const {
    const std::int8_t v = assigns_[VarOf(lit)];
    return v == kUndef ? kUndef : static_cast<std::int8_t>(v ^ (lit & 1));
  }
  int DecisionLevel() const { return static_cast<int>(trail_lim_.size()); }

  void Enqueue(Lit lit, int reason);
  int Propagate();  // returns conflicting clause or kNoReason
  void Analyze(int confl, std::vector<Lit>& learnt, int& backtrack_level);
  std::vector<Literal> AnalyzeFinal(Lit falsified_assumption);
  void CancelUntil(int level);
  void Attach(int cref);
  Lit PickBranch();

  void BumpVar(int var);
  void DecayActivities() { var_inc_ *= 1.0 / 0.95; }
  void HeapInsert(int var);
  void HeapUp(int pos);
  void HeapDown(int pos);
  int HeapPop();

  int num_vars_ = 0;
  bool ok_ = true;
  std::vector<std::vector<Lit>> clauses_;
  std::vector<std::vector<Watcher>> watches_;  // by literal
  std::vector<std::int8_t> assigns_;
  std::vector<int> level_;
  std::vector<int> reason_;
  std::vector<char> polarity_;  // saved phase: 1 = negative
  std::vector<char> seen_;
  std::vector<Lit> trail_;
  std::vector<int> trail_lim_;
  std::size_t qhead_ = 0;

  std::vector<double> activity_;
  double var_inc_ = 1.0;
  std::vector<int> heap_;
  std::vector<int> heap_pos_;  // -1 when absent

  std::uint64_t conflicts_ = 0;
  std::uint64_t solve_calls_ = 0;
};

// One-shot convenience: solves the hard part of `formula` under assumptions.
SatResult Solve(const WcnfFormula& formula, std::span<const Literal> assumptions = {});

}  // namespace hexplain::logic
