#include "hexplain/sat_solver.hpp"

#include <algorithm>
#include <string>

#include "hexplain/error.hpp"

namespace hexplain::logic {

namespace {

// Luby sequence value for restart i (0-based), base 2.
double Luby(double y, int x) {
  int size = 1;
  int seq = 0;
  while (size < x + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    --seq;
    x = x % size;
  }
  double r = 1;
  for (int i = 0; i < seq; ++i) r *= y;
  return r;
}

constexpr int kRestartBase = 100;

}  // namespace

Solver::Solver(int num_vars) { EnsureVars(num_vars); }

int Solver::NewVar() {
  EnsureVars(num_vars_ + 1);
  return num_vars_;
}

void Solver::EnsureVars(int count) {
  while (num_vars_ < count) {
    const int v = num_vars_++;
    watches_.emplace_back();
    watches_.emplace_back();
    assigns_.push_back(kUndef);
    level_.push_back(0);
    reason_.push_back(kNoReason);
    polarity_.push_back(1);
    seen_.push_back(0);
    activity_.push_back(0.0);
    heap_pos_.push_back(-1);
    HeapInsert(v);
  }
}

void Solver::AddClause(const Clause& clause) {
  if (clause.max_var() > num_vars_) EnsureVars(clause.max_var());
  if (!ok_) return;
  // Called only at decision level 0 (Solve always backtracks fully).
  std::vector<Lit> lits;
  for (Literal l : clause.literals()) {
    const Lit x = Encode(l);
    const auto v = Value(x);
    if (v == kTrue) return;
    if (v == kFalse) continue;
    lits.push_back(x);
  }
  if (lits.empty()) {
    ok_ = false;
    return;
  }
  if (lits.size() == 1) {
    Enqueue(lits[0], kNoReason);
    if (Propagate() != kNoReason) ok_ = false;
    return;
  }
  clauses_.push_back(std::move(lits));
  Attach(static_cast<int>(clauses_.size()) - 1);
}

void Solver::Attach(int cref) {
  const auto& c = clauses_[cref];
  watches_[c[0]].push_back({cref, c[1]});
  watches_[c[1]].push_back({cref, c[0]});
}

void Solver::Enqueue(Lit lit, int reason) {
  const int v = VarOf(lit);
  assigns_[v] = static_cast<std::int8_t>((lit & 1) ? kFalse : kTrue);
  level_[v] = DecisionLevel();
  reason_[v] = reason;
  trail_.push_back(lit);
}

int Solver::Propagate() {
  int confl = kNoReason;
  while (qhead_ < trail_.size()) {
    const Lit p = trail_[qhead_++];
    const Lit false_lit = p ^ 1;
    auto& ws = watches_[false_lit];
    std::size_t i = 0, j = 0;
    while (i < ws.size()) {
      const Watcher w = ws[i++];
      if (Value(w.blocker) == kTrue) {
        ws[j++] = w;
        continue;
      }
      auto& c = clauses_[w.cref];
      if (c[0] == false_lit) std::swap(c[0], c[1]);
      const Lit first = c[0];
      if (first != w.blocker && Value(first) == kTrue) {
        ws[j++] = {w.cref, first};
        continue;
      }
      bool moved = false;
      for (std::size_t k = 2; k < c.size(); ++k) {
        if (Value(c[k]) != kFalse) {
          std::swap(c[1], c[k]);
          watches_[c[1]].push_back({w.cref, first});
          moved = true;
          break;
        }
      }
      if (moved) continue;
      ws[j++] = {w.cref, first};
      if (Value(first) == kFalse) {
        confl = w.cref;
        qhead_ = trail_.size();
        while (i < ws.size()) ws[j++] = ws[i++];
      } else {
        Enqueue(first, w.cref);
      }
    }
    ws.resize(j);
    if (confl != kNoReason) break;
  }
  return confl;
}

void Solver::Analyze(int confl, std::vector<Lit>& learnt, int& backtrack_level) {
  learnt.clear();
  learnt.push_back(-1);  // slot for the asserting literal
  int path_count = 0;
  Lit p = -1;
  int index = static_cast<int>(trail_.size()) - 1;

  do {
    const auto& c = clauses_[confl];
    for (std::size_t j = (p == -1 ? 0 : 1); j < c.size(); ++j) {
      const Lit q = c[j];
      const int v = VarOf(q);
      if (!seen_[v] && level_[v] > 0) {
        BumpVar(v);
        seen_[v] = 1;
        if (level_[v] >= DecisionLevel()) {
          ++path_count;
        } else {
          learnt.push_back(q);
        }
      }
    }
    while (!seen_[VarOf(trail_[index--])]) {
    }
    p = trail_[index + 1];
    confl = reason_[VarOf(p)];
    seen_[VarOf(p)] = 0;
    --path_count;
  } while (path_count > 0);
  learnt[0] = p ^ 1;

  backtrack_level = 0;
  if (learnt.size() > 1) {
    std::size_t max_i = 1;
    for (std::size_t i = 2; i < learnt.size(); ++i) {
      if (level_[VarOf(learnt[i])] > level_[VarOf(learnt[max_i])]) max_i = i;
    }
    std::swap(learnt[1], learnt[max_i]);
    backtrack_level = level_[VarOf(learnt[1])];
  }
  for (std::size_t i = 1; i < learnt.size(); ++i) seen_[VarOf(learnt[i])] = 0;
}

std::vector<Literal> Solver::AnalyzeFinal(Lit falsified_assumption) {
  std::vector<Literal> core{Decode(falsified_assumption)};
  const int av = VarOf(falsified_assumption);
  if (level_[av] == 0) return core;
  seen_[av] = 1;
  for (int i = static_cast<int>(trail_.size()) - 1; i >= trail_lim_[0]; --i) {
    const int x = VarOf(trail_[i]);
    if (!seen_[x]) continue;
    if (reason_[x] == kNoReason) {
      // Decisions below the assumption count are assumption literals.
      if (trail_[i] != falsified_assumption) core.push_back(Decode(trail_[i]));
    } else {
      const auto& c = clauses_[reason_[x]];
      for (std::size_t j = 1; j < c.size(); ++j) {
        if (level_[VarOf(c[j])] > 0) seen_[VarOf(c[j])] = 1;
      }
    }
    seen_[x] = 0;
  }
  seen_[av] = 0;
  return core;
}

void Solver::CancelUntil(int level) {
  if (DecisionLevel() <= level) return;
  for (int i = static_cast<int>(trail_.size()) - 1; i >= trail_lim_[level]; --i) {
    const int v = VarOf(trail_[i]);
    assigns_[v] = kUndef;
    reason_[v] = kNoReason;
    polarity_[v] = static_cast<char>(trail_[i] & 1);
    if (heap_pos_[v] < 0) HeapInsert(v);
  }
  trail_.resize(trail_lim_[level]);
  trail_lim_.resize(level);
  qhead_ = trail_.size();
}

Solver::Lit Solver::PickBranch() {
  while (!heap_.empty()) {
    const int v = HeapPop();
    if (assigns_[v] == kUndef) return 2 * v + polarity_[v];
  }
  return -1;
}

void Solver::BumpVar(int var) {
  if ((activity_[var] += var_inc_) > 1e100) {
    for (double& a : activity_) a *= 1e-100;
    var_inc_ *= 1e-100;
  }
  if (heap_pos_[var] >= 0) HeapUp(heap_pos_[var]);
}

void Solver::HeapInsert(int var) {
  heap_pos_[var] = static_cast<int>(heap_.size());
  heap_.push_back(var);
  HeapUp(heap_pos_[var]);
}

namespace {
// Higher activity first; lower variable index on ties.
inline bool Before(const std::vector<double>& act, int a, int b) {
  return act[a] > act[b] || (act[a] == act[b] && a < b);
}
}  // namespace

void Solver::HeapUp(int pos) {
  const int v = heap_[pos];
  while (pos > 0) {
    const int parent = (pos - 1) / 2;
    if (!Before(activity_, v, heap_[parent])) break;
    heap_[pos] = heap_[parent];
    heap_pos_[heap_[pos]] = pos;
    pos = parent;
  }
  heap_[pos] = v;
  heap_pos_[v] = pos;
}

void Solver::HeapDown(int pos) {
  const int v = heap_[pos];
  const int n = static_cast<int>(heap_.size());
  while (true) {
    int child = 2 * pos + 1;
    if (child >= n) break;
    if (child + 1 < n && Before(activity_, heap_[child + 1], heap_[child])) ++child;
    if (!Before(activity_, heap_[child], v)) break;
    heap_[pos] = heap_[child];
    heap_pos_[heap_[pos]] = pos;
    pos = child;
  }
  heap_[pos] = v;
  heap_pos_[v] = pos;
}

int Solver::HeapPop() {
  const int top = heap_[0];
  heap_pos_[top] = -1;
  const int last = heap_.back();
  heap_.pop_back();
  if (!heap_.empty()) {
    heap_[0] = last;
    heap_pos_[last] = 0;
    HeapDown(0);
  }
  return top;
}

SatResult Solver::Solve(std::span<const Literal> assumptions) {
  ++solve_calls_;
  SatResult result;
  for (Literal a : assumptions) {
    if (a.var() > num_vars_) {
      Fail(ErrorCode::kInvalidArgument,
           "assumption on unknown variable " + std::to_string(a.var()));
    }
  }
  if (!ok_) return result;

  std::vector<Lit> assume;
  assume.reserve(assumptions.size());
  for (Literal a : assumptions) assume.push_back(Encode(a));

  std::vector<Lit> learnt;
  int restart = 0;
  while (true) {
    const auto budget = static_cast<std::uint64_t>(Luby(2.0, restart++) * kRestartBase);
    std::uint64_t local_conflicts = 0;
    bool restarted = false;
    while (!restarted) {
      const int confl = Propagate();
      if (confl != kNoReason) {
        ++conflicts_;
        ++local_conflicts;
        if (DecisionLevel() == 0) {
          ok_ = false;
          return result;
        }
        int bt = 0;
        Analyze(confl, learnt, bt);
        CancelUntil(bt);
        if (learnt.size() == 1) {
          Enqueue(learnt[0], kNoReason);
        } else {
          clauses_.push_back(learnt);
          const int cref = static_cast<int>(clauses_.size()) - 1;
          Attach(cref);
          Enqueue(learnt[0], cref);
        }
        DecayActivities();
        continue;
      }
      if (local_conflicts >= budget) {
        CancelUntil(0);
        restarted = true;
        continue;
      }
      Lit next = -1;
      while (DecisionLevel() < static_cast<int>(assume.size())) {
        const Lit a = assume[DecisionLevel()];
        const auto v = Value(a);
        if (v == kTrue) {
          trail_lim_.push_back(static_cast<int>(trail_.size()));
        } else if (v == kFalse) {
          result.core = AnalyzeFinal(a);
          std::sort(result.core.begin(), result.core.end());
          result.core.erase(std::unique(result.core.begin(), result.core.end()),
                            result.core.end());
          CancelUntil(0);
          return result;
        } else {
          next = a;
          break;
        }
      }
      if (next == -1) {
        next = PickBranch();
        if (next == -1) {
          result.status = SatResult::Status::kSat;
          result.model.assign(num_vars_ + 1, false);
          for (int v = 0; v < num_vars_; ++v) result.model[v + 1] = assigns_[v] == kTrue;
          CancelUntil(0);
          return result;
        }
      }
      trail_lim_.push_back(static_cast<int>(trail_.size()));
      Enqueue(next, kNoReason);
    }
  }
}

SatResult Solve(const WcnfFormula& formula, std::span<const Literal> assumptions) {
  Solver solver(formula.num_vars());
  solver.AddClauses(formula.hard());
  return solver.Solve(assumptions);
}

}  // namespace hexplain::logic
