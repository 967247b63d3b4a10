#include "hexplain/mus.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "hexplain/error.hpp"
#include "hexplain/sat_solver.hpp"

namespace hexplain::mus {

namespace {

using logic::Clause;
using logic::Literal;
using logic::WcnfFormula;

// Incremental satisfiability oracle over the distinct soft clauses. Each
// distinct clause u gets a selector s_u and the hard clause (-s_u | C_u);
// enabling u means assuming s_u.
class SoftOracle {
 public:
  explicit SoftOracle(const WcnfFormula& formula) : solver_(formula.num_vars()) {
    solver_.AddClauses(formula.hard());
    std::map<std::vector<int>, std::size_t> index_of;
    for (std::size_t i = 0; i < formula.soft().size(); ++i) {
      const Clause& c = formula.soft()[i];
      std::vector<int> key;
      for (Literal l : c.literals()) key.push_back(l.value());
      std::sort(key.begin(), key.end());
      auto [it, inserted] = index_of.emplace(std::move(key), clauses_.size());
      if (inserted) {
        clauses_.push_back(&c);
        members_.emplace_back();
      }
      members_[it->second].push_back(i);
      unique_of_.push_back(it->second);
    }
    for (const Clause* c : clauses_) {
      const int s = solver_.NewVar();
      selectors_.push_back(s);
      std::vector<Literal> lits{Literal::Neg(s)};
      lits.insert(lits.end(), c->literals().begin(), c->literals().end());
      solver_.AddClause(Clause(std::move(lits)));
    }
  }

  std::size_t size() const { return clauses_.size(); }
  std::size_t calls() const { return calls_; }
  std::size_t unique_of(std::size_t original) const { return unique_of_.at(original); }
  std::size_t representative(std::size_t u) const { return members_[u].front(); }
  const std::vector<std::size_t>& members(std::size_t u) const { return members_[u]; }

  // Satisfiability of H plus the enabled distinct softs. On kUnsat, `core`
  // receives the enabled softs named by the solver's assumption core.
  logic::SatResult Check(const std::vector<std::size_t>& enabled,
                         std::vector<std::size_t>* core = nullptr) {
    ++calls_;
    std::vector<Literal> assumptions;
    assumptions.reserve(enabled.size());
    for (std::size_t u : enabled) assumptions.push_back(Literal::Pos(selectors_[u]));
    auto result = solver_.Solve(assumptions);
    if (!result.sat() && core != nullptr) {
      core->clear();
      std::map<int, std::size_t> by_selector;
      for (std::size_t u : enabled) by_selector.emplace(selectors_[u], u);
      for (Literal l : result.core) core->push_back(by_selector.at(l.var()));
      std::sort(core->begin(), core->end());
    }
    return result;
  }

  std::vector<std::size_t> SatisfiedBy(const std::vector<bool>& model) const {
    std::vector<std::size_t> out;
    for (std::size_t u = 0; u < clauses_.size(); ++u) {
      if (clauses_[u]->SatisfiedBy(model)) out.push_back(u);
    }
    return out;
  }

  // Extends the softs satisfied by `model` to a maximal satisfiable subset,
  // trying the remaining softs in index order.
  std::vector<std::size_t> GrowMss(const std::vector<bool>& model) {
    std::vector<char> in(clauses_.size(), 0);
    for (std::size_t u : SatisfiedBy(model)) in[u] = 1;
    for (std::size_t u = 0; u < clauses_.size(); ++u) {
      if (in[u]) continue;
      std::vector<std::size_t> trial;
      for (std::size_t v = 0; v < clauses_.size(); ++v) {
        if (in[v] || v == u) trial.push_back(v);
      }
      auto r = Check(trial);
      if (r.sat()) {
        for (std::size_t v : SatisfiedBy(r.model)) in[v] = 1;
      }
    }
    std::vector<std::size_t> mss;
    for (std::size_t u = 0; u < clauses_.size(); ++u) {
      if (in[u]) mss.push_back(u);
    }
    return mss;
  }

  void Block(const std::vector<std::size_t>& mcs) {
    std::vector<Literal> lits;
    for (std::size_t u : mcs) lits.push_back(Literal::Pos(selectors_[u]));
    solver_.AddClause(Clause(std::move(lits)));
  }

  std::vector<std::size_t> All() const {
    std::vector<std::size_t> all(clauses_.size());
    for (std::size_t u = 0; u < all.size(); ++u) all[u] = u;
    return all;
  }

 private:
  logic::Solver solver_;
  std::vector<const Clause*> clauses_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<std::size_t> unique_of_;
  std::vector<int> selectors_;
  std::size_t calls_ = 0;
};

std::vector<std::size_t> Complement(const std::vector<std::size_t>& set, std::size_t n) {
  std::vector<char> in(n, 0);
  for (std::size_t u : set) in[u] = 1;
  std::vector<std::size_t> out;
  for (std::size_t u = 0; u < n; ++u) {
    if (!in[u]) out.push_back(u);
  }
  return out;
}

IndexSet Representatives(const SoftOracle& oracle, const std::vector<std::size_t>& unique) {
  IndexSet out;
  for (std::size_t u : unique) out.push_back(oracle.representative(u));
  std::sort(out.begin(), out.end());
  return out;
}

[[noreturn]] void FailSatisfiable() {
  Fail(ErrorCode::kSatisfiableInput, "hard and soft clauses are jointly satisfiable");
}

}  // namespace

MusResult DeletionMus(const WcnfFormula& formula, std::span<const std::size_t> order) {
  const auto start = std::chrono::steady_clock::now();
  SoftOracle oracle(formula);
  const std::size_t n = oracle.size();

  std::vector<std::size_t> unique_order;
  if (order.empty()) {
    unique_order = oracle.All();
  } else {
    if (order.size() != formula.soft().size()) {
      Fail(ErrorCode::kInvalidArgument, "deletion order must permute all soft clauses");
    }
    std::vector<char> placed(n, 0), seen(formula.soft().size(), 0);
    for (std::size_t i : order) {
      if (i >= seen.size() || seen[i]) {
        Fail(ErrorCode::kInvalidArgument, "deletion order is not a permutation");
      }
      seen[i] = 1;
      const std::size_t u = oracle.unique_of(i);
      if (!placed[u]) {
        placed[u] = 1;
        unique_order.push_back(u);
      }
    }
  }

  std::vector<std::size_t> core;
  if (oracle.Check(oracle.All(), &core).sat()) FailSatisfiable();
  std::vector<char> keep(n, 0);
  for (std::size_t u : core) keep[u] = 1;

  for (std::size_t u : unique_order) {
    if (!keep[u]) continue;
    std::vector<std::size_t> trial;
    for (std::size_t v = 0; v < n; ++v) {
      if (keep[v] && v != u) trial.push_back(v);
    }
    if (!oracle.Check(trial, &core).sat()) {
      std::fill(keep.begin(), keep.end(), 0);
      for (std::size_t v : core) keep[v] = 1;
    }
  }

  std::vector<std::size_t> mus;
  for (std::size_t u = 0; u < n; ++u) {
    if (keep[u]) mus.push_back(u);
  }
  MusResult result;
  result.mus = Representatives(oracle, mus);
  result.oracle_calls = oracle.calls();
  result.elapsed = std::chrono::steady_clock::now() - start;
  return result;
}

std::vector<IndexSet> EnumerateMcs(const WcnfFormula& formula, std::size_t limit) {
  if (limit == 0) Fail(ErrorCode::kInvalidArgument, "MCS limit must be >= 1");
  SoftOracle oracle(formula);
  if (oracle.Check(oracle.All()).sat()) FailSatisfiable();

  std::vector<IndexSet> out;
  while (out.size() < limit) {
    auto seed = oracle.Check({});
    if (!seed.sat()) break;
    const auto mcs = Complement(oracle.GrowMss(seed.model), oracle.size());
    oracle.Block(mcs);
    IndexSet originals;
    for (std::size_t u : mcs) {
      const auto& m = oracle.members(u);
      originals.insert(originals.end(), m.begin(), m.end());
    }
    std::sort(originals.begin(), originals.end());
    out.push_back(std::move(originals));
  }
  return out;
}

MusResult SmallestMus(const WcnfFormula& formula) {
  const auto start = std::chrono::steady_clock::now();
  SoftOracle oracle(formula);
  if (oracle.Check(oracle.All()).sat()) FailSatisfiable();

  std::vector<IndexSet> mcses;
  while (true) {
    const IndexSet hs = MinHittingSet(mcses);
    auto r = oracle.Check(hs);
    if (!r.sat()) {
      MusResult result;
      result.mus = Representatives(oracle, hs);
      result.oracle_calls = oracle.calls();
      result.elapsed = std::chrono::steady_clock::now() - start;
      return result;
    }
    auto mcs = Complement(oracle.GrowMss(r.model), oracle.size());
    if (mcs.empty()) Fail(ErrorCode::kInternal, "grew an MSS covering all softs");
    mcses.push_back(std::move(mcs));
  }
}

}  // namespace hexplain::mus
