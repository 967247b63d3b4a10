#include "hexplain/logic.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

#include "hexplain/error.hpp"

namespace hexplain::logic {

Literal::Literal(int value) : value_(value) {
  if (value == 0) Fail(ErrorCode::kMalformedClause, "literal 0 is not allowed");
}

Clause::Clause(std::initializer_list<int> literals) {
  std::vector<Literal> lits;
  lits.reserve(literals.size());
  for (int v : literals) lits.emplace_back(v);
  *this = Clause(std::move(lits));
}

Clause::Clause(std::vector<Literal> literals) {
  std::unordered_set<int> seen;
  for (Literal lit : literals) {
    if (seen.count(-lit.value()) != 0) {
      Fail(ErrorCode::kMalformedClause,
           "tautological clause contains " + std::to_string(lit.var()) +
               " in both polarities");
    }
    if (seen.insert(lit.value()).second) literals_.push_back(lit);
  }
}

int Clause::max_var() const {
  int m = 0;
  for (Literal lit : literals_) m = std::max(m, lit.var());
  return m;
}

bool Clause::SatisfiedBy(const std::vector<bool>& assignment) const {
  for (Literal lit : literals_) {
    if (assignment.at(lit.var()) != lit.negated()) return true;
  }
  return false;
}

WcnfFormula::WcnfFormula(int num_vars) : num_vars_(num_vars) {
  if (num_vars < 0) Fail(ErrorCode::kInvalidArgument, "negative variable count");
}

WcnfFormula::WcnfFormula(int num_vars, std::vector<Clause> hard,
                         std::vector<Clause> soft)
    : WcnfFormula(num_vars) {
  for (auto& c : hard) AddHard(std::move(c));
  for (auto& c : soft) AddSoft(std::move(c));
}

void WcnfFormula::EnsureVars(int count) { num_vars_ = std::max(num_vars_, count); }

void WcnfFormula::CheckRange(const Clause& clause) const {
  if (clause.max_var() > num_vars_) {
    Fail(ErrorCode::kMalformedClause,
         "clause references variable " + std::to_string(clause.max_var()) +
             " above num_vars " + std::to_string(num_vars_));
  }
}

void WcnfFormula::AddHard(Clause clause) {
  CheckRange(clause);
  hard_.push_back(std::move(clause));
}

void WcnfFormula::AddSoft(Clause clause) {
  CheckRange(clause);
  soft_.push_back(std::move(clause));
}

void LexComparatorSpec::Validate() const {
  if (lhs_vars.empty() || lhs_vars.size() != rhs_vars.size()) {
    Fail(ErrorCode::kInvalidArgument, "comparator needs k >= 1 bits on each side");
  }
  std::unordered_set<int> seen;
  for (const auto* side : {&lhs_vars, &rhs_vars}) {
    for (int v : *side) {
      if (v < 1) Fail(ErrorCode::kInvalidArgument, "comparator variable < 1");
      if (!seen.insert(v).second) {
        Fail(ErrorCode::kInvalidArgument,
             "comparator variable " + std::to_string(v) + " used twice");
      }
    }
  }
}

namespace {

// g <-> MAJ(a, b, c)
void EncodeMajority(std::vector<Clause>& out, int g, int a, int b, int c) {
  out.push_back(Clause{-a, -b, g});
  out.push_back(Clause{-a, -c, g});
  out.push_back(Clause{-b, -c, g});
  out.push_back(Clause{a, b, -g});
  out.push_back(Clause{a, c, -g});
  out.push_back(Clause{b, c, -g});
}

}  // namespace

ComparatorEncoding EncodeComparator(const LexComparatorSpec& spec, int num_vars) {
  spec.Validate();
  for (std::size_t i = 0; i < spec.bits(); ++i) {
    if (spec.lhs_vars[i] > num_vars || spec.rhs_vars[i] > num_vars) {
      Fail(ErrorCode::kInvalidArgument, "comparator variable above num_vars");
    }
  }

  // G_i states "suffix i.. of lhs compares (strictly) greater than rhs".
  // G_i = MAJ(l_i, -r_i, G_{i+1}); the innermost G_{k-1} folds the constant
  // G_k (false when strict, true otherwise).
  ComparatorEncoding enc;
  enc.num_vars = num_vars;
  const int k = static_cast<int>(spec.bits());
  int next = 0;  // G_{i+1}
  for (int i = k - 1; i >= 0; --i) {
    const int l = spec.lhs_vars[i];
    const int r = spec.rhs_vars[i];
    const int g = ++enc.num_vars;
    enc.aux_vars.push_back(g);
    if (i == k - 1) {
      if (spec.strict) {  // g <-> l & -r
        enc.clauses.push_back(Clause{-g, l});
        enc.clauses.push_back(Clause{-g, -r});
        enc.clauses.push_back(Clause{g, -l, r});
      } else {  // g <-> l | -r
        enc.clauses.push_back(Clause{g, -l});
        enc.clauses.push_back(Clause{g, r});
        enc.clauses.push_back(Clause{-g, l, -r});
      }
    } else {
      EncodeMajority(enc.clauses, g, l, -r, next);
    }
    next = g;
  }
  enc.clauses.push_back(Clause{next});
  std::reverse(enc.aux_vars.begin(), enc.aux_vars.end());
  return enc;
}

}  // namespace hexplain::logic
