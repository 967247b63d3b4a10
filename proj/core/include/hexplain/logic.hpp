#pragma once

#include <cstddef>
#include <cstdlib>
#include <initializer_list>
#include <span>
#include <vector>

namespace hexplain::logic {

// A DIMACS-style literal: variable index >= 1, negative means negated.
class Literal {
 public:
  explicit Literal(int value);

  static Literal Pos(int var) { return Literal(var); }
  static Literal Neg(int var) { return Literal(-var); }

  int value() const { return value_; }
  int var() const { return std::abs(value_); }
  bool negated() const { return value_ < 0; }
  Literal operator~() const { return Literal(-value_); }

  friend bool operator==(Literal, Literal) = default;
  friend auto operator<=>(Literal, Literal) = default;

 private:
  int value_;
};

// Disjunction of distinct literals. Repeated literals are collapsed; a clause
// holding both v and -v is rejected as malformed.
class Clause {
 public:
  Clause() = default;
  Clause(std::initializer_list<int> literals);
  explicit Clause(std::vector<Literal> literals);

  std::span<const Literal> literals() const { return literals_; }
  std::size_t size() const { return literals_.size(); }
  bool empty() const { return literals_.empty(); }
  int max_var() const;

  // True when some literal evaluates to true. `assignment` is indexed by
  // variable (slot 0 unused).
  bool SatisfiedBy(const std::vector<bool>& assignment) const;

  friend bool operator==(const Clause&, const Clause&) = default;

 private:
  std::vector<Literal> literals_;
};

// Partial CNF: hard clauses H that must hold and soft clauses S.
class WcnfFormula {
 public:
  WcnfFormula() = default;
  explicit WcnfFormula(int num_vars);
  WcnfFormula(int num_vars, std::vector<Clause> hard, std::vector<Clause> soft);

  int num_vars() const { return num_vars_; }
  const std::vector<Clause>& hard() const { return hard_; }
  const std::vector<Clause>& soft() const { return soft_; }

  // Allocates a fresh variable above every existing one.
  int NewVar() { return ++num_vars_; }
  void EnsureVars(int count);

  void AddHard(Clause clause);
  void AddSoft(Clause clause);

 private:
  void CheckRange(const Clause& clause) const;

  int num_vars_ = 0;
  std::vector<Clause> hard_;
  std::vector<Clause> soft_;
};

// k-bit comparator between two binary numbers given most-significant bit
// first: lhs > rhs when strict, lhs >= rhs otherwise.
struct LexComparatorSpec {
  std::vector<int> lhs_vars;
  std::vector<int> rhs_vars;
  bool strict = true;

  std::size_t bits() const { return lhs_vars.size(); }
  void Validate() const;
};

struct ComparatorEncoding {
  std::vector<Clause> clauses;
  std::vector<int> aux_vars;
  int num_vars = 0;  // variable count after allocating auxiliaries
};

// Tseitin encoding of the lexicographic comparator. Auxiliary variables are
// numbered from num_vars + 1 upwards. The clauses are satisfiable under an
// assignment of the comparator inputs exactly when the relation holds.
ComparatorEncoding EncodeComparator(const LexComparatorSpec& spec, int num_vars);

}  // namespace hexplain::logic
