#include "hexplain/wcnf_io.hpp"

#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "hexplain/error.hpp"

namespace hexplain::logic {

namespace {

void WriteClause(std::ostream& out, const std::string& weight, const Clause& c) {
  out << weight;
  for (Literal l : c.literals()) out << ' ' << l.value();
  out << " 0\n";
}

}  // namespace

void WriteWcnf(std::ostream& out, const WcnfFormula& formula) {
  const std::string top = std::to_string(formula.soft().size() + 1);
  out << "p wcnf " << formula.num_vars() << ' '
      << formula.hard().size() + formula.soft().size() << ' ' << top << '\n';
  for (const Clause& c : formula.hard()) WriteClause(out, top, c);
  for (const Clause& c : formula.soft()) WriteClause(out, "1", c);
}

WcnfFormula ReadWcnf(std::istream& in) {
  std::string line;
  bool have_header = false;
  long long top = std::numeric_limits<long long>::max();
  int declared_vars = 0;
  std::vector<Clause> hard, soft;
  int max_var = 0;
  int line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first) || first[0] == 'c') continue;
    if (first == "p") {
      std::string kind;
      long long nclauses = 0;
      if (!(ls >> kind >> declared_vars >> nclauses) || kind != "wcnf") {
        Fail(ErrorCode::kParseError, "bad header on line " + std::to_string(line_no));
      }
      if (!(ls >> top)) top = std::numeric_limits<long long>::max();
      have_header = true;
      continue;
    }
    bool is_hard = false;
    if (first == "h") {
      is_hard = true;
    } else {
      long long weight = 0;
      try {
        weight = std::stoll(first);
      } catch (const std::exception&) {
        Fail(ErrorCode::kParseError, "bad weight on line " + std::to_string(line_no));
      }
      if (weight <= 0) {
        Fail(ErrorCode::kParseError, "non-positive weight on line " + std::to_string(line_no));
      }
      is_hard = have_header && weight >= top;
    }
    std::vector<Literal> lits;
    int v = 0;
    bool terminated = false;
    while (ls >> v) {
      if (v == 0) {
        terminated = true;
        break;
      }
      lits.emplace_back(v);
      max_var = std::max(max_var, std::abs(v));
    }
    if (!terminated) {
      Fail(ErrorCode::kParseError, "clause not terminated by 0 on line " + std::to_string(line_no));
    }
    (is_hard ? hard : soft).emplace_back(std::move(lits));
  }
  return WcnfFormula(std::max(declared_vars, max_var), std::move(hard), std::move(soft));
}

std::string ToWcnfString(const WcnfFormula& formula) {
  std::ostringstream out;
  WriteWcnf(out, formula);
  return out.str();
}

WcnfFormula FromWcnfString(const std::string& text) {
  std::istringstream in(text);
  return ReadWcnf(in);
}

}  // namespace hexplain::logic
