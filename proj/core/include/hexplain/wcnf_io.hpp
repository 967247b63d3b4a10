#pragma once

#include <iosfwd>
#include <string>

#include "hexplain/logic.hpp"

namespace hexplain::logic {

// DIMACS WCNF, classic header form:
//
//   c <comment>
//   p wcnf <num_vars> <num_clauses> <top>
//   <weight> <lit> ... <lit> 0
//
// Clauses whose weight equals `top` are hard; any smaller positive weight
// makes a soft clause (weights are not otherwise interpreted). The writer
// emits soft clauses with weight 1 and top = |S| + 1. The reader also
// accepts the newer headerless form where hard clauses start with "h".
void WriteWcnf(std::ostream& out, const WcnfFormula& formula);
WcnfFormula ReadWcnf(std::istream& in);

std::string ToWcnfString(const WcnfFormula& formula);
WcnfFormula FromWcnfString(const std::string& text);

}  // namespace hexplain::logic
