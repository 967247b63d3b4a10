#pragma once

#include <chrono>
#include <cstddef>
#include <span>
#include <vector>

#include "hexplain/logic.hpp"

namespace hexplain::mus {

// Sorted, duplicate-free set of soft-clause (or element) indices.
using IndexSet = std::vector<std::size_t>;

struct MusResult {
  IndexSet mus;
  std::size_t oracle_calls = 0;
  std::chrono::nanoseconds elapsed{0};
};

// Soft clauses are treated as a set: duplicates (same literals in any order)
// collapse onto the lowest original index, which is the one reported.

// Subset-minimal MUS of the soft clauses relative to the hard ones, by linear
// deletion with core refinement. `order` (a permutation of soft indices)
// fixes the deletion order; empty means natural order.
// Throws kSatisfiableInput when H and S are jointly satisfiable.
MusResult DeletionMus(const logic::WcnfFormula& formula,
                      std::span<const std::size_t> order = {});

// Up to `limit` distinct minimal correction sets. Each MCS lists every
// original soft index it removes (duplicates included).
std::vector<IndexSet> EnumerateMcs(const logic::WcnfFormula& formula, std::size_t limit);

// Cardinality-minimal MUS by implicit hitting-set dualization; among MUSes
// of minimum size the lexicographically smallest is returned.
MusResult SmallestMus(const logic::WcnfFormula& formula);

// Minimum-cardinality hitting set, lexicographically smallest among ties.
// Branch and bound bounded above by the greedy cover.
// Throws kEmptySetMember when some input set is empty.
IndexSet MinHittingSet(const std::vector<IndexSet>& sets);

}  // namespace hexplain::mus
