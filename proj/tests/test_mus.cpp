#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "hexplain/error.hpp"
#include "hexplain/logic.hpp"
#include "hexplain/mus.hpp"
#include "support.hpp"

namespace hexplain {
namespace {

using logic::Clause;
using logic::WcnfFormula;
using mus::IndexSet;
using testing::AllIndices;
using testing::BruteForceSat;
using testing::IsMus;
using testing::SubsetFromMask;

// H = abc > xyz over variables a..z = 1..6, S fixes the observed digits.
WcnfFormula ComparatorExample() {
  WcnfFormula f(6);
  const auto enc = logic::EncodeComparator({{1, 2, 3}, {4, 5, 6}, true}, 6);
  f.EnsureVars(enc.num_vars);
  for (const auto& c : enc.clauses) f.AddHard(c);
  for (int lit : {-1, -2, -3, 4, -5, 6}) f.AddSoft(Clause{lit});
  return f;
}

// Every MUS by subset enumeration (|S| small).
std::vector<IndexSet> AllMuses(const WcnfFormula& f) {
  std::vector<IndexSet> out;
  const std::size_t m = f.soft().size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    const auto s = SubsetFromMask(mask, m);
    if (IsMus(f, s)) out.push_back(s);
  }
  return out;
}

// Every MCS by subset enumeration: removing it leaves a satisfiable set and
// removing any proper subset of it does not.
std::vector<IndexSet> AllMcses(const WcnfFormula& f) {
  std::vector<IndexSet> out;
  const std::size_t m = f.soft().size();
  const std::uint64_t full = (std::uint64_t{1} << m) - 1;
  for (std::uint64_t mask = 0; mask <= full; ++mask) {
    if (!BruteForceSat(f, SubsetFromMask(full & ~mask, m))) continue;
    bool minimal = true;
    for (std::size_t i = 0; i < m && minimal; ++i) {
      if ((mask >> i) & 1) {
        const std::uint64_t smaller = mask & ~(std::uint64_t{1} << i);
        minimal = !BruteForceSat(f, SubsetFromMask(full & ~smaller, m));
      }
    }
    if (minimal) out.push_back(SubsetFromMask(mask, m));
  }
  return out;
}

bool Hits(const IndexSet& h, const IndexSet& s) {
  return std::any_of(s.begin(), s.end(), [&](std::size_t x) { return std::binary_search(h.begin(), h.end(), x); });
}

TEST(Mus, ComparatorExample) {
  const auto f = ComparatorExample();
  EXPECT_EQ(mus::SmallestMus(f).mus, (IndexSet{0, 3}));
  const auto d = mus::DeletionMus(f);
  EXPECT_TRUE(IsMus(f, d.mus));
  EXPECT_GT(d.oracle_calls, 0u);
}

TEST(Mus, SatisfiableInputIsRejected) {
  WcnfFormula f(2);
  f.AddSoft(Clause{1});
  f.AddSoft(Clause{2});
  try {
    mus::DeletionMus(f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSatisfiableInput);
  }
  EXPECT_THROW(mus::SmallestMus(f), Error);
}

TEST(Mus, UnsatHardPartGivesEmptyMus) {
  WcnfFormula f(1);
  f.AddHard(Clause{1});
  f.AddHard(Clause{-1});
  f.AddSoft(Clause{1});
  EXPECT_TRUE(mus::DeletionMus(f).mus.empty());
  EXPECT_TRUE(mus::SmallestMus(f).mus.empty());
}

TEST(Mus, DuplicateSoftClausesReportLowestIndex) {
  WcnfFormula f(1);
  f.AddSoft(Clause{1});
  f.AddSoft(Clause{-1});
  f.AddSoft(Clause{1});
  EXPECT_EQ(mus::DeletionMus(f).mus, (IndexSet{0, 1}));
  EXPECT_EQ(mus::SmallestMus(f).mus, (IndexSet{0, 1}));
}

TEST(Mus, AnyDeletionOrderGivesMus) {
  Rng rng(12);
  for (int t = 0; t < 50; ++t) {
    const auto f = testing::RandomUnsatWcnf(rng, 5, 10, 2);
    std::vector<std::size_t> order = AllIndices(10);
    const auto forward = mus::DeletionMus(f, order).mus;
    std::reverse(order.begin(), order.end());
    const auto backward = mus::DeletionMus(f, order).mus;
    EXPECT_TRUE(IsMus(f, forward));
    EXPECT_TRUE(IsMus(f, backward));
  }
  WcnfFormula f(1);
  f.AddSoft(Clause{1});
  f.AddSoft(Clause{-1});
  const std::vector<std::size_t> bad{0, 0};
  EXPECT_THROW(mus::DeletionMus(f, bad), Error);
  const std::vector<std::size_t> short_order{0};
  EXPECT_THROW(mus::DeletionMus(f, short_order), Error);
}

TEST(Mus, RandomFormulasAgainstEnumeration) {
  Rng rng(31337);
  for (int t = 0; t < 60; ++t) {
    const std::size_t m = 3 + rng.Below(8);
    const auto f = testing::RandomUnsatWcnf(rng, 5, m, rng.Below(4));
    const auto d = mus::DeletionMus(f);
    const auto s = mus::SmallestMus(f);
    ASSERT_TRUE(IsMus(f, d.mus)) << t;
    ASSERT_TRUE(IsMus(f, s.mus)) << t;
    const auto all = AllMuses(f);
    std::size_t best = m + 1;
    for (const auto& u : all) best = std::min(best, u.size());
    EXPECT_EQ(s.mus.size(), best);
    EXPECT_LE(s.mus.size(), d.mus.size());
    // Lexicographically smallest among the minimum-size MUSes.
    for (const auto& u : all) {
      if (u.size() == best) EXPECT_LE(s.mus, u);
    }
  }
}

TEST(Mcs, EnumerationMatchesBruteForceAndDuality) {
  Rng rng(4242);
  for (int t = 0; t < 40; ++t) {
    const std::size_t m = 3 + rng.Below(6);
    const auto f = testing::RandomUnsatWcnf(rng, 4, m, rng.Below(3));
    auto got = mus::EnumerateMcs(f, 10000);
    std::set<IndexSet> got_set(got.begin(), got.end());
    EXPECT_EQ(got_set.size(), got.size()) << "duplicates";
    const auto expect = AllMcses(f);
    EXPECT_EQ(got_set, std::set<IndexSet>(expect.begin(), expect.end())) << t;

    // MUSes are exactly the minimal hitting sets of the MCSes.
    const auto muses = AllMuses(f);
    for (const auto& u : muses) {
      for (const auto& c : expect) EXPECT_TRUE(Hits(u, c));
    }
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
      const auto h = SubsetFromMask(mask, m);
      bool hits_all = true;
      for (const auto& c : expect) hits_all = hits_all && Hits(h, c);
      if (!hits_all) continue;
      bool minimal = true;
      for (std::size_t k = 0; k < h.size() && minimal; ++k) {
        IndexSet smaller = h;
        smaller.erase(smaller.begin() + static_cast<std::ptrdiff_t>(k));
        bool still = true;
        for (const auto& c : expect) still = still && Hits(smaller, c);
        minimal = !still;
      }
      if (minimal) EXPECT_NE(std::find(muses.begin(), muses.end(), h), muses.end());
    }
  }
}

TEST(Mcs, LimitIsRespected) {
  WcnfFormula f(3);
  for (int lit : {1, -1, 2, -2, 3, -3}) f.AddSoft(Clause{lit});
  EXPECT_EQ(mus::EnumerateMcs(f, 100).size(), 8u);
  EXPECT_EQ(mus::EnumerateMcs(f, 3).size(), 3u);
}

TEST(HittingSet, MatchesBruteForce) {
  Rng rng(8);
  for (int t = 0; t < 200; ++t) {
    const std::size_t universe = 2 + rng.Below(8);
    std::vector<IndexSet> sets(1 + rng.Below(7));
    for (auto& s : sets) {
      for (std::size_t x = 0; x < universe; ++x) {
        if (rng.Below(3) == 0) s.push_back(x);
      }
      if (s.empty()) s.push_back(rng.Below(universe));
    }
    IndexSet best;
    bool found = false;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << universe); ++mask) {
      const auto h = SubsetFromMask(mask, universe);
      if (found && h.size() > best.size()) continue;
      bool ok = true;
      for (const auto& s : sets) ok = ok && Hits(h, s);
      if (ok && (!found || h.size() < best.size() || (h.size() == best.size() && h < best))) {
        best = h;
        found = true;
      }
    }
    EXPECT_EQ(mus::MinHittingSet(sets), best) << t;
  }
}

TEST(HittingSet, EmptyMemberRejected) {
  try {
    mus::MinHittingSet({{1, 2}, {}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptySetMember);
  }
  EXPECT_TRUE(mus::MinHittingSet({}).empty());
}

}  // namespace
}  // namespace hexplain
