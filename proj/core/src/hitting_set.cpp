#include <algorithm>
#include <map>

#include "hexplain/error.hpp"
#include "hexplain/mus.hpp"

namespace hexplain::mus {

namespace {

class HittingSetSearch {
 public:
  explicit HittingSetSearch(const std::vector<IndexSet>& sets) {
    std::map<std::size_t, int> position;
    for (const auto& s : sets) {
      for (std::size_t e : s) position.emplace(e, 0);
    }
    for (auto& [e, pos] : position) {
      pos = static_cast<int>(universe_.size());
      universe_.push_back(e);
    }
    members_.resize(universe_.size());
    for (std::size_t si = 0; si < sets.size(); ++si) {
      std::vector<int> elems;
      for (std::size_t e : sets[si]) elems.push_back(position.at(e));
      std::sort(elems.begin(), elems.end());
      elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
      for (int p : elems) members_[p].push_back(static_cast<int>(si));
      sets_.push_back(std::move(elems));
    }
    hits_.assign(sets_.size(), 0);
  }

  IndexSet Solve() {
    if (sets_.empty()) return {};
    const std::size_t upper = GreedySize();
    for (std::size_t k = PackingBound(0); k <= upper; ++k) {
      chosen_.clear();
      if (Search(0, k)) {
        IndexSet out;
        for (int p : chosen_) out.push_back(universe_[p]);
        return out;
      }
    }
    Fail(ErrorCode::kInternal, "hitting-set search exceeded its greedy bound");
  }

 private:
  std::size_t GreedySize() const {
    std::vector<char> hit(sets_.size(), 0);
    std::size_t remaining = sets_.size();
    std::size_t size = 0;
    while (remaining > 0) {
      int best = -1;
      std::size_t best_gain = 0;
      for (std::size_t p = 0; p < universe_.size(); ++p) {
        std::size_t gain = 0;
        for (int s : members_[p]) gain += hit[s] ? 0 : 1;
        if (gain > best_gain) {
          best_gain = gain;
          best = static_cast<int>(p);
        }
      }
      for (int s : members_[best]) {
        if (!hit[s]) {
          hit[s] = 1;
          --remaining;
        }
      }
      ++size;
    }
    return size;
  }

  // Lower bound: number of pairwise-disjoint unhit sets restricted to
  // elements at positions >= start (greedy packing, shortest first).
  std::size_t PackingBound(int start) const {
    std::vector<const std::vector<int>*> open;
    for (std::size_t s = 0; s < sets_.size(); ++s) {
      if (hits_[s] == 0) open.push_back(&sets_[s]);
    }
    std::stable_sort(open.begin(), open.end(),
                     [](auto* a, auto* b) { return a->size() < b->size(); });
    std::vector<char> used(universe_.size(), 0);
    std::size_t count = 0;
    for (const auto* s : open) {
      bool disjoint = true;
      for (int p : *s) {
        if (p >= start && used[p]) {
          disjoint = false;
          break;
        }
      }
      if (!disjoint) continue;
      for (int p : *s) {
        if (p >= start) used[p] = 1;
      }
      ++count;
    }
    return count;
  }

  bool AllHit() const {
    return std::all_of(hits_.begin(), hits_.end(), [](int h) { return h > 0; });
  }

  // Enumerates size-`budget` extensions in lexicographic order.
  bool Search(int start, std::size_t budget) {
    if (AllHit()) return true;
    if (budget == 0) return false;
    for (std::size_t s = 0; s < sets_.size(); ++s) {
      if (hits_[s] == 0 && sets_[s].back() < start) return false;
    }
    if (PackingBound(start) > budget) return false;
    for (int p = start; p < static_cast<int>(universe_.size()); ++p) {
      bool useful = false;
      for (int s : members_[p]) useful |= hits_[s] == 0;
      if (!useful) continue;
      for (int s : members_[p]) ++hits_[s];
      chosen_.push_back(p);
      if (Search(p + 1, budget - 1)) return true;
      chosen_.pop_back();
      for (int s : members_[p]) --hits_[s];
    }
    return false;
  }

  std::vector<std::size_t> universe_;
  std::vector<std::vector<int>> members_;  // element position -> sets
  std::vector<std::vector<int>> sets_;     // set -> element positions
  std::vector<int> hits_;
  std::vector<int> chosen_;
};

}  // namespace

IndexSet MinHittingSet(const std::vector<IndexSet>& sets) {
  for (const auto& s : sets) {
    if (s.empty()) Fail(ErrorCode::kEmptySetMember, "cannot hit an empty set");
  }
  return HittingSetSearch(sets).Solve();
}

}  // namespace hexplain::mus
