#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hexplain/logic.hpp"
#include "hexplain/mus.hpp"

namespace hexplain::tasks {

using mus::IndexSet;

enum class TaskKind { kLex, kRegex, kPacman };
enum class RegexId { kR1, kR2 };

// Pacman cell classes, in the order the neural component emits them.
enum Cell : int { kEmpty = 0, kGhost = 1, kActor = 2, kFlag = 3 };

// One of the three benchmark families. `n` is the number of neural inputs.
struct TaskSpec {
  TaskKind kind = TaskKind::kLex;
  int n = 0;
  RegexId regex = RegexId::kR1;
  int width = 0;  // Pacman grid only
  int height = 0;

  static TaskSpec Lex(int n);
  static TaskSpec Regex(RegexId id, int n);
  static TaskSpec Pacman(int width = 5, int height = 5);

  // Accepts "lex1-<n>", "regexp-<1|2>-<n>", "pacman-sp" (5x5) and
  // "pacman-<w>x<h>".
  static TaskSpec Parse(std::string_view name);
  std::string Name() const;

  // Size of the neural label alphabet: 2 for digits, 4 for grid cells.
  int num_labels() const { return kind == TaskKind::kPacman ? 4 : 2; }
  void Validate() const;

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

using SymbolicInput = std::vector<int>;

// Boolean verdict (Lex, Regex) or shortest-path length (Pacman). A missing
// length means the flag is unreachable, ordered above every finite length.
class Decision {
 public:
  enum class Kind { kBool, kPath };

  static Decision Boolean(bool value) { return Decision(Kind::kBool, value, std::nullopt); }
  static Decision Path(int length) { return Decision(Kind::kPath, false, length); }
  static Decision Unreachable() { return Decision(Kind::kPath, false, std::nullopt); }

  Kind kind() const { return kind_; }
  bool value() const { return value_; }
  const std::optional<int>& length() const { return length_; }
  bool reachable() const { return length_.has_value(); }

  // "true"/"false", a decimal length, or "unreachable".
  std::string ToString() const;
  static Decision FromString(std::string_view text);

  friend bool operator==(const Decision&, const Decision&) = default;

 private:
  Decision(Kind kind, bool value, std::optional<int> length)
      : kind_(kind), value_(value), length_(length) {}

  Kind kind_;
  bool value_;
  std::optional<int> length_;
};

// Throws kMalformedInput if labels do not fit the task (length, alphabet,
// and for Pacman exactly one actor and one flag).
void ValidateInput(const TaskSpec& task, std::span<const int> labels);

Decision EvalTask(const TaskSpec& task, std::span<const int> labels);

// 4-neighbour BFS from the actor to the flag avoiding ghost cells.
Decision ShortestPath(const TaskSpec& task, std::span<const int> grid);

// Membership by the verbal definitions:
//   R1: starts with 1, contains 11, ends with 0.
//   R2: (starts with 0 and contains 11) or (ends with 1 and contains 00).
bool RegexAccepts(RegexId id, std::span<const int> bits);

// Does fixing the inputs in `fixed` to their values in `labels` force
// decision `c`? Lex/Regex: over all {0,1} completions of the free inputs.
// Pacman: free ghosts may only disappear, actor and flag stay put, and a set
// that omits the actor or flag cell is never sufficient; the decision must
// remain "path length >= c".
bool Sufficient(const TaskSpec& task, std::span<const int> labels,
                const IndexSet& fixed, const Decision& c);

enum class SymbolicMode { kDeletion, kSmallestMus };

// Subset-minimal symbolic explanation Y of decision `c`. Deletion follows
// `order` (defaults: input order for Lex/Regex, ghosts in raster order for
// Pacman). SmallestMus is available for Lex only.
IndexSet ExplainSymbolic(const TaskSpec& task, std::span<const int> labels,
                         const Decision& c, SymbolicMode mode,
                         std::span<const std::size_t> order = {});

// The Lex explanation formula: hard clauses state the negation of `c` as a
// comparator over variables 1..n, soft clause i is the unit literal fixing
// input i to its observed digit.
logic::WcnfFormula LexExplanationFormula(const TaskSpec& task, std::span<const int> labels,
                                         const Decision& c);

}  // namespace hexplain::tasks
