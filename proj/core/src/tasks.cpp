#include "hexplain/tasks.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <deque>
#include <map>
#include <set>

#include "hexplain/error.hpp"
#include "hexplain/sat_solver.hpp"

namespace hexplain::tasks {

namespace {

int ParseInt(std::string_view text, std::string_view what) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    Fail(ErrorCode::kInvalidArgument, "bad " + std::string(what) + " in task name");
  }
  return value;
}

bool ContainsPair(std::span<const int> bits, int digit) {
  for (std::size_t i = 1; i < bits.size(); ++i) {
    if (bits[i - 1] == digit && bits[i] == digit) return true;
  }
  return false;
}

bool LexGreater(std::span<const int> bits) {
  const std::size_t half = bits.size() / 2;
  for (std::size_t i = 0; i < half; ++i) {
    if (bits[i] != bits[half + i]) return bits[i] > bits[half + i];
  }
  return false;
}

int Find(std::span<const int> grid, int cell) {
  return static_cast<int>(std::find(grid.begin(), grid.end(), cell) - grid.begin());
}

// "length >= c" with unreachable above every finite length.
bool AtLeast(const Decision& d, const Decision& c) {
  if (!c.reachable()) return !d.reachable();
  return !d.reachable() || *d.length() >= *c.length();
}

// Deterministic automaton tracking first symbol, last symbol and whether 00
// and 11 have been seen; shared by both patterns.
struct RegexState {
  int first = -1;
  int last = -1;
  bool seen00 = false;
  bool seen11 = false;

  RegexState Step(int bit) const {
    RegexState s = *this;
    if (first < 0) s.first = bit;
    if (last == bit) (bit == 0 ? s.seen00 : s.seen11) = true;
    s.last = bit;
    return s;
  }
  int Encode() const {
    return (first + 1) + 3 * ((last + 1) + 3 * ((seen00 ? 1 : 0) + 2 * (seen11 ? 1 : 0)));
  }
  bool Accepts(RegexId id) const {
    if (id == RegexId::kR1) return first == 1 && seen11 && last == 0;
    return (first == 0 && seen11) || (last == 1 && seen00);
  }
};

bool RegexSufficientByAutomaton(RegexId id, std::span<const int> labels,
                                const std::vector<char>& is_fixed, bool c) {
  std::map<int, RegexState> frontier{{RegexState{}.Encode(), RegexState{}}};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::map<int, RegexState> next;
    for (const auto& [key, s] : frontier) {
      for (int bit = 0; bit <= 1; ++bit) {
        if (is_fixed[i] && bit != labels[i]) continue;
        const RegexState t = s.Step(bit);
        next.emplace(t.Encode(), t);
      }
    }
    frontier = std::move(next);
  }
  return std::all_of(frontier.begin(), frontier.end(),
                     [&](const auto& kv) { return kv.second.Accepts(id) == c; });
}

bool LexSufficientBySat(const TaskSpec& task, std::span<const int> labels,
                        const IndexSet& fixed, const Decision& c) {
  const auto formula = LexExplanationFormula(task, labels, c);
  std::vector<logic::Literal> assumptions;
  for (std::size_t i : fixed) {
    assumptions.push_back(formula.soft()[i].literals().front());
  }
  return !logic::Solve(formula, assumptions).sat();
}

constexpr int kEnumerationLimit = 12;

}  // namespace

TaskSpec TaskSpec::Lex(int n) {
  TaskSpec t;
  t.kind = TaskKind::kLex;
  t.n = n;
  t.Validate();
  return t;
}

TaskSpec TaskSpec::Regex(RegexId id, int n) {
  TaskSpec t;
  t.kind = TaskKind::kRegex;
  t.regex = id;
  t.n = n;
  t.Validate();
  return t;
}

TaskSpec TaskSpec::Pacman(int width, int height) {
  TaskSpec t;
  t.kind = TaskKind::kPacman;
  t.width = width;
  t.height = height;
  t.n = width * height;
  t.Validate();
  return t;
}

void TaskSpec::Validate() const {
  switch (kind) {
    case TaskKind::kLex:
      if (n < 2 || n % 2 != 0) Fail(ErrorCode::kInvalidArgument, "Lex needs an even n >= 2");
      break;
    case TaskKind::kRegex:
      if (n < 1) Fail(ErrorCode::kInvalidArgument, "Regex needs n >= 1");
      break;
    case TaskKind::kPacman:
      if (width < 1 || height < 1 || n != width * height || n < 2) {
        Fail(ErrorCode::kInvalidArgument, "Pacman needs n = width * height >= 2");
      }
      break;
  }
}

TaskSpec TaskSpec::Parse(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  std::string_view s = lower;
  if (s.starts_with("lex1-")) return Lex(ParseInt(s.substr(5), "n"));
  if (s.starts_with("regexp-")) {
    s.remove_prefix(7);
    const auto dash = s.find('-');
    if (dash == std::string_view::npos) Fail(ErrorCode::kInvalidArgument, "expected regexp-<a>-<n>");
    const int a = ParseInt(s.substr(0, dash), "pattern id");
    if (a != 1 && a != 2) Fail(ErrorCode::kInvalidArgument, "regex pattern must be 1 or 2");
    return Regex(a == 1 ? RegexId::kR1 : RegexId::kR2, ParseInt(s.substr(dash + 1), "n"));
  }
  if (s == "pacman-sp") return Pacman(5, 5);
  if (s.starts_with("pacman-")) {
    s.remove_prefix(7);
    const auto x = s.find('x');
    if (x == std::string_view::npos) Fail(ErrorCode::kInvalidArgument, "expected pacman-<w>x<h>");
    return Pacman(ParseInt(s.substr(0, x), "width"), ParseInt(s.substr(x + 1), "height"));
  }
  Fail(ErrorCode::kInvalidArgument, "unknown task '" + std::string(name) + "'");
}

std::string TaskSpec::Name() const {
  switch (kind) {
    case TaskKind::kLex:
      return "lex1-" + std::to_string(n);
    case TaskKind::kRegex:
      return std::string("regexp-") + (regex == RegexId::kR1 ? "1-" : "2-") + std::to_string(n);
    case TaskKind::kPacman:
      if (width == 5 && height == 5) return "pacman-sp";
      return "pacman-" + std::to_string(width) + "x" + std::to_string(height);
  }
  return {};
}

std::string Decision::ToString() const {
  if (kind_ == Kind::kBool) return value_ ? "true" : "false";
  return length_ ? std::to_string(*length_) : "unreachable";
}

Decision Decision::FromString(std::string_view text) {
  if (text == "true") return Boolean(true);
  if (text == "false") return Boolean(false);
  if (text == "unreachable") return Unreachable();
  return Path(ParseInt(text, "path length"));
}

void ValidateInput(const TaskSpec& task, std::span<const int> labels) {
  if (static_cast<int>(labels.size()) != task.n) {
    Fail(ErrorCode::kMalformedInput, "expected " + std::to_string(task.n) + " labels, got " +
                                         std::to_string(labels.size()));
  }
  const int alphabet = task.num_labels();
  for (int y : labels) {
    if (y < 0 || y >= alphabet) Fail(ErrorCode::kMalformedInput, "label out of range");
  }
  if (task.kind == TaskKind::kPacman) {
    const auto actors = std::count(labels.begin(), labels.end(), kActor);
    const auto flags = std::count(labels.begin(), labels.end(), kFlag);
    if (actors != 1 || flags != 1) {
      Fail(ErrorCode::kMalformedInput, "grid needs exactly one actor and one flag (found " +
                                           std::to_string(actors) + " and " +
                                           std::to_string(flags) + ")");
    }
  }
}

bool RegexAccepts(RegexId id, std::span<const int> bits) {
  if (bits.empty()) return false;
  if (id == RegexId::kR1) {
    return bits.front() == 1 && ContainsPair(bits, 1) && bits.back() == 0;
  }
  return (bits.front() == 0 && ContainsPair(bits, 1)) ||
         (bits.back() == 1 && ContainsPair(bits, 0));
}

Decision ShortestPath(const TaskSpec& task, std::span<const int> grid) {
  if (task.kind != TaskKind::kPacman) Fail(ErrorCode::kInvalidArgument, "not a grid task");
  ValidateInput(task, grid);
  const int source = Find(grid, kActor);
  const int target = Find(grid, kFlag);
  std::vector<int> dist(grid.size(), -1);
  std::deque<int> queue{source};
  dist[source] = 0;
  constexpr std::array<std::array<int, 2>, 4> kSteps{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};
  while (!queue.empty()) {
    const int cell = queue.front();
    queue.pop_front();
    if (cell == target) return Decision::Path(dist[cell]);
    const int r = cell / task.width;
    const int col = cell % task.width;
    for (const auto& [dr, dc] : kSteps) {
      const int nr = r + dr, nc = col + dc;
      if (nr < 0 || nr >= task.height || nc < 0 || nc >= task.width) continue;
      const int next = nr * task.width + nc;
      if (dist[next] >= 0 || grid[next] == kGhost) continue;
      dist[next] = dist[cell] + 1;
      queue.push_back(next);
    }
  }
  return Decision::Unreachable();
}

Decision EvalTask(const TaskSpec& task, std::span<const int> labels) {
  ValidateInput(task, labels);
  switch (task.kind) {
    case TaskKind::kLex:
      return Decision::Boolean(LexGreater(labels));
    case TaskKind::kRegex:
      return Decision::Boolean(RegexAccepts(task.regex, labels));
    case TaskKind::kPacman:
      return ShortestPath(task, labels);
  }
  Fail(ErrorCode::kInternal, "unknown task kind");
}

logic::WcnfFormula LexExplanationFormula(const TaskSpec& task, std::span<const int> labels,
                                         const Decision& c) {
  if (task.kind != TaskKind::kLex) Fail(ErrorCode::kUnsupportedMode, "comparator formula is Lex-only");
  ValidateInput(task, labels);
  if (c.kind() != Decision::Kind::kBool) Fail(ErrorCode::kInconsistentDecision, "Lex decisions are Boolean");
  const int half = task.n / 2;
  logic::LexComparatorSpec spec;
  for (int i = 0; i < half; ++i) {
    spec.lhs_vars.push_back(i + 1);
    spec.rhs_vars.push_back(half + i + 1);
  }
  // Hard part asserts the opposite verdict: not(lhs > rhs) is rhs >= lhs.
  if (c.value()) {
    std::swap(spec.lhs_vars, spec.rhs_vars);
    spec.strict = false;
  } else {
    spec.strict = true;
  }
  auto enc = logic::EncodeComparator(spec, task.n);
  logic::WcnfFormula formula(enc.num_vars);
  for (auto& clause : enc.clauses) formula.AddHard(std::move(clause));
  for (int i = 0; i < task.n; ++i) {
    formula.AddSoft(logic::Clause{labels[i] != 0 ? i + 1 : -(i + 1)});
  }
  return formula;
}

bool Sufficient(const TaskSpec& task, std::span<const int> labels, const IndexSet& fixed,
                const Decision& c) {
  ValidateInput(task, labels);
  std::vector<char> is_fixed(labels.size(), 0);
  for (std::size_t i : fixed) {
    if (i >= labels.size()) Fail(ErrorCode::kMalformedInput, "explanation index out of range");
    is_fixed[i] = 1;
  }

  if (task.kind == TaskKind::kPacman) {
    if (c.kind() != Decision::Kind::kPath) Fail(ErrorCode::kInconsistentDecision, "grid decisions are path lengths");
    if (!is_fixed[Find(labels, kActor)] || !is_fixed[Find(labels, kFlag)]) return false;
    std::vector<int> relaxed(labels.begin(), labels.end());
    for (std::size_t i = 0; i < relaxed.size(); ++i) {
      if (!is_fixed[i] && relaxed[i] == kGhost) relaxed[i] = kEmpty;
    }
    return AtLeast(ShortestPath(task, relaxed), c);
  }

  if (c.kind() != Decision::Kind::kBool) Fail(ErrorCode::kInconsistentDecision, "expected a Boolean decision");
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!is_fixed[i]) free.push_back(i);
  }
  if (task.n <= kEnumerationLimit) {
    std::vector<int> probe(labels.begin(), labels.end());
    for (std::uint32_t mask = 0; mask < (1u << free.size()); ++mask) {
      for (std::size_t k = 0; k < free.size(); ++k) probe[free[k]] = (mask >> k) & 1;
      if (EvalTask(task, probe) != c) return false;
    }
    return true;
  }
  if (task.kind == TaskKind::kLex) return LexSufficientBySat(task, labels, fixed, c);
  return RegexSufficientByAutomaton(task.regex, labels, is_fixed, c.value());
}

IndexSet ExplainSymbolic(const TaskSpec& task, std::span<const int> labels, const Decision& c,
                         SymbolicMode mode, std::span<const std::size_t> order) {
  if (EvalTask(task, labels) != c) {
    Fail(ErrorCode::kInconsistentDecision,
         "decision " + c.ToString() + " does not match the symbolic input");
  }
  IndexSet y;
  if (mode == SymbolicMode::kSmallestMus) {
    if (task.kind != TaskKind::kLex) {
      Fail(ErrorCode::kUnsupportedMode, "smallest-MUS explanations are implemented for Lex only");
    }
    y = mus::SmallestMus(LexExplanationFormula(task, labels, c)).mus;
  } else {
    std::vector<std::size_t> sequence(order.begin(), order.end());
    if (sequence.empty()) {
      for (std::size_t i = 0; i < labels.size(); ++i) sequence.push_back(i);
    }
    std::set<std::size_t> current;
    if (task.kind == TaskKind::kPacman) {
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != kEmpty) current.insert(i);
      }
    } else {
      for (std::size_t i = 0; i < labels.size(); ++i) current.insert(i);
    }
    for (std::size_t i : sequence) {
      if (i >= labels.size()) Fail(ErrorCode::kInvalidArgument, "order index out of range");
      if (task.kind == TaskKind::kPacman && labels[i] != kGhost) continue;
      if (current.count(i) == 0) continue;
      IndexSet trial;
      for (std::size_t j : current) {
        if (j != i) trial.push_back(j);
      }
      if (Sufficient(task, labels, trial, c)) current.erase(i);
    }
    y.assign(current.begin(), current.end());
  }

  if (!Sufficient(task, labels, y, c)) {
    Fail(ErrorCode::kInternal, "symbolic explanation is not sufficient");
  }
  return y;
}

}  // namespace hexplain::tasks
