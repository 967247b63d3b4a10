#include <algorithm>
#include <cstdio>
#include <sstream>

#include "hexplain/error.hpp"
#include "hexplain/hier.hpp"

namespace hexplain::hier {

namespace {

class RangeAccumulator {
 public:
  void Add(double x) {
    min_ = count_ == 0 ? x : std::min(min_, x);
    max_ = count_ == 0 ? x : std::max(max_, x);
    sum_ += x;
    ++count_;
  }
  Range Get() const { return {min_, count_ ? sum_ / count_ : 0.0, max_}; }

 private:
  double min_ = 0.0, max_ = 0.0, sum_ = 0.0;
  std::size_t count_ = 0;
};

std::string Fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

}  // namespace

StatsTable Summarize(const std::vector<ExplanationReport>& reports) {
  if (reports.empty()) Fail(ErrorCode::kEmptyInput, "no reports to summarize");
  StatsTable table;
  table.task = reports.front().task;

  struct Acc {
    RangeAccumulator size, ypct, xpct;
    double seconds = 0.0;
    std::size_t count = 0;
  };
  std::vector<std::string> order;
  std::vector<Acc> accs;
  for (const auto& r : reports) {
    if (r.task != table.task) Fail(ErrorCode::kInvalidArgument, "reports mix tasks");
    const std::string label = r.method.Label();
    auto it = std::find(order.begin(), order.end(), label);
    if (it == order.end()) {
      order.push_back(label);
      accs.emplace_back();
      it = order.end() - 1;
    }
    Acc& a = accs[it - order.begin()];
    const double n = r.task.n;
    a.size.Add(static_cast<double>(r.union_size));
    a.ypct.Add(100.0 * static_cast<double>(r.symbolic_set.size()) / n);
    a.xpct.Add(100.0 * static_cast<double>(r.union_size) / (n * static_cast<double>(r.pixels_per_input)));
    a.seconds += std::chrono::duration<double>(r.timings.total).count();
    ++a.count;
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    table.rows.push_back({order[i], accs[i].count, accs[i].size.Get(), accs[i].ypct.Get(),
                          accs[i].xpct.Get(), accs[i].seconds / accs[i].count});
  }
  return table;
}

std::string StatsTable::ToText() const {
  std::vector<std::vector<std::string>> cells = {{"method", "count", "size min", "size avg",
                                                  "size max", "Y% min", "Y% avg", "Y% max",
                                                  "X% min", "X% avg", "X% max", "time avg (s)"}};
  for (const auto& r : rows) {
    cells.push_back({r.method, std::to_string(r.count), Fixed(r.union_size.min, 0),
                     Fixed(r.union_size.avg, 2), Fixed(r.union_size.max, 0),
                     Fixed(r.symbolic_pct.min, 2), Fixed(r.symbolic_pct.avg, 2),
                     Fixed(r.symbolic_pct.max, 2), Fixed(r.size_pct.min, 2),
                     Fixed(r.size_pct.avg, 2), Fixed(r.size_pct.max, 2), Fixed(r.avg_seconds, 4)});
  }
  std::vector<std::size_t> width(cells[0].size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream os;
  os << "task " << task.Name() << "\n";
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == 0) {
        os << row[c] << std::string(width[c] - row[c].size(), ' ');
      } else {
        os << "  " << std::string(width[c] - row[c].size(), ' ') << row[c];
      }
    }
    os << "\n";
  }
  return os.str();
}

std::string StatsTable::ToCsv() const {
  std::ostringstream os;
  os << "task,method,count,size_min,size_avg,size_max,y_pct_min,y_pct_avg,y_pct_max,"
        "x_pct_min,x_pct_avg,x_pct_max,time_avg_s\n";
  for (const auto& r : rows) {
    os << task.Name() << ',' << r.method << ',' << r.count << ',' << Fixed(r.union_size.min, 0)
       << ',' << Fixed(r.union_size.avg, 4) << ',' << Fixed(r.union_size.max, 0) << ','
       << Fixed(r.symbolic_pct.min, 4) << ',' << Fixed(r.symbolic_pct.avg, 4) << ','
       << Fixed(r.symbolic_pct.max, 4) << ',' << Fixed(r.size_pct.min, 4) << ','
       << Fixed(r.size_pct.avg, 4) << ',' << Fixed(r.size_pct.max, 4) << ','
       << Fixed(r.avg_seconds, 6) << '\n';
  }
  return os.str();
}

}  // namespace hexplain::hier
