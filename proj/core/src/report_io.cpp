#include <nlohmann/json.hpp>

#include <algorithm>

#include "hexplain/error.hpp"
#include "hexplain/fileio.hpp"
#include "hexplain/hier.hpp"

namespace hexplain::hier {

using nlohmann::json;

std::string ReportToJson(const ExplanationReport& report, bool with_timings) {
  report.Validate();
  json per_input = json::array();
  for (const auto& [j, X] : report.per_input) {
    IndexSet sorted = X;
    std::sort(sorted.begin(), sorted.end());
    per_input.push_back({{"input", j}, {"pixels", sorted}});
  }
  auto ns = [&](std::chrono::nanoseconds d) -> std::int64_t { return with_timings ? d.count() : 0; };
  json doc = {{"schema", kReportSchema},
              {"task", report.task.Name()},
              {"method", report.method.Tag()},
              {"eps", report.method.eps},
              {"decision", report.decision.ToString()},
              {"labels", report.labels},
              {"symbolic_set", report.symbolic_set},
              {"per_input", std::move(per_input)},
              {"union_size", report.union_size},
              {"pixels_per_input", report.pixels_per_input},
              {"unknown_kept", report.unknown_kept},
              {"timings_ns",
               {{"symbolic", ns(report.timings.symbolic)},
                {"neural", ns(report.timings.neural)},
                {"total", ns(report.timings.total)}}}};
  return doc.dump(1) + "\n";
}

ExplanationReport ReportFromJson(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParseError, std::string("report file: ") + e.what());
  }
  ExplanationReport r;
  try {
    if (doc.at("schema").get<std::string>() != kReportSchema) {
      Fail(ErrorCode::kParseError, std::string("report file: expected schema ") + kReportSchema);
    }
    r.task = tasks::TaskSpec::Parse(doc.at("task").get<std::string>());
    r.method.kind = Method::ParseTag(doc.at("method").get<std::string>());
    r.method.eps = doc.at("eps").get<double>();
    r.decision = tasks::Decision::FromString(doc.at("decision").get<std::string>());
    r.labels = doc.at("labels").get<std::vector<int>>();
    r.symbolic_set = doc.at("symbolic_set").get<IndexSet>();
    for (const auto& e : doc.at("per_input")) {
      r.per_input[e.at("input").get<std::size_t>()] = e.at("pixels").get<IndexSet>();
    }
    r.union_size = doc.at("union_size").get<std::size_t>();
    r.pixels_per_input = doc.at("pixels_per_input").get<std::size_t>();
    r.unknown_kept = doc.at("unknown_kept").get<std::size_t>();
    const auto& t = doc.at("timings_ns");
    r.timings.symbolic = std::chrono::nanoseconds(t.at("symbolic").get<std::int64_t>());
    r.timings.neural = std::chrono::nanoseconds(t.at("neural").get<std::int64_t>());
    r.timings.total = std::chrono::nanoseconds(t.at("total").get<std::int64_t>());
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParseError, std::string("report file: ") + e.what());
  }
  try {
    r.Validate();
  } catch (const Error& e) {
    Fail(ErrorCode::kParseError, std::string("report file is inconsistent: ") + e.what());
  }
  return r;
}

void SaveReport(const std::string& path, const ExplanationReport& report, bool with_timings) {
  WriteFileAtomic(path, ReportToJson(report, with_timings));
}

ExplanationReport LoadReport(const std::string& path) { return ReportFromJson(ReadFile(path)); }

}  // namespace hexplain::hier
