#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <thread>

#include "hexplain/bench.hpp"
#include "hexplain/error.hpp"
#include "hexplain/fileio.hpp"
#include "hexplain/hier.hpp"
#include "hexplain/netpbm.hpp"
#include "hexplain/random.hpp"

namespace hexplain::cli {

namespace fs = std::filesystem;

namespace {

// Bad flag values found after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlyphFlags {
  int digit_size = 10;
  int cell_size = 8;
  int channels = 1;
  double jitter = 0.05;
  double noise = 0.1;

  void Add(CLI::App* app) {
    app->add_option("--digit-size", digit_size, "digit glyph side in pixels")->capture_default_str();
    app->add_option("--cell-size", cell_size, "grid cell glyph side in pixels")->capture_default_str();
    app->add_option("--channels", channels, "1 (grayscale) or 3 (colour)")->capture_default_str();
    app->add_option("--jitter", jitter, "stroke jitter")->capture_default_str();
    app->add_option("--noise", noise, "additive noise amplitude in [0, 0.3)")->capture_default_str();
  }

  bench::GlyphConfig Config() const {
    if (digit_size < 1 || cell_size < 1) throw UsageError("glyph sizes must be positive");
    if (channels != 1 && channels != 3) throw UsageError("--channels must be 1 or 3");
    if (!(jitter >= 0.0)) throw UsageError("--jitter must be >= 0");
    if (!(noise >= 0.0 && noise < 0.3)) throw UsageError("--noise must lie in [0, 0.3)");
    return {digit_size, cell_size, channels, jitter, noise};
  }
};

tasks::TaskSpec ParseTask(const std::string& name) {
  try {
    return tasks::TaskSpec::Parse(name);
  } catch (const Error& e) {
    throw UsageError(std::string("--task: ") + e.what());
  }
}

void RequireFile(const std::string& path, const char* flag) {
  if (!fs::is_regular_file(path)) throw UsageError(std::string(flag) + ": no such file '" + path + "'");
}

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) Fail(ErrorCode::kIoError, "cannot create directory '" + dir.string() + "'");
}

int ResolveThreads(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("HEXPLAIN_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v <= 1024) return static_cast<int>(v);
  }
  return 1;
}

std::string NetpbmExtension(const Image& img) { return img.channels == 1 ? ".pgm" : ".ppm"; }

// Composite of the instance: pixels of X_j bright over a dimmed copy for
// j in Y, fully dimmed for inputs outside Y.
Image RenderExplanation(const bench::Instance& inst, const hier::ExplanationReport* report) {
  std::vector<Image> tiles;
  for (std::size_t j = 0; j < inst.images.size(); ++j) {
    if (report == nullptr) {
      tiles.push_back(inst.images[j]);
      continue;
    }
    auto it = report->per_input.find(j);
    tiles.push_back(MaskImage(inst.images[j], it == report->per_input.end() ? mus::IndexSet{} : it->second));
  }
  return TileImages(tiles, TileColumns(inst.task));
}

// Instance files named on the command line: files as given, directories
// expanded to their *.json entries in name order.
std::vector<fs::path> CollectInstances(const std::vector<std::string>& given, bool& many) {
  std::vector<fs::path> out;
  many = given.size() > 1;
  for (const auto& g : given) {
    if (fs::is_directory(g)) {
      many = true;
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(g)) {
        if (e.is_regular_file() && e.path().extension() == ".json") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      RequireFile(g, "--instance");
      out.emplace_back(g);
    }
  }
  if (out.empty()) throw UsageError("--instance: no instance files found");
  return out;
}

void ParallelFor(std::size_t count, int threads, const std::function<void(std::size_t)>& job) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(threads, 1)));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct GenArgs {
  std::string task, out;
  std::size_t count = 1;
  std::uint64_t seed = 1;
  GlyphFlags glyphs;
};

int CmdGen(const GenArgs& a, std::ostream& out) {
  const auto task = ParseTask(a.task);
  const auto glyphs = a.glyphs.Config();
  if (a.count == 0) throw UsageError("--count must be positive");
  EnsureDir(a.out);
  const auto set = bench::GenerateBenchmarkSet(task, a.count, a.seed, glyphs);
  for (std::size_t i = 0; i < set.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "instance-%04zu.json", i);
    bench::SaveInstance((fs::path(a.out) / name).string(), set[i]);
  }
  out << "wrote " << set.size() << " " << task.Name() << " instances to " << a.out << "\n";
  return kOk;
}

struct TrainArgs {
  std::string task, out, idx_images, idx_labels;
  std::uint64_t seed = 1;
  std::size_t samples = 2000;
  int epochs = 30;
  int batch = 16;
  double lr = 0.05;
  std::vector<int> hidden;
  bool whole = false;
  GlyphFlags glyphs;
};

int CmdTrain(const TrainArgs& a, std::ostream& out) {
  const auto task = ParseTask(a.task);
  const auto glyphs = a.glyphs.Config();
  if (a.samples < 10) throw UsageError("--samples must be at least 10");
  if (a.idx_images.empty() != a.idx_labels.empty()) {
    throw UsageError("--idx-images and --idx-labels go together");
  }
  if (!a.idx_images.empty()) {
    RequireFile(a.idx_images, "--idx-images");
    RequireFile(a.idx_labels, "--idx-labels");
    if (task.kind == tasks::TaskKind::kPacman || a.whole) {
      throw UsageError("IDX data only trains the digit classifier of lex/regexp tasks");
    }
  }

  nn::TrainConfig cfg;
  cfg.learning_rate = a.lr;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch;
  cfg.seed = SubSeed(a.seed, "train");
  nn::Dataset train, heldout;
  if (a.whole) {
    cfg.hidden = a.hidden.empty() ? std::vector<int>{32} : a.hidden;
    cfg.num_classes = bench::NumDecisionClasses(task);
    train = bench::MakeWholeInstanceDataset(task, a.samples, SubSeed(a.seed, "data"), glyphs);
    heldout = bench::MakeWholeInstanceDataset(task, a.samples / 4, SubSeed(a.seed, "heldout"), glyphs);
  } else {
    cfg.hidden = !a.hidden.empty() ? a.hidden
                 : task.kind == tasks::TaskKind::kPacman ? std::vector<int>{128}
                                                         : std::vector<int>{10, 10};
    cfg.num_classes = task.num_labels();
    if (!a.idx_images.empty()) {
      auto all = bench::LoadIdx(a.idx_images, a.idx_labels, std::set<int>{0, 1});
      if (all.size() < 10) Fail(ErrorCode::kEmptyDataset, "IDX files hold fewer than 10 zeros and ones");
      const std::size_t cut = all.size() * 4 / 5;
      train.assign(all.begin(), all.begin() + cut);
      heldout.assign(all.begin() + cut, all.end());
    } else {
      train = bench::MakeGlyphDataset(task, a.samples, SubSeed(a.seed, "data"), glyphs);
      heldout = bench::MakeGlyphDataset(task, a.samples / 4, SubSeed(a.seed, "heldout"), glyphs);
    }
  }
  try {
    cfg.Validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const auto model = nn::Train(train, cfg);
  nn::SaveModel(a.out, model);
  char acc[32];
  std::snprintf(acc, sizeof acc, "%.4f", nn::Accuracy(model, heldout));
  out << "trained " << (a.whole ? "whole-instance" : "per-input") << " model for " << task.Name()
      << ": held-out accuracy " << acc << " on " << heldout.size() << " samples\n";
  return kOk;
}

struct PredictArgs {
  std::string model, instance;
};

int CmdPredict(const PredictArgs& a, std::ostream& out) {
  RequireFile(a.model, "--model");
  RequireFile(a.instance, "--instance");
  const auto inst = bench::LoadInstance(a.instance);
  const hier::PipelineModel pipeline{nn::LoadModel(a.model), inst.task};
  const auto pred = hier::Predict(pipeline, inst);
  out << "decision " << pred.decision.ToString() << "\nlabels";
  for (int l : pred.labels) out << ' ' << l;
  out << "\n";
  return kOk;
}

struct ExplainArgs {
  std::string method = "hx-formal", model, whole_model, out;
  std::vector<std::string> instances;
  std::optional<double> eps;
  double tau = 0.9;
  double delta_min = 1e-3;
  std::size_t max_boxes = 20000;
  std::size_t shap_samples = 2048;
  std::size_t whole_shap_samples = 4096;
  std::uint64_t seed = 1;
  int threads = 0;
  bool omit_timings = false;
};

int CmdExplain(const ExplainArgs& a, std::ostream& out) {
  hier::Method method;
  try {
    method.kind = hier::Method::ParseTag(a.method);
  } catch (const Error& e) {
    throw UsageError(std::string("--method: ") + e.what());
  }
  if (a.eps && !(*a.eps > 0.0 && *a.eps <= 1.0)) throw UsageError("--eps must lie in (0, 1]");
  if (!(a.tau > 0.0 && a.tau <= 1.0)) throw UsageError("--tau must lie in (0, 1]");
  if (!(a.delta_min > 0.0)) throw UsageError("--delta-min must be positive");
  RequireFile(a.model, "--model");
  if (method.kind == hier::MethodKind::kNNShap) {
    if (a.whole_model.empty()) throw UsageError("nn-shap needs --whole-model");
    RequireFile(a.whole_model, "--whole-model");
  }
  bool many = false;
  const auto files = CollectInstances(a.instances, many);
  EnsureDir(a.out);

  const auto neural = nn::LoadModel(a.model);
  std::optional<nn::MlpModel> whole;
  if (!a.whole_model.empty()) whole = nn::LoadModel(a.whole_model);
  std::vector<bench::Instance> insts;
  for (const auto& f : files) insts.push_back(bench::LoadInstance(f.string()));

  const int threads = ResolveThreads(a.threads);
  hier::ExplainOptions opt;
  opt.verify.delta_min = a.delta_min;
  opt.verify.max_boxes = a.max_boxes;
  opt.selection.tau = a.tau;
  opt.shap_samples = a.shap_samples;
  opt.whole_shap_samples = a.whole_shap_samples;
  opt.whole_model = whole ? &*whole : nullptr;
  opt.threads = insts.size() == 1 ? threads : 1;

  std::vector<hier::ExplanationReport> reports(insts.size());
  ParallelFor(insts.size(), insts.size() == 1 ? 1 : threads, [&](std::size_t i) {
    const auto& inst = insts[i];
    hier::Method m = method;
    if (m.kind == hier::MethodKind::kHXFormal) {
      m.eps = a.eps.value_or(inst.task.kind == tasks::TaskKind::kPacman ? 0.2 : 0.3);
    }
    hier::ExplainOptions o = opt;
    o.seed = SubSeed(a.seed, files[i].filename().string());
    const hier::PipelineModel pipeline{neural, inst.task};
    reports[i] = hier::ExplainHierarchical(pipeline, inst, m, o);

    const fs::path dir = many ? fs::path(a.out) / files[i].stem() : fs::path(a.out);
    EnsureDir(dir);
    hier::SaveReport((dir / "report.json").string(), reports[i], !a.omit_timings);
    for (const auto& [j, X] : reports[i].per_input) {
      const Image mask = MaskImage(inst.images[j], X);
      WriteFileAtomic((dir / ("mask-" + std::to_string(j) + NetpbmExtension(mask))).string(), EncodeNetpbm(mask));
    }
    const Image overview = RenderExplanation(inst, &reports[i]);
    WriteFileAtomic((dir / ("explanation" + NetpbmExtension(overview))).string(), EncodeNetpbm(overview));
  });

  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    out << files[i].filename().string() << ": decision " << r.decision.ToString() << ", |Y| "
        << r.symbolic_set.size() << ", |X| " << r.union_size;
    if (r.unknown_kept > 0) out << ", unknown kept " << r.unknown_kept;
    out << "\n";
  }
  return kOk;
}

struct VerifyArgs {
  std::string model, instance, report;
  int levels = 3;
};

int CmdVerify(const VerifyArgs& a, std::ostream& out) {
  if (a.levels < 1) throw UsageError("--levels must be positive");
  RequireFile(a.model, "--model");
  RequireFile(a.instance, "--instance");
  RequireFile(a.report, "--report");
  const auto inst = bench::LoadInstance(a.instance);
  const auto report = hier::LoadReport(a.report);
  const hier::PipelineModel pipeline{nn::LoadModel(a.model), inst.task};
  const bool ok = hier::VerifyMinimality(pipeline, inst, report, a.levels);
  out << (ok ? "minimal" : "not minimal") << " (grid levels " << a.levels << ")\n";
  return kOk;
}

struct ReportArgs {
  std::string dir, csv;
};

int CmdReport(const ReportArgs& a, std::ostream& out) {
  if (!fs::is_directory(a.dir)) throw UsageError("--dir: no such directory '" + a.dir + "'");
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(a.dir)) {
    if (e.is_regular_file() && e.path().filename() == "report.json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<std::string> task_order;
  std::vector<std::vector<hier::ExplanationReport>> by_task;
  for (const auto& f : files) {
    auto r = hier::LoadReport(f.string());
    const std::string name = r.task.Name();
    auto it = std::find(task_order.begin(), task_order.end(), name);
    if (it == task_order.end()) {
      task_order.push_back(name);
      by_task.emplace_back();
      it = task_order.end() - 1;
    }
    by_task[it - task_order.begin()].push_back(std::move(r));
  }
  if (by_task.empty()) hier::Summarize({});  // raises EmptyInput
  std::string csv;
  for (std::size_t t = 0; t < by_task.size(); ++t) {
    const auto table = hier::Summarize(by_task[t]);
    if (t > 0) out << "\n";
    out << table.ToText();
    const auto rows = table.ToCsv();
    csv += t == 0 ? rows : rows.substr(rows.find('\n') + 1);
  }
  if (!a.csv.empty()) WriteFileAtomic(a.csv, csv);
  return kOk;
}

struct RenderArgs {
  std::string instance, report, out;
};

int CmdRender(const RenderArgs& a, std::ostream& out) {
  RequireFile(a.instance, "--instance");
  if (!a.report.empty()) RequireFile(a.report, "--report");
  const auto inst = bench::LoadInstance(a.instance);
  std::optional<hier::ExplanationReport> report;
  if (!a.report.empty()) {
    report = hier::LoadReport(a.report);
    if (report->task != inst.task || report->pixels_per_input != inst.images.front().num_features()) {
      Fail(ErrorCode::kDimensionMismatch, "report does not belong to this instance");
    }
  }
  const Image img = RenderExplanation(inst, report ? &*report : nullptr);
  WriteFileAtomic(a.out, EncodeNetpbm(img));
  out << "wrote " << img.width << "x" << img.height << " image to " << a.out << "\n";
  return kOk;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical abductive explanations for neuro-symbolic pipelines", "hexplain"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "write seeded benchmark instance files");
  gen_cmd->add_option("--task", gen.task, "lex1-<n>, regexp-<1|2>-<n>, pacman-sp or pacman-<w>x<h>")->required();
  gen_cmd->add_option("--count", gen.count, "number of instances")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "root seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "output directory")->required();
  gen.glyphs.Add(gen_cmd);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "train a per-input (or whole-instance) classifier");
  train_cmd->add_option("--task", train.task, "task name")->required();
  train_cmd->add_option("--out", train.out, "model file to write")->required();
  train_cmd->add_option("--seed", train.seed, "root seed")->capture_default_str();
  train_cmd->add_option("--samples", train.samples, "training samples")->capture_default_str();
  train_cmd->add_option("--epochs", train.epochs, "training epochs")->capture_default_str();
  train_cmd->add_option("--batch", train.batch, "mini-batch size")->capture_default_str();
  train_cmd->add_option("--lr", train.lr, "learning rate")->capture_default_str();
  train_cmd->add_option("--hidden", train.hidden, "hidden layer widths, e.g. 10,10")->delimiter(',');
  train_cmd->add_flag("--whole", train.whole, "train the whole-instance decision model used by nn-shap");
  train_cmd->add_option("--idx-images", train.idx_images, "IDX image file (digits 0 and 1 are kept)");
  train_cmd->add_option("--idx-labels", train.idx_labels, "IDX label file");
  train.glyphs.Add(train_cmd);

  PredictArgs predict;
  auto* predict_cmd = app.add_subcommand("predict", "print the pipeline decision for an instance");
  predict_cmd->add_option("--model", predict.model, "per-input model file")->required();
  predict_cmd->add_option("--instance", predict.instance, "instance file")->required();

  ExplainArgs explain;
  auto* explain_cmd = app.add_subcommand("explain", "explain pipeline decisions");
  explain_cmd->add_option("--method", explain.method, "hx-formal, hx-shap, pipeline-shap or nn-shap")->capture_default_str();
  explain_cmd->add_option("--eps", explain.eps, "hx-formal radius in (0, 1] (default 0.3, pacman 0.2)");
  explain_cmd->add_option("--model", explain.model, "per-input model file")->required();
  explain_cmd->add_option("--whole-model", explain.whole_model, "whole-instance model (nn-shap)");
  explain_cmd->add_option("--instance", explain.instances, "instance file or directory (repeatable)")->required();
  explain_cmd->add_option("--out", explain.out, "output directory")->required();
  explain_cmd->add_option("--tau", explain.tau, "SHAP selection mass")->capture_default_str();
  explain_cmd->add_option("--delta-min", explain.delta_min, "verifier resolution floor")->capture_default_str();
  explain_cmd->add_option("--max-boxes", explain.max_boxes, "verifier node budget per query")->capture_default_str();
  explain_cmd->add_option("--shap-samples", explain.shap_samples, "coalitions per input (hx-shap)")->capture_default_str();
  explain_cmd->add_option("--whole-shap-samples", explain.whole_shap_samples, "coalitions (pipeline-shap, nn-shap)")->capture_default_str();
  explain_cmd->add_option("--seed", explain.seed, "root seed")->capture_default_str();
  explain_cmd->add_option("--threads", explain.threads, "worker threads (default: HEXPLAIN_THREADS or 1)");
  explain_cmd->add_flag("--omit-timings", explain.omit_timings, "write zero timings so reports are reproducible byte for byte");

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "certify minimality of an hx-formal report by brute force");
  verify_cmd->add_option("--model", verify.model, "per-input model file")->required();
  verify_cmd->add_option("--instance", verify.instance, "instance file")->required();
  verify_cmd->add_option("--report", verify.report, "report file")->required();
  verify_cmd->add_option("--levels", verify.levels, "grid levels per free pixel")->capture_default_str();

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "summarize the report.json files under a directory");
  report_cmd->add_option("--dir", report.dir, "directory to scan")->required();
  report_cmd->add_option("--csv", report.csv, "also write machine-readable rows here");

  RenderArgs render;
  auto* render_cmd = app.add_subcommand("render", "render an instance, optionally masked by a report, as PGM/PPM");
  render_cmd->add_option("--instance", render.instance, "instance file")->required();
  render_cmd->add_option("--report", render.report, "report file");
  render_cmd->add_option("--out", render.out, "image file to write")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (gen_cmd->parsed()) return CmdGen(gen, out);
    if (train_cmd->parsed()) return CmdTrain(train, out);
    if (predict_cmd->parsed()) return CmdPredict(predict, out);
    if (explain_cmd->parsed()) return CmdExplain(explain, out);
    if (verify_cmd->parsed()) return CmdVerify(verify, out);
    if (report_cmd->parsed()) return CmdReport(report, out);
    if (render_cmd->parsed()) return CmdRender(render, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kInternal ? kInternalError : kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  err << "error: no subcommand\n" << app.help();
  return kUsage;
}

}  // namespace hexplain::cli
