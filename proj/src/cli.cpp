#include "ssync/cli.hpp"

#include <CLI11.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "ssync/analysis.hpp"
#include "ssync/automaton.hpp"
#include "ssync/harness.hpp"
#include "ssync/scheduler.hpp"
#include "ssync/world.hpp"

namespace ssync {
namespace {

// Carries an exit status out of a subcommand.
struct Failure {
  int code;
  std::string message;
};

Automaton load(const std::string& name) {
  try {
    return load_automaton(name);
  } catch (const AutomatonError& e) {
    std::string msg = name + ": " + e.what();
    if (!e.token().empty()) msg += " (token '" + e.token() + "')";
    throw Failure{kExitBadInput, msg};
  } catch (const std::ios_base::failure& e) {
    throw Failure{kExitIo, "cannot read automaton '" + name + "'"};
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Failure{kExitIo, "cannot open '" + path + "' for writing"};
  f << content;
  f.close();
  if (!f) throw Failure{kExitIo, "failed writing '" + path + "'"};
}

struct RunArgs {
  std::string automaton;
  std::string scheduler = "adversarial";
  std::uint64_t horizon = 0;
  std::string out;
};

int cmd_run(const RunArgs& args, std::ostream& out) {
  const auto kind = parse_schedule_kind(args.scheduler);
  if (!kind) throw Failure{kExitBadInput, "unknown scheduler '" + args.scheduler + "'"};
  const Automaton a = load(args.automaton);
  SchedulerStats stats;
  Trace trace;
  try {
    trace = run_schedule(*kind, a, args.horizon, &stats);
  } catch (const ClassificationError& e) {
    throw Failure{kExitBadInput, e.what()};
  }
  if (!args.out.empty()) write_file(args.out, trace_to_string(trace, a));

  std::array<std::uint64_t, 3> counts{};
  for (const auto& r : trace.records()) ++counts[static_cast<std::size_t>(r.type) - 1];
  out << "steps " << trace.end_time() << '\n';
  out << "subschedules type1 " << counts[0] << " type2 " << counts[1] << " type3 " << counts[2] << '\n';
  if (stats.escape) {
    out << "escape agent " << stats.escape->escaping_agent << " period " << stats.escape->period << '\n';
  }
  out << "explored " << trace.explored().size() << '\n';
  return kExitOk;
}

struct AnalyzeArgs {
  std::string trace;
  std::string automaton;
  std::string slope;
  std::string base;
  std::vector<std::uint64_t> checkpoints;
  std::optional<std::uint64_t> warmup;
  std::string out;
};

ModBase parse_base(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw Failure{kExitBadInput, "base must be given as x,y"};
  try {
    std::size_t used = 0;
    const std::string xs = text.substr(0, comma);
    const std::string ys = text.substr(comma + 1);
    ModBase b;
    b.x = std::stoll(xs, &used);
    if (used != xs.size()) throw std::invalid_argument(xs);
    b.y = std::stoll(ys, &used);
    if (used != ys.size()) throw std::invalid_argument(ys);
    return b;
  } catch (const std::logic_error&) {
    throw Failure{kExitBadInput, "malformed base '" + text + "'"};
  }
}

int cmd_analyze(const AnalyzeArgs& args, std::ostream& out) {
  const Automaton a = load(args.automaton);
  std::ifstream in(args.trace, std::ios::binary);
  if (!in) throw Failure{kExitIo, "cannot read trace '" + args.trace + "'"};
  Trace trace;
  try {
    trace = read_trace(in, a);
  } catch (const TraceFormatError& e) {
    throw Failure{kExitBadInput, args.trace + ": " + e.what()};
  }

  AnalysisOptions opt;
  if (!args.slope.empty()) {
    opt.slope = Slope::parse(args.slope);
    if (!opt.slope) throw Failure{kExitBadInput, "malformed slope '" + args.slope + "'"};
  }
  if (!args.base.empty()) opt.base = parse_base(args.base);
  opt.checkpoints = args.checkpoints;
  opt.warmup = args.warmup;

  std::ostringstream report;
  try {
    write_analysis_report(report, trace, a, opt);
  } catch (const InconsistentBaseError& e) {
    throw Failure{kExitInconsistent, e.what()};
  }
  if (args.out.empty()) {
    out << report.str();
  } else {
    write_file(args.out, report.str());
  }
  return kExitOk;
}

struct CorpusArgs {
  CorpusParams params;
  std::uint64_t horizon = 10000;
  std::string out;
  bool traces = false;
};

std::string entry_name(std::size_t i, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "entry_%04zu.%s", i, ext);
  return buf;
}

int cmd_corpus(const CorpusArgs& args, std::ostream& out) {
  std::vector<Automaton> corpus;
  try {
    corpus = generate_corpus(args.params);
  } catch (const std::invalid_argument& e) {
    throw Failure{kExitBadInput, e.what()};
  }
  namespace fs = std::filesystem;
  if (!args.out.empty()) {
    std::error_code ec;
    fs::create_directories(args.out, ec);
    if (ec) throw Failure{kExitIo, "cannot create directory '" + args.out + "'"};
  }

  CorpusSummary summary;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    Trace trace;
    const EntryResult r = run_entry(corpus[i], i, args.horizon, args.traces ? &trace : nullptr);
    summary.add(r);
    if (args.out.empty()) continue;
    std::ostringstream report;
    write_entry_report(report, r, corpus[i]);
    write_file((fs::path(args.out) / entry_name(i, "report")).string(), report.str());
    if (args.traces && !trace.empty()) {
      write_file((fs::path(args.out) / entry_name(i, "trace")).string(), trace_to_string(trace, corpus[i]));
    }
  }

  std::ostringstream text;
  write_summary(text, args.params, args.horizon, summary);
  if (!args.out.empty()) write_file((fs::path(args.out) / "summary.txt").string(), text.str());
  out << text.str();
  return summary.hard_violations() == 0 ? kExitOk : kExitViolation;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulator and analysis toolkit for finite-automaton agents on the grid", "ssync"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Simulate one automaton and write its trace");
  run_cmd->add_option("--automaton", run.automaton, "Builtin name (east1, stay1, zig2) or file")->required();
  run_cmd->add_option("--scheduler", run.scheduler, "adversarial, sync or round-robin")->capture_default_str();
  run_cmd->add_option("--horizon", run.horizon, "Number of time steps")->required()->check(CLI::PositiveNumber);
  run_cmd->add_option("--out", run.out, "Trace output file");

  AnalyzeArgs analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Analyze a trace");
  analyze_cmd->add_option("--trace", analyze.trace, "Trace file")->required();
  analyze_cmd->add_option("--automaton", analyze.automaton, "Automaton that produced the trace")->required();
  analyze_cmd->add_option("--slope", analyze.slope, "Slope override: p/q, p or vertical");
  analyze_cmd->add_option("--base", analyze.base, "Base override in the normalized frame: x,y");
  analyze_cmd->add_option("--checkpoints", analyze.checkpoints, "Times at which to measure band widths")
      ->delimiter(',');
  analyze_cmd->add_option("--warmup", analyze.warmup, "Ignore travel pairs starting before this time");
  analyze_cmd->add_option("--out", analyze.out, "Report output file (default: stdout)");

  CorpusArgs corpus;
  auto* corpus_cmd = app.add_subcommand("corpus", "Run a seeded corpus of random automata");
  corpus_cmd->add_option("--seed", corpus.params.seed, "Generator seed")->capture_default_str();
  corpus_cmd->add_option("--count", corpus.params.count, "Number of automata")->capture_default_str();
  corpus_cmd->add_option("--max-states", corpus.params.max_states, "Largest state count (1..6)")
      ->capture_default_str();
  corpus_cmd->add_option("--agents", corpus.params.n_agents, "Agents per automaton")->capture_default_str();
  corpus_cmd->add_option("--horizon", corpus.horizon, "Adversarial horizon per entry")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  corpus_cmd->add_option("--out", corpus.out, "Directory for per-entry reports and the summary");
  corpus_cmd->add_flag("--traces", corpus.traces, "Also write every trace");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (*run_cmd) return cmd_run(run, out);
    if (*analyze_cmd) return cmd_analyze(analyze, out);
    return cmd_corpus(corpus, out);
  } catch (const Failure& f) {
    err << "error: " << f.message << '\n';
    return f.code;
  }
}

}  // namespace ssync
