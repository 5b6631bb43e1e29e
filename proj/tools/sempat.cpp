// sempat: pattern generation, pattern matching, hyperproperty checks, completeness oracle, benchmarks.
//
// Exit codes: 0 safe / ok, 1 unsafe / counterexample / taint failure, 2 inconclusive, 64 usage or I/O error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "sempat/analysis.hpp"
#include "sempat/config.hpp"

using namespace sempat;

namespace {

constexpr int kOk = 0, kUnsafe = 1, kInconclusive = 2, kUsage = 64;

struct UsageError : Error {
  using Error::Error;
};

struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  int jobs = 0;
  bool no_prune = false;
  bool allow_partial = false;
};

void add_common(CLI::App* c, Common& o) {
  c->add_option("-c,--config", o.config_path, "configuration file");
  c->add_option("--set", o.sets, "override a configuration key (key=value)");
  c->add_option("--jobs", o.jobs, "worker threads (default: available cores)");
  c->add_flag("--no-prune", o.no_prune, "keep patterns subsumed by their siblings");
  c->add_flag("--allow-partial", o.allow_partial, "emit a partial pattern set when the engine gives up");
}

RunConfig load(const Common& o) {
  RunConfig c;
  try {
    if (!o.config_path.empty()) c = load_config(o.config_path);
    for (const auto& s : o.sets) {
      auto eq = s.find('=');
      if (eq == std::string::npos) throw Error(fmt::format("--set expects key=value, got '{}'", s));
      auto trim = [](std::string x) {
        x.erase(0, x.find_first_not_of(" \t"));
        x.erase(x.find_last_not_of(" \t") + 1);
        return x;
      };
      apply_setting(c, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
    if (o.jobs > 0) {
      c.jobs = o.jobs;
    } else if (!c.explicit_keys.count("jobs")) {
      c.jobs = std::max(1u, std::thread::hardware_concurrency());
    }
    if (o.no_prune) c.prune = false;
    if (o.allow_partial) c.allow_partial = true;
    validate_config(c);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return c;
}

std::string read_input(const std::string& path) {
  try {
    return read_file(path);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError(fmt::format("cannot write '{}'", path));
  f << text;
}

int verdict_exit(PathVerdict v) {
  switch (v) {
    case PathVerdict::Safe: return kOk;
    case PathVerdict::Unsafe: return kUnsafe;
    case PathVerdict::Unknown: return kInconclusive;
  }
  return kInconclusive;
}

std::string generation_report(const GenerationReport& r, const PatternSet& s) {
  std::string out;
  size_t accepted = r.templates.accepted.size();
  out += fmt::format("templates visited: {}\ntemplates accepted: {}\npatterns: {}\n", r.templates.records.size(),
                     accepted, s.patterns.size());
  out += fmt::format("total_ms: {:.1f}\n", r.total_ms);
  for (const auto& t : r.templates.records)
    out += fmt::format("template {} status={} time_ms={:.2f}\n", render_template(t.tmpl),
                       template_status_name(t.status), t.time_ms);
  for (const auto& o : r.specialized)
    out += fmt::format(
        "specialize {} patterns={} queries={} branch_events={} productive={} vacuous={} pruned={} time_ms={:.1f}{}\n",
        render_template(o.tmpl), o.patterns, o.stats.queries, o.stats.branch_events, o.stats.productive_branches,
        o.stats.vacuous_branches, o.stats.sibling_pruned, o.time_ms, o.inconclusive ? " inconclusive" : "");
  return out;
}

int cmd_generate(const Common& co, const std::string& out_path, const std::string& report_path) {
  RunConfig c = load(co);
  auto m = build_model(c);
  auto p = build_property(c, *m);
  GenerationReport rep;
  PatternSet s;
  try {
    s = generate_patterns(m, p, build_grammar(c), build_generate_options(c), build_budget(c), &rep);
  } catch (const Inconclusive& e) {
    std::cerr << "inconclusive: " << e.what() << " (rerun with --allow-partial to keep a partial set)\n";
    return kInconclusive;
  }
  std::string path = out_path.empty() ? c.output : out_path;
  write_output(path, serialize_patterns(s));
  std::string text = generation_report(rep, s);
  if (!report_path.empty()) write_output(report_path, text);
  else std::cerr << text;
  return s.provenance.partial ? kInconclusive : kOk;
}

Program load_program(const RunConfig& c, const std::string& path) {
  std::string text = read_input(path);
  MachineConfig mc = c.platform == "platsynth" ? MachineConfig{} : c.machine;
  return parse_program(text, mc);
}

void print_report(const AnalysisReport& r, const PlatformModel& m, bool with_time, bool verbose) {
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << r.render_lines(with_time);
  std::cout << "verdict=" << path_verdict_name(r.verdict) << "\n";
  if (verbose) std::cerr << r.render_text(m);
}

int cmd_match(const Common& co, const std::string& pattern_path, const std::string& program_path, bool no_time,
              bool verbose) {
  RunConfig c = load(co);
  auto m = build_model(c);
  auto p = build_property(c, *m);
  PatternSet s = parse_patterns(read_input(pattern_path));
  Program prog = load_program(c, program_path);
  auto r = analyze(m, p, s, prog, c.unroll_depth, build_budget(c));
  print_report(r, *m, !no_time, verbose);
  return verdict_exit(r.verdict);
}

int cmd_check_hyper(const Common& co, const std::string& program_path, bool no_time, bool verbose) {
  RunConfig c = load(co);
  auto m = build_model(c);
  auto p = build_property(c, *m);
  Program prog = load_program(c, program_path);
  auto r = analyze_hyper(m, p, prog, c.unroll_depth, build_budget(c));
  print_report(r, *m, !no_time, verbose);
  return verdict_exit(r.verdict);
}

int cmd_oracle(const Common& co, const std::string& pattern_path, int depth) {
  RunConfig c = load(co);
  auto m = build_model(c);
  auto p = build_property(c, *m);
  PatternSet s = parse_patterns(read_input(pattern_path));
  int d = depth > 0 ? depth : s.provenance.depth;
  OracleResult r;
  try {
    r = kcompleteness_oracle(m, p, s, d, build_budget(c));
  } catch (const Inconclusive&) {
    r.status = OracleStatus::Inconclusive;
  }
  switch (r.status) {
    case OracleStatus::Complete:
      std::cout << fmt::format("oracle: complete up to depth {} ({} templates)\n", d, r.templates_checked);
      return kOk;
    case OracleStatus::Counterexample:
      std::cout << fmt::format("oracle: counterexample after {} templates\n", r.templates_checked);
      std::cout << render_program(Program{r.counterexample->program, {}});
      std::cout << render_witness(*m, *r.counterexample);
      return kUnsafe;
    case OracleStatus::Inconclusive:
      std::cout << "oracle: inconclusive\n";
      return kInconclusive;
  }
  return kInconclusive;
}

struct BenchRow {
  std::string param;
  std::string value;
  std::string templates = "-";
  std::string patterns = "-";
  double time_ms = 0;
  std::string status;
};

BenchRow bench_generate(RunConfig c, const std::string& param, int value) {
  BenchRow row{param, std::to_string(value)};
  apply_setting(c, param, std::to_string(value));
  c.deadline_ms = c.bench_cell_timeout_ms;
  validate_config(c);
  auto m = build_model(c);
  auto p = build_property(c, *m);
  GenerationReport rep;
  auto t0 = std::chrono::steady_clock::now();
  try {
    auto s = generate_patterns(m, p, build_grammar(c), build_generate_options(c), build_budget(c), &rep);
    row.templates = std::to_string(rep.templates.accepted.size());
    row.patterns = std::to_string(s.patterns.size());
    row.status = "ok";
  } catch (const Inconclusive&) {
    row.status = "timeout";
  }
  row.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

int cmd_bench(const Common& co, const std::string& pattern_path) {
  RunConfig c = load(co);
  const std::string& ex = c.bench_experiment;
  std::vector<BenchRow> rows;
  auto emit = [&](const BenchRow& r) {
    std::cout << fmt::format("{},{},{},{},{},{:.1f},{}\n", ex, r.param, r.value, r.templates, r.patterns, r.time_ms,
                             r.status);
    std::cout.flush();
  };
  std::cout << "experiment,param,value,templates,patterns,time_ms,status\n";
  if (ex == "reuse_buf" || ex == "lsqc" || ex == "gdep" || ex == "pdep" || ex == "word_width") {
    std::string param = ex == "reuse_buf" ? "reuse_buf_size"
                        : ex == "lsqc"    ? "lsqc_entries"
                        : ex == "gdep"    ? "depth"
                                          : ex;
    if (c.bench_values.empty()) throw UsageError("bench.values is empty");
    for (int v : c.bench_values) emit(bench_generate(c, param, v));
    return kOk;
  }
  if (ex == "litmus") {
    if (pattern_path.empty()) throw UsageError("bench litmus needs --patterns");
    auto m = build_model(c);
    auto p = build_property(c, *m);
    PatternSet s = parse_patterns(read_input(pattern_path));
    for (const auto& file : c.bench_programs) {
      Program prog = load_program(c, file);
      std::string name = std::filesystem::path(file).stem().string();
      RunConfig cc = c;
      cc.deadline_ms = c.bench_cell_timeout_ms;
      auto rp = analyze(m, p, s, prog, c.unroll_depth, build_budget(cc));
      emit({"pattern", name, "-", std::to_string(s.patterns.size()), rp.total_ms, path_verdict_name(rp.verdict)});
      auto rh = analyze_hyper(m, p, prog, c.unroll_depth, build_budget(cc));
      emit({"hyper", name, "-", "-", rh.total_ms, path_verdict_name(rh.verdict)});
    }
    return kOk;
  }
  throw UsageError(fmt::format("unknown bench.experiment '{}' (reuse_buf, lsqc, gdep, pdep, word_width, litmus)", ex));
}

int cmd_taint_validate(const Common& co, int trials) {
  RunConfig c = load(co);
  auto m = build_model(c);
  uint64_t seed = 1;
  if (const char* s = std::getenv("SEMPAT_SEED")) seed = std::strtoull(s, nullptr, 10);
  auto r = taint_soundness_check(m, trials, seed);
  std::cout << fmt::format("taint-validate seed={} trials={} effective={} failures={}\n", seed, r.trials, r.effective,
                           r.failures);
  if (r.failures > 0) {
    std::cout << r.first_failure << "\n";
    return kUnsafe;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sempat: semantic pattern generation and matching for microarchitectural leakage"};
  app.require_subcommand(1);
  Common co;
  std::string out_path, report_path, pattern_path, program_path;
  bool no_time = false, verbose = false;
  int depth = 0, trials = 10000;

  auto* gen = app.add_subcommand("generate", "generate a pattern set");
  add_common(gen, co);
  gen->add_option("-o,--output", out_path, "pattern file (default: config 'output', else stdout)");
  gen->add_option("--report", report_path, "generation report file (default: stderr)");

  auto* match = app.add_subcommand("match", "pattern-based analysis of a program");
  add_common(match, co);
  match->add_option("-p,--patterns", pattern_path, "pattern file")->required();
  match->add_option("program", program_path, "assembly file")->required();
  match->add_flag("--no-time", no_time, "omit timings from the report lines");
  match->add_flag("-v,--verbose", verbose, "print witnesses");

  auto* hyper = app.add_subcommand("check-hyper", "hyperproperty-based analysis of a program");
  add_common(hyper, co);
  hyper->add_option("program", program_path, "assembly file")->required();
  hyper->add_flag("--no-time", no_time, "omit timings from the report lines");
  hyper->add_flag("-v,--verbose", verbose, "print witnesses");

  auto* oracle = app.add_subcommand("oracle", "check a pattern set for completeness up to a depth");
  add_common(oracle, co);
  oracle->add_option("-p,--patterns", pattern_path, "pattern file")->required();
  oracle->add_option("--depth", depth, "depth to check (default: generation depth)");

  auto* bench = app.add_subcommand("bench", "timing sweep, CSV on stdout");
  add_common(bench, co);
  bench->add_option("-p,--patterns", pattern_path, "pattern file for the litmus experiment");

  auto* taint = app.add_subcommand("taint-validate", "randomized taint soundness check (seed: SEMPAT_SEED)");
  add_common(taint, co);
  taint->add_option("--trials", trials, "number of trials");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (*gen) return cmd_generate(co, out_path, report_path);
    if (*match) return cmd_match(co, pattern_path, program_path, no_time, verbose);
    if (*hyper) return cmd_check_hyper(co, program_path, no_time, verbose);
    if (*oracle) return cmd_oracle(co, pattern_path, depth);
    if (*bench) return cmd_bench(co, pattern_path);
    if (*taint) return cmd_taint_validate(co, trials);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Inconclusive& e) {
    std::cerr << "inconclusive: " << e.what() << "\n";
    return kInconclusive;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
