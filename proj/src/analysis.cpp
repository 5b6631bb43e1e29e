#include "sempat/analysis.hpp"

#include <atomic>
#include <chrono>
#include <thread>

#include <fmt/format.h>

namespace sempat {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

int model_index_width(const PlatformModel& m) {
  auto it = m.params().find("set_index_width");
  return it == m.params().end() ? 0 : std::stoi(it->second);
}

std::vector<Opcode> opcodes_of(const std::vector<Instruction>& p) {
  std::vector<Opcode> out;
  for (const auto& in : p) out.push_back(in.op);
  return out;
}

std::string join(const std::vector<size_t>& v) {
  std::string out;
  for (size_t x : v) out += (out.empty() ? "" : ",") + std::to_string(x);
  return out.empty() ? "-" : out;
}

// Lazily opened per-path session shared by every pattern checked on the path.
class PathMatcher {
 public:
  PathMatcher(const ModelPtr& m, const NIProperty& p, const UnrolledProgram& path, const SearchBudget& b, int siw)
      : m_(m), p_(p), path_(path), b_(b), ops_(opcodes_of(path.instructions)) {
    o_.require_violation = false;
    o_.arch_only = true;
    o_.assumptions = path.assumptions;
    o_.set_index_width = siw;
  }

  MatchResult match(const Pattern& pat, size_t index, bool first_only) {
    MatchResult r;
    for (const auto& e : embeddings(pat.tmpl, ops_)) {
      if (!session_) session_ = open_session(m_, p_, Code::from_program(path_.instructions), o_, b_);
      auto c = session_->check(Formula::of(pat.constraint, e));
      if (c.verdict == Verdict::Unknown) r.unknown.push_back(e);
      if (c.verdict != Verdict::Found) continue;
      r.sites.push_back(MatchSite{index, e, std::move(*c.witness)});
      if (first_only) break;
    }
    return r;
  }

  const SessionOptions& options() const { return o_; }

 private:
  ModelPtr m_;
  NIProperty p_;
  const UnrolledProgram& path_;
  SearchBudget b_;
  SessionOptions o_;
  std::vector<Opcode> ops_;
  std::unique_ptr<Session> session_;
};

template <class F>
void for_each_parallel(size_t n, int jobs, F&& f) {
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  if (jobs <= 1) {
    for (size_t k = 0; k < n; ++k) f(k);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> th;
  for (int j = 0; j < jobs; ++j)
    th.emplace_back([&] {
      for (size_t k; (k = next++) < n;) f(k);
    });
  for (auto& t : th) t.join();
}

PathVerdict merge(const std::vector<PathReport>& ps) {
  PathVerdict v = PathVerdict::Safe;
  for (const auto& p : ps) {
    if (p.verdict == PathVerdict::Unsafe) return PathVerdict::Unsafe;
    if (p.verdict == PathVerdict::Unknown) v = PathVerdict::Unknown;
  }
  return v;
}

}  // namespace

std::vector<UnrolledProgram> unroll(const Program& p, int depth) {
  for (size_t i = 0; i < p.size(); ++i) {
    const auto& in = p.instructions[i];
    if (in.op != kBr) continue;
    auto it = p.labels.find(in.target);
    if (it == p.labels.end()) throw Error(fmt::format("unresolved label '{}'", in.target));
    if (it->second <= i) throw Error(fmt::format("backward branch to '{}'", in.target));
  }
  if (depth < 0) throw Error("unroll depth must be >= 0");
  std::vector<UnrolledProgram> out;
  auto walk = [&](auto&& self, size_t pc, UnrolledProgram cur) -> void {
    while (pc < p.size()) {
      if (static_cast<int>(cur.instructions.size()) >= depth) {
        cur.truncated = true;
        break;
      }
      const auto& in = p.instructions[pc];
      if (in.op != kBr) {
        cur.instructions.push_back(in);
        ++pc;
        continue;
      }
      size_t target = p.labels.at(in.target);
      for (bool taken : {false, true}) {
        UnrolledProgram next = cur;
        Instruction br = in;
        br.target = "L";
        next.assumptions.push_back({next.instructions.size(), taken});
        next.instructions.push_back(br);
        next.path_id += taken ? 'T' : 'F';
        self(self, taken ? target : pc + 1, std::move(next));
      }
      return;
    }
    if (cur.path_id.empty()) cur.path_id = "-";
    out.push_back(std::move(cur));
  };
  walk(walk, 0, {});
  return out;
}

MatchResult match_pattern(const ModelPtr& m, const NIProperty& p, const UnrolledProgram& path, const Pattern& pat,
                          const SearchBudget& b, bool first_only, int set_index_width) {
  PathMatcher pm(m, p, path, b, set_index_width < 0 ? model_index_width(*m) : set_index_width);
  return pm.match(pat, 0, first_only);
}

std::string path_verdict_name(PathVerdict v) {
  switch (v) {
    case PathVerdict::Safe: return "SAFE";
    case PathVerdict::Unsafe: return "UNSAFE";
    case PathVerdict::Unknown: return "UNKNOWN";
  }
  return "?";
}

std::string AnalysisReport::render_lines(bool with_time) const {
  std::string out;
  for (const auto& l : lines) {
    out += fmt::format("path={} pattern={} verdict={} site={}", l.path, l.pattern, path_verdict_name(l.verdict),
                       join(l.site));
    if (with_time) out += fmt::format(" time_ms={}", static_cast<long>(l.time_ms));
    out += "\n";
  }
  return out;
}

std::string AnalysisReport::render_text(const PlatformModel& m) const {
  std::string out;
  for (const auto& w : warnings) out += "warning: " + w + "\n";
  for (const auto& p : paths) {
    out += fmt::format("path {}{}: {} ({:.1f} ms)\n", p.path.path_id, p.path.truncated ? " (truncated)" : "",
                       path_verdict_name(p.verdict), p.time_ms);
    for (const auto& s : p.sites) {
      out += fmt::format("  pattern {} at {}\n", s.pattern, join(s.indices));
    }
    const Witness* w = !p.sites.empty() ? &p.sites.front().witness : p.witness ? &*p.witness : nullptr;
    if (w) {
      std::string text = render_witness(m, *w);
      size_t a = 0;
      while (a < text.size()) {
        size_t b = text.find('\n', a);
        if (b == std::string::npos) b = text.size();
        out += "    " + text.substr(a, b - a) + "\n";
        a = b + 1;
      }
    }
  }
  out += fmt::format("verdict: {}\n", path_verdict_name(verdict));
  return out;
}

AnalysisReport analyze(const ModelPtr& m, const NIProperty& p, const PatternSet& patterns, const Program& program,
                       int depth, const SearchBudget& b) {
  auto t0 = Clock::now();
  AnalysisReport rep;
  const auto& pv = patterns.provenance;
  if (pv.model != m->fingerprint())
    rep.warnings.push_back(fmt::format("patterns were generated for '{}'", pv.model));
  if (pv.property != describe_property(*m, p))
    rep.warnings.push_back(fmt::format("patterns were generated for property '{}'", pv.property));
  if (pv.partial) rep.warnings.push_back("pattern set is partial");
  if (patterns.patterns.empty()) rep.warnings.push_back("empty pattern set");
  int siw = model_index_width(*m);
  if (!pv.grammar.empty()) {
    int g = grammar_by_id(pv.grammar).set_index_width;
    if (g > 0) siw = g;
  }
  auto paths = unroll(program, depth);
  rep.paths.resize(paths.size());
  std::vector<std::vector<ReportLine>> lines(paths.size());
  SearchBudget inner = b;
  if (b.jobs > 1 && paths.size() > 1) inner.jobs = 1;
  for_each_parallel(paths.size(), b.jobs, [&](size_t k) {
    auto p0 = Clock::now();
    PathReport& pr = rep.paths[k];
    pr.path = paths[k];
    if (pr.path.truncated) pr.verdict = PathVerdict::Unknown;
    PathMatcher pm(m, p, pr.path, inner, siw);
    for (size_t i = 0; i < patterns.patterns.size(); ++i) {
      auto s0 = Clock::now();
      auto r = pm.match(patterns.patterns[i], i, true);
      ReportLine l{pr.path.path_id, std::to_string(i), PathVerdict::Safe, {}, 0};
      if (!r.sites.empty()) {
        l.verdict = PathVerdict::Unsafe;
        l.site = r.sites.front().indices;
        pr.verdict = PathVerdict::Unsafe;
        pr.sites.push_back(std::move(r.sites.front()));
      } else if (!r.unknown.empty()) {
        l.verdict = PathVerdict::Unknown;
        if (pr.verdict == PathVerdict::Safe) pr.verdict = PathVerdict::Unknown;
      }
      l.time_ms = ms_since(s0);
      lines[k].push_back(std::move(l));
    }
    pr.time_ms = ms_since(p0);
  });
  for (auto& ls : lines)
    for (auto& l : ls) rep.lines.push_back(std::move(l));
  rep.verdict = merge(rep.paths);
  rep.total_ms = ms_since(t0);
  return rep;
}

AnalysisReport analyze_hyper(const ModelPtr& m, const NIProperty& p, const Program& program, int depth,
                             const SearchBudget& b) {
  auto t0 = Clock::now();
  AnalysisReport rep;
  auto paths = unroll(program, depth);
  rep.paths.resize(paths.size());
  SearchBudget inner = b;
  if (b.jobs > 1 && paths.size() > 1) inner.jobs = 1;
  for_each_parallel(paths.size(), b.jobs, [&](size_t k) {
    auto p0 = Clock::now();
    PathReport& pr = rep.paths[k];
    pr.path = paths[k];
    auto h = check_program_hyper(m, p, pr.path.instructions, pr.path.assumptions, inner);
    switch (h.verdict) {
      case HyperVerdict::Safe: pr.verdict = pr.path.truncated ? PathVerdict::Unknown : PathVerdict::Safe; break;
      case HyperVerdict::Unsafe: pr.verdict = PathVerdict::Unsafe; break;
      case HyperVerdict::Inconclusive: pr.verdict = PathVerdict::Unknown; break;
    }
    pr.witness = std::move(h.witness);
    pr.time_ms = ms_since(p0);
  });
  for (const auto& pr : rep.paths) rep.lines.push_back({pr.path.path_id, "hyper", pr.verdict, {}, pr.time_ms});
  rep.verdict = merge(rep.paths);
  rep.total_ms = ms_since(t0);
  return rep;
}

std::vector<std::set<size_t>> extract_skeletons(const PlatformModel&, const Trace& t, size_t k) {
  std::vector<std::set<size_t>> out;
  if (k == 0) return out;
  for (size_t i = 0; i < t.steps.size(); ++i) {
    auto c = dependency_closure(t, {i});
    if (c.size() > k) continue;
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(std::move(c));
  }
  return out;
}

OracleResult kcompleteness_oracle(const ModelPtr& m, const NIProperty& p, const PatternSet& patterns, int d,
                                  const SearchBudget& b) {
  if (d > patterns.provenance.depth)
    throw Error(fmt::format("oracle depth {} exceeds the generation depth {}", d, patterns.provenance.depth));
  OracleResult r;
  if (d <= 0) return r;
  int siw = model_index_width(*m);
  if (int g = grammar_by_id(patterns.provenance.grammar).set_index_width; g > 0) siw = g;
  std::vector<Template> layer = {{}};
  for (int len = 1; len <= d; ++len) {
    std::vector<Template> next;
    for (const auto& t : layer)
      for (Opcode op : m->opcodes()) {
        Template u = t;
        u.push_back(op);
        next.push_back(std::move(u));
      }
    layer = std::move(next);
    for (const auto& t : layer) {
      ++r.templates_checked;
      std::vector<size_t> pos(t.size());
      for (size_t i = 0; i < pos.size(); ++i) pos[i] = i;
      std::vector<Formula> uncovered;
      for (const auto& pt : patterns.patterns)
        if (pt.tmpl == t) uncovered.push_back(Formula::lnot(Formula::of(pt.constraint, pos)));
      SessionOptions o;
      o.set_index_width = siw;
      auto s = open_session(m, p, Code::from_template(t), o, b);
      auto c = s->check(Formula::all(std::move(uncovered)));
      if (c.verdict == Verdict::Unknown) {
        r.status = OracleStatus::Inconclusive;
        continue;
      }
      if (c.verdict == Verdict::Found) {
        r.status = OracleStatus::Counterexample;
        r.counterexample = std::move(c.witness);
        return r;
      }
    }
  }
  return r;
}

}  // namespace sempat
