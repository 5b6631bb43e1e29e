#include "sempat/patterns.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <sstream>
#include <thread>

#include <fmt/format.h>

namespace sempat {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::vector<size_t> identity(size_t n) {
  std::vector<size_t> v(n);
  for (size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

int session_index_width(const PlatformModel& m, const Grammar& g) {
  if (g.set_index_width > 0) return g.set_index_width;
  auto it = m.params().find("set_index_width");
  return it == m.params().end() ? 0 : std::stoi(it->second);
}

std::string trim(std::string_view s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

}  // namespace

std::string render_template(const Template& t) {
  std::string out;
  for (const auto& op : t) out += (out.empty() ? "" : " ") + op.name();
  return out;
}

Template parse_template(std::string_view text) {
  Template t;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) t.push_back(Opcode::parse(tok));
  if (t.empty()) throw Error("empty template");
  return t;
}

std::string template_status_name(TemplateStatus s) {
  switch (s) {
    case TemplateStatus::TaintRejected: return "taint-rejected";
    case TemplateStatus::SemanticRejected: return "semantic-rejected";
    case TemplateStatus::Accepted: return "accepted";
    case TemplateStatus::Inconclusive: return "inconclusive";
  }
  return "?";
}

const TemplateRecord* TemplateReport::find(const Template& t) const {
  for (const auto& r : records)
    if (r.tmpl == t) return &r;
  return nullptr;
}

TemplateReport generate_templates(const ModelPtr& m, const NIProperty& p, int d, const SearchBudget& b) {
  if (d < 1) throw Error("depth must be >= 1");
  TemplateReport rep;
  // Recursion extends by prepending; the taint check gates emission only.
  auto helper = [&](auto&& self, const Template& w) -> void {
    if (static_cast<int>(w.size()) >= d) return;
    for (Opcode op : m->opcodes()) {
      Template t;
      t.push_back(op);
      t.insert(t.end(), w.begin(), w.end());
      auto t0 = Clock::now();
      TemplateRecord rec{t, TemplateStatus::TaintRejected, 0};
      if (taint_propagates(*m, p, t)) {
        auto s = open_session(m, p, Code::from_template(t), SessionOptions{}, b);
        switch (s->check(Formula::truth()).verdict) {
          case Verdict::Found: rec.status = TemplateStatus::Accepted; break;
          case Verdict::None: rec.status = TemplateStatus::SemanticRejected; break;
          case Verdict::Unknown: rec.status = TemplateStatus::Inconclusive; break;
        }
      }
      rec.time_ms = ms_since(t0);
      if (rec.status == TemplateStatus::Accepted) rep.accepted.push_back(t);
      rep.records.push_back(std::move(rec));
      self(self, t);
    }
  };
  helper(helper, {});
  std::sort(rep.accepted.begin(), rep.accepted.end(), [](const Template& a, const Template& c) {
    if (a.size() != c.size()) return a.size() < c.size();
    return a < c;
  });
  return rep;
}

namespace {

class Specializer {
 public:
  Specializer(const ModelPtr& m, const NIProperty& p, const Template& t, const Grammar& g, const SearchBudget& b,
              const SpecializeOptions& o)
      : t_(t), o_(o), pos_(identity(t.size())) {
    SessionOptions so;
    so.set_index_width = session_index_width(*m, g);
    session_ = open_session(m, p, Code::from_template(t), so, b);
    atoms_ = apply_predicates(*m, t, g);
  }

  std::vector<Pattern> run(SpecializeStats& st) {
    helper({}, 0, st);
    std::vector<Constraint> out;
    for (auto& c : acc_)
      if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(std::move(c));
    if (o_.prune_siblings && out.size() > 1) {
      for (size_t k = 0; k < out.size() && out.size() > 1;) {
        std::vector<Formula> f = {phi(out[k])};
        for (size_t q = 0; q < out.size(); ++q)
          if (q != k) f.push_back(Formula::lnot(phi(out[q])));
        if (blocked(Formula::all(std::move(f)))) {
          out.erase(out.begin() + k);
          ++st.sibling_pruned;
        } else {
          ++k;
        }
      }
    }
    st.queries = session_->queries();
    std::vector<Pattern> ps;
    for (auto& c : out) ps.push_back(Pattern{t_, std::move(c)});
    return ps;
  }

 private:
  Formula phi(const Constraint& c) const { return Formula::of(c, pos_); }
  Formula neg(size_t k) const { return Formula::lnot(Formula::leaf(atoms_[k])); }

  // No violating execution satisfies f.
  bool blocked(const Formula& f) {
    auto r = session_->check(f);
    if (r.verdict == Verdict::Unknown)
      throw Inconclusive(fmt::format("engine budget exhausted while specializing {}", render_template(t_)));
    return r.verdict == Verdict::None;
  }

  void helper(const Constraint& c, size_t i, SpecializeStats& st) {
    if (i >= atoms_.size()) {
      acc_.push_back(c);
      return;
    }
    Formula base = phi(c);
    if (blocked(Formula::all({base, neg(i)}))) {
      Constraint next = c;
      next.push_back(atoms_[i]);
      helper(next, i + 1, st);
      return;
    }
    for (int w = 2; w <= o_.max_branch && i + w <= atoms_.size(); ++w) {
      std::vector<Formula> f = {base};
      for (int k = 0; k < w; ++k) f.push_back(neg(i + k));
      if (!blocked(Formula::all(std::move(f)))) continue;
      ++st.branch_events;
      std::vector<Constraint> live;
      for (int k = 0; k < w; ++k) {
        Constraint next = c;
        next.push_back(atoms_[i + k]);
        if (blocked(phi(next)))
          ++st.vacuous_branches;
        else
          live.push_back(std::move(next));
      }
      if (live.size() >= 2) ++st.productive_branches;
      for (const auto& next : live) helper(next, i + w, st);
      return;
    }
    helper(c, i + 1, st);
  }

  Template t_;
  SpecializeOptions o_;
  std::vector<size_t> pos_;
  std::unique_ptr<Session> session_;
  std::vector<Atom> atoms_;
  std::vector<Constraint> acc_;
};

}  // namespace

std::vector<Pattern> constraint_specialize(const ModelPtr& m, const NIProperty& p, const Template& t,
                                           const Grammar& g, const SearchBudget& b, const SpecializeOptions& o,
                                           SpecializeStats* stats) {
  if (o.max_branch < 1 || o.max_branch > 3) throw Error("max_branch must be in 1..3");
  SpecializeStats st;
  auto out = Specializer(m, p, t, g, b, o).run(st);
  if (stats) *stats = st;
  return out;
}

int GenerationReport::branch_events() const {
  int n = 0;
  for (const auto& s : specialized) n += s.stats.branch_events;
  return n;
}

int GenerationReport::productive_branches() const {
  int n = 0;
  for (const auto& s : specialized) n += s.stats.productive_branches;
  return n;
}

std::string engine_fingerprint(const SearchBudget& b, const SpecializeOptions& o) {
  std::string e = b.engine == EngineKind::Sat ? "sat" : fmt::format("enum max_pairs={}", b.max_pairs);
  return fmt::format("{} max_branch={} prune={}", e, o.max_branch, o.prune_siblings ? 1 : 0);
}

PatternSet generate_patterns(const ModelPtr& m, const NIProperty& p, const Grammar& g, const GenerateOptions& o,
                             const SearchBudget& b, GenerationReport* report) {
  auto t0 = Clock::now();
  GenerationReport rep;
  rep.templates = generate_templates(m, p, o.depth, b);
  PatternSet out;
  out.provenance = {m->fingerprint(), describe_property(*m, p), g.id, o.depth, engine_fingerprint(b, o.specialize),
                    false};
  for (const auto& r : rep.templates.records) {
    if (r.status != TemplateStatus::Inconclusive) continue;
    if (!o.allow_partial)
      throw Inconclusive(fmt::format("template {} could not be decided", render_template(r.tmpl)));
    out.provenance.partial = true;
  }

  const auto& ts = rep.templates.accepted;
  std::vector<std::vector<Pattern>> per(ts.size());
  rep.specialized.resize(ts.size());
  std::vector<std::string> errors(ts.size());
  int jobs = std::max(1, std::min<int>(b.jobs, static_cast<int>(ts.size())));
  SearchBudget inner = b;
  if (jobs > 1) inner.jobs = 1;
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t k; (k = next++) < ts.size();) {
      auto s0 = Clock::now();
      auto& oc = rep.specialized[k];
      oc.tmpl = ts[k];
      try {
        per[k] = constraint_specialize(m, p, ts[k], g, inner, o.specialize, &oc.stats);
      } catch (const Inconclusive& e) {
        oc.inconclusive = true;
        errors[k] = e.what();
      }
      oc.patterns = per[k].size();
      oc.time_ms = ms_since(s0);
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> th;
    for (int j = 0; j < jobs; ++j) th.emplace_back(worker);
    for (auto& t : th) t.join();
  }
  for (size_t k = 0; k < ts.size(); ++k) {
    if (rep.specialized[k].inconclusive) {
      if (!o.allow_partial) throw Inconclusive(errors[k]);
      out.provenance.partial = true;
    }
    for (auto& pt : per[k])
      if (std::find(out.patterns.begin(), out.patterns.end(), pt) == out.patterns.end())
        out.patterns.push_back(std::move(pt));
  }
  rep.total_ms = ms_since(t0);
  if (report) *report = std::move(rep);
  return out;
}

std::string serialize_patterns(const PatternSet& s) {
  const auto& pv = s.provenance;
  std::string out = "sempat-patterns v1\n";
  out += fmt::format("model: {}\nproperty: {}\ngrammar: {}\ndepth: {}\nengine: {}\npartial: {}\n", pv.model,
                     pv.property, pv.grammar, pv.depth, pv.engine, pv.partial ? 1 : 0);
  for (const auto& p : s.patterns)
    out += fmt::format("\ntemplate: {}\natoms: {}\n", render_template(p.tmpl), render_constraint(p.constraint));
  return out;
}

PatternSet parse_patterns(std::string_view text) {
  PatternSet s;
  std::vector<std::string> lines;
  {
    std::istringstream in{std::string(text)};
    for (std::string l; std::getline(in, l);) lines.push_back(l);
  }
  size_t i = 0;
  auto skip_blank = [&] {
    while (i < lines.size() && trim(lines[i]).empty()) ++i;
  };
  skip_blank();
  if (i >= lines.size()) throw ParseError(1, "empty pattern file");
  if (trim(lines[i]) != "sempat-patterns v1") {
    if (trim(lines[i]).rfind("sempat-patterns", 0) == 0)
      throw ParseError(static_cast<int>(i + 1), fmt::format("unsupported version '{}'", trim(lines[i])));
    throw ParseError(static_cast<int>(i + 1), "missing 'sempat-patterns v1' header");
  }
  ++i;
  auto field = [&](std::string_view key) -> std::string {
    if (i >= lines.size()) throw ParseError(static_cast<int>(i + 1), fmt::format("missing '{}' line", key));
    const std::string& l = lines[i];
    std::string pre = std::string(key) + ":";
    if (l.rfind(pre, 0) != 0) throw ParseError(static_cast<int>(i + 1), fmt::format("expected '{}:'", key));
    ++i;
    return trim(std::string_view(l).substr(pre.size()));
  };
  auto& pv = s.provenance;
  pv.model = field("model");
  pv.property = field("property");
  pv.grammar = field("grammar");
  int line = static_cast<int>(i + 1);
  auto depth = field("depth");
  try {
    size_t used = 0;
    pv.depth = std::stoi(depth, &used);
    if (used != depth.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw ParseError(line, fmt::format("bad depth '{}'", depth));
  }
  pv.engine = field("engine");
  line = static_cast<int>(i + 1);
  auto partial = field("partial");
  if (partial != "0" && partial != "1") throw ParseError(line, "partial must be 0 or 1");
  pv.partial = partial == "1";
  if (pv.model.empty() || pv.property.empty() || pv.grammar.empty() || pv.engine.empty())
    throw ParseError(line, "empty provenance field");
  Grammar g;
  try {
    g = grammar_by_id(pv.grammar);
  } catch (const Error& e) {
    throw ParseError(3, e.what());
  }
  for (skip_blank(); i < lines.size(); skip_blank()) {
    Pattern p;
    line = static_cast<int>(i + 1);
    try {
      p.tmpl = parse_template(field("template"));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(line, e.what());
    }
    line = static_cast<int>(i + 1);
    auto atoms = field("atoms");
    if (atoms != "true") {
      size_t a = 0;
      while (a <= atoms.size()) {
        size_t b = atoms.find(';', a);
        if (b == std::string::npos) b = atoms.size();
        auto tok = trim(std::string_view(atoms).substr(a, b - a));
        try {
          Atom at = parse_atom(g, tok);
          if (at.args[0] >= static_cast<int>(p.tmpl.size()) || at.args[1] >= static_cast<int>(p.tmpl.size()))
            throw Error(fmt::format("atom '{}' outside template", tok));
          if (std::find(p.constraint.begin(), p.constraint.end(), at) != p.constraint.end())
            throw Error(fmt::format("duplicate atom '{}'", tok));
          p.constraint.push_back(at);
        } catch (const Error& e) {
          throw ParseError(line, e.what());
        }
        a = b + 1;
      }
    }
    s.patterns.push_back(std::move(p));
  }
  return s;
}

std::vector<std::vector<size_t>> embeddings(const Template& t, const std::vector<Opcode>& ops) {
  std::vector<std::vector<size_t>> out;
  std::vector<size_t> cur;
  auto rec = [&](auto&& self, size_t from) -> void {
    if (cur.size() == t.size()) {
      out.push_back(cur);
      return;
    }
    size_t need = t.size() - cur.size();
    for (size_t j = from; j + need <= ops.size(); ++j) {
      if (ops[j] != t[cur.size()]) continue;
      cur.push_back(j);
      self(self, j + 1);
      cur.pop_back();
    }
  };
  if (!t.empty()) rec(rec, 0);
  return out;
}

}  // namespace sempat
