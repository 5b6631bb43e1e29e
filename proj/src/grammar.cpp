#include "sempat/grammar.hpp"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>

namespace sempat {

namespace {

struct PredInfo {
  Pred id;
  const char* name;
  int arity;
  PredKind kind;
  bool reg;
};

constexpr PredInfo kPreds[] = {
    {Pred::DataDep, "datadep", 2, PredKind::Structural, false},
    {Pred::AddrDep, "addrdep", 2, PredKind::Structural, false},
    {Pred::SameAddr, "sameaddr", 2, PredKind::Structural, false},
    {Pred::DiffAddr, "diffaddr", 2, PredKind::Structural, false},
    {Pred::DiffIndex, "diffindex", 2, PredKind::Structural, false},
    {Pred::SrcData, "srcdata_reg", 1, PredKind::Structural, true},
    {Pred::SrcAddr, "srcaddr_reg", 1, PredKind::Structural, true},
    {Pred::DestReg, "destreg_reg", 1, PredKind::Structural, true},
    {Pred::Speculative, "speculative", 1, PredKind::Speculative, false},
    {Pred::LowOperands, "lowoperands", 1, PredKind::Relational, false},
    {Pred::LowResult, "lowresult", 1, PredKind::Relational, false},
    {Pred::HighOperands, "highoperands", 1, PredKind::Relational, false},
    {Pred::HighResult, "highresult", 1, PredKind::Relational, false},
};

const PredInfo& info(Pred p) { return kPreds[static_cast<int>(p)]; }

PredicateDef def_of(Pred p) {
  const auto& i = info(p);
  return PredicateDef{i.id, i.name, i.arity, i.kind, i.reg};
}

int parse_num(std::string_view s, std::string_view ctx) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) throw Error(fmt::format("bad atom '{}'", ctx));
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  return s;
}

bool reg_source(OpKind k) { return k != OpKind::Synth; }

}  // namespace

const PredicateDef* Grammar::find(std::string_view name) const {
  for (const auto& p : preds)
    if (p.name == name) return &p;
  return nullptr;
}

bool Grammar::has(Pred p) const {
  return std::any_of(preds.begin(), preds.end(), [&](const PredicateDef& d) { return d.id == p; });
}

Grammar default_grammar() {
  Grammar g;
  g.id = "default";
  for (Pred p : {Pred::DataDep, Pred::AddrDep, Pred::SameAddr, Pred::DiffAddr, Pred::SrcData, Pred::SrcAddr,
                 Pred::DestReg, Pred::Speculative, Pred::LowOperands, Pred::LowResult, Pred::HighOperands,
                 Pred::HighResult})
    g.preds.push_back(def_of(p));
  return g;
}

Grammar diffindex_grammar(int set_index_width) {
  if (set_index_width < 1) throw Error("set_index_width must be >= 1");
  Grammar g = default_grammar();
  g.id = fmt::format("diffindex:{}", set_index_width);
  g.set_index_width = set_index_width;
  auto at = std::find_if(g.preds.begin(), g.preds.end(), [](const PredicateDef& d) { return d.id == Pred::DiffAddr; });
  g.preds.insert(at + 1, def_of(Pred::DiffIndex));
  return g;
}

Grammar grammar_by_id(std::string_view id) {
  if (id == "default") return default_grammar();
  constexpr std::string_view pre = "diffindex:";
  if (id.substr(0, pre.size()) == pre) {
    auto num = id.substr(pre.size());
    int w = 0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), w);
    if (ec == std::errc() && ptr == num.data() + num.size()) return diffindex_grammar(w);
  }
  throw Error(fmt::format("unknown grammar '{}'", id));
}

const std::string& pred_name(Pred p) {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& i : kPreds) v.push_back(i.name);
    return v;
  }();
  return names[static_cast<int>(p)];
}

PredKind pred_kind(Pred p) { return info(p).kind; }

std::string render_atom(const Atom& a) {
  if (a.reg >= 0) return fmt::format("{}({},r{})", pred_name(a.pred), a.args[0], a.reg);
  if (a.args[1] >= 0) return fmt::format("{}({},{})", pred_name(a.pred), a.args[0], a.args[1]);
  return fmt::format("{}({})", pred_name(a.pred), a.args[0]);
}

Atom parse_atom(const Grammar& g, std::string_view text) {
  text = trim(text);
  auto lp = text.find('(');
  if (lp == std::string_view::npos || text.back() != ')') throw Error(fmt::format("bad atom '{}'", text));
  auto name = trim(text.substr(0, lp));
  const PredicateDef* def = g.find(name);
  if (!def) throw Error(fmt::format("unknown predicate '{}'", name));
  auto body = text.substr(lp + 1, text.size() - lp - 2);
  std::vector<std::string_view> parts;
  while (true) {
    auto c = body.find(',');
    parts.push_back(trim(body.substr(0, c)));
    if (c == std::string_view::npos) break;
    body.remove_prefix(c + 1);
  }
  Atom a;
  a.pred = def->id;
  size_t want = def->arity + (def->reg ? 1 : 0);
  if (parts.size() != want) throw Error(fmt::format("wrong argument count in '{}'", text));
  for (int k = 0; k < def->arity; ++k) a.args[k] = parse_num(parts[k], text);
  if (def->reg) {
    auto r = parts.back();
    if (r.empty() || r[0] != 'r') throw Error(fmt::format("bad register in '{}'", text));
    a.reg = parse_num(r.substr(1), text);
  }
  if (a.args[0] < 0 || (def->arity == 2 && a.args[1] <= a.args[0]))
    throw Error(fmt::format("positions must be increasing in '{}'", text));
  return a;
}

Atom remap(const Atom& a, const std::vector<size_t>& positions) {
  Atom r = a;
  for (int k = 0; k < 2; ++k)
    if (a.args[k] >= 0) r.args[k] = static_cast<int>(positions.at(a.args[k]));
  return r;
}

std::string render_constraint(const Constraint& c) {
  if (c.empty()) return "true";
  std::string out;
  for (const auto& a : c) out += (out.empty() ? "" : "; ") + render_atom(a);
  return out;
}

bool applicable(const PlatformModel& m, const std::vector<Opcode>& t, const Atom& a) {
  int n = static_cast<int>(t.size());
  if (a.args[0] < 0 || a.args[0] >= n) return false;
  if (a.arity() == 2 && (a.args[1] <= a.args[0] || a.args[1] >= n)) return false;
  OpKind k1 = t[a.args[0]].kind;
  OpKind k2 = a.arity() == 2 ? t[a.args[1]].kind : k1;
  bool regs_ok = a.reg < 0 || a.reg < m.machine().register_count;
  switch (a.pred) {
    case Pred::DataDep:
      if (k1 == OpKind::Synth) return k2 == OpKind::Synth && t[a.args[0]].index + 1 == t[a.args[1]].index;
      return detail::has_dest_reg(k1) && k2 != OpKind::Synth;
    case Pred::AddrDep: return detail::has_dest_reg(k1) && is_memory(k2);
    case Pred::SameAddr:
    case Pred::DiffAddr:
    case Pred::DiffIndex: return is_memory(k1) && is_memory(k2);
    case Pred::SrcData:
      return regs_ok && (k1 == OpKind::Mul || k1 == OpKind::Alu || k1 == OpKind::St || k1 == OpKind::Br);
    case Pred::SrcAddr: return regs_ok && is_memory(k1);
    case Pred::DestReg: return regs_ok && detail::has_dest_reg(k1);
    case Pred::Speculative: return m.is_initiator(t[a.args[0]]);
    case Pred::LowOperands:
    case Pred::HighOperands: return reg_source(k1);
    case Pred::LowResult:
    case Pred::HighResult: return detail::has_dest_reg(k1);
  }
  return false;
}

std::vector<Atom> apply_predicates(const PlatformModel& m, const std::vector<Opcode>& t, const Grammar& g) {
  std::vector<Atom> out;
  int n = static_cast<int>(t.size());
  for (const auto& def : g.preds) {
    if (def.arity == 2) {
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          Atom a{def.id, {i, j}, -1};
          if (applicable(m, t, a)) out.push_back(a);
        }
    } else {
      for (int i = 0; i < n; ++i) {
        if (def.reg) {
          for (int r = 0; r < m.machine().register_count; ++r) {
            Atom a{def.id, {i, -1}, r};
            if (applicable(m, t, a)) out.push_back(a);
          }
        } else {
          Atom a{def.id, {i, -1}, -1};
          if (applicable(m, t, a)) out.push_back(a);
        }
      }
    }
  }
  return out;
}

Formula Formula::of(const Constraint& c, const std::vector<size_t>& positions) {
  std::vector<Formula> kids;
  for (const auto& a : c) kids.push_back(leaf(remap(a, positions)));
  return all(std::move(kids));
}

ExecView<Conc> make_view(const EvalContext& c) {
  if (!c.model || !c.t1) throw Error("evaluation context needs a model and a trace");
  const auto& m = *c.model;
  int w = m.machine().word_width;
  ExecView<Conc> v;
  v.has_pair = c.t2 != nullptr;
  v.set_index_width = c.set_index_width;
  auto conv = [&](const StepRecord& r) {
    StepOut<Conc> o;
    o.initiated = r.initiated;
    o.rolled_back = r.rolled_back;
    for (uint32_t x : r.src) o.src.push_back(CWord{x, static_cast<uint8_t>(w)});
    if (r.result) o.result = CWord{*r.result, static_cast<uint8_t>(w)};
    if (r.addr) o.addr = CWord{*r.addr, static_cast<uint8_t>(w)};
    return o;
  };
  for (size_t i = 0; i < c.t1->instrs.size(); ++i) {
    v.ops.push_back(c.t1->instrs[i].op);
    v.ins.push_back(m.lower(c.t1->instrs[i]));
    v.out1.push_back(conv(c.t1->steps.at(i)));
    v.out2.push_back(c.t2 ? conv(c.t2->steps.at(i)) : StepOut<Conc>{});
  }
  return v;
}

bool eval_atom(const Atom& a, const std::vector<size_t>& positions, const EvalContext& c) {
  Conc d;
  return encode_atom(d, make_view(c), remap(a, positions));
}

bool eval_constraint(const Constraint& k, const std::vector<size_t>& positions, const EvalContext& c) {
  if (k.empty()) return true;
  Conc d;
  auto v = make_view(c);
  for (const auto& a : k)
    if (!encode_atom(d, v, remap(a, positions))) return false;
  return true;
}

bool eval_formula(const Formula& f, const EvalContext& c) {
  Conc d;
  return encode_formula(d, make_view(c), f);
}

}  // namespace sempat
