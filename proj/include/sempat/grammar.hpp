#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "sempat/platform.hpp"

namespace sempat {

enum class Pred : uint8_t {
  DataDep,
  AddrDep,
  SameAddr,
  DiffAddr,
  DiffIndex,
  SrcData,
  SrcAddr,
  DestReg,
  Speculative,
  LowOperands,
  LowResult,
  HighOperands,
  HighResult,
};

enum class PredKind { Structural, Relational, Speculative };

struct PredicateDef {
  Pred id;
  std::string name;
  int arity = 1;
  PredKind kind = PredKind::Structural;
  bool reg = false;
};

struct Grammar {
  std::string id;
  std::vector<PredicateDef> preds;
  int set_index_width = 0;

  const PredicateDef* find(std::string_view name) const;
  bool has(Pred p) const;
};

Grammar default_grammar();
Grammar diffindex_grammar(int set_index_width);
// Inverse of Grammar::id: "default" or "diffindex:N".
Grammar grammar_by_id(std::string_view id);
const std::string& pred_name(Pred p);
PredKind pred_kind(Pred p);

// args are template positions (or program indices once remapped); reg is set for *_reg predicates.
struct Atom {
  Pred pred = Pred::DataDep;
  std::array<int, 2> args{-1, -1};
  int reg = -1;

  int arity() const { return args[1] < 0 ? 1 : 2; }
  auto operator<=>(const Atom&) const = default;
};

std::string render_atom(const Atom& a);
Atom parse_atom(const Grammar& g, std::string_view text);
Atom remap(const Atom& a, const std::vector<size_t>& positions);

using Constraint = std::vector<Atom>;
std::string render_constraint(const Constraint& c);

bool applicable(const PlatformModel& m, const std::vector<Opcode>& tmpl, const Atom& a);
// Every type-compatible atom, ordered by grammar order, then positions, then register.
std::vector<Atom> apply_predicates(const PlatformModel& m, const std::vector<Opcode>& tmpl, const Grammar& g);

// Boolean combination of atoms over program indices.
struct Formula {
  enum Op { True, False, Leaf, Not, And, Or } op = True;
  Atom atom;
  std::vector<Formula> kids;

  static Formula truth() { return {}; }
  static Formula leaf(const Atom& a) { return {Leaf, a, {}}; }
  static Formula lnot(Formula f) { return {Not, {}, {std::move(f)}}; }
  static Formula all(std::vector<Formula> fs) { return {And, {}, std::move(fs)}; }
  static Formula any(std::vector<Formula> fs) { return {Or, {}, std::move(fs)}; }
  static Formula of(const Constraint& c, const std::vector<size_t>& positions);
};

// Per-instruction view of one execution pair, shared by concrete evaluation and symbolic encoding.
template <class D>
struct ExecView {
  std::vector<Opcode> ops;
  std::vector<InstT<D>> ins;
  std::vector<StepOut<D>> out1, out2;
  bool has_pair = true;
  int set_index_width = 0;
};

namespace detail {

inline bool has_dest_reg(OpKind k) { return k == OpKind::Ld || k == OpKind::Mul || k == OpKind::Alu; }

template <class D>
typename D::Bool writes_reg(D& d, const ExecView<D>& v, size_t k, const typename D::Word& r) {
  if (!has_dest_reg(v.ops[k].kind)) return d.ff();
  return d.eq(v.ins[k].rd, r);
}

// Last write to register r before instruction b is by instruction a.
template <class D>
typename D::Bool last_write_by(D& d, const ExecView<D>& v, size_t a, size_t b, const typename D::Word& r) {
  auto x = writes_reg(d, v, a, r);
  for (size_t k = a + 1; k < b; ++k) x = d.land(x, d.lnot(writes_reg(d, v, k, r)));
  return x;
}

template <class D>
typename D::Bool all_equal(D& d, const std::vector<typename D::Word>& a, const std::vector<typename D::Word>& b) {
  auto x = d.tt();
  for (size_t i = 0; i < a.size() && i < b.size(); ++i) x = d.land(x, d.eq(a[i], b[i]));
  return x;
}

}  // namespace detail

template <class D>
typename D::Bool encode_atom(D& d, const ExecView<D>& v, const Atom& a) {
  using detail::last_write_by;
  size_t i = a.args[0], j = a.args[1] < 0 ? 0 : a.args[1];
  if (i >= v.ops.size() || (a.arity() == 2 && j >= v.ops.size())) throw Error("atom position outside program");
  OpKind ki = v.ops[i].kind;
  auto need_pair = [&] {
    if (!v.has_pair) throw Error("relational atom needs a trace pair");
  };
  switch (a.pred) {
    case Pred::DataDep: {
      if (ki == OpKind::Synth) {
        if (v.ops[j].kind != OpKind::Synth || v.ops[i].index + 1 != v.ops[j].index) return d.ff();
        for (size_t k = i + 1; k < j; ++k)
          if (v.ops[k] == v.ops[i]) return d.ff();
        return d.tt();
      }
      Roles r = roles(v.ops[j].kind);
      auto x = d.ff();
      if (r.rs1) x = d.lor(x, last_write_by(d, v, i, j, v.ins[j].rs1));
      if (r.rs2) x = d.lor(x, last_write_by(d, v, i, j, v.ins[j].rs2));
      return x;
    }
    case Pred::AddrDep:
      if (!is_memory(v.ops[j].kind)) return d.ff();
      return last_write_by(d, v, i, j, v.ins[j].rs1);
    case Pred::SameAddr:
    case Pred::DiffAddr: {
      if (!v.out1[i].addr || !v.out1[j].addr) return d.ff();
      auto eq = d.eq(*v.out1[i].addr, *v.out1[j].addr);
      return a.pred == Pred::SameAddr ? eq : d.lnot(eq);
    }
    case Pred::DiffIndex: {
      if (!v.out1[i].addr || !v.out1[j].addr) return d.ff();
      int hi = v.set_index_width + 1;
      return d.lnot(d.eq(d.slice(*v.out1[i].addr, 2, hi), d.slice(*v.out1[j].addr, 2, hi)));
    }
    case Pred::SrcData: {
      const auto& in = v.ins[i];
      switch (ki) {
        case OpKind::Mul:
        case OpKind::Alu: return d.lor(d.eqc(in.rs1, a.reg), d.eqc(in.rs2, a.reg));
        case OpKind::St: return d.eqc(in.rs2, a.reg);
        case OpKind::Br: return d.eqc(in.rs1, a.reg);
        default: return d.ff();
      }
    }
    case Pred::SrcAddr: return is_memory(ki) ? d.eqc(v.ins[i].rs1, a.reg) : d.ff();
    case Pred::DestReg: return detail::has_dest_reg(ki) ? d.eqc(v.ins[i].rd, a.reg) : d.ff();
    case Pred::Speculative: return v.out1[i].initiated;
    case Pred::LowOperands:
    case Pred::HighOperands: {
      need_pair();
      auto eq = detail::all_equal(d, v.out1[i].src, v.out2[i].src);
      return a.pred == Pred::LowOperands ? eq : d.lnot(eq);
    }
    case Pred::LowResult:
    case Pred::HighResult: {
      need_pair();
      if (!v.out1[i].result || !v.out2[i].result) return a.pred == Pred::LowResult ? d.tt() : d.ff();
      auto eq = d.eq(*v.out1[i].result, *v.out2[i].result);
      return a.pred == Pred::LowResult ? eq : d.lnot(eq);
    }
  }
  return d.ff();
}

template <class D>
typename D::Bool encode_formula(D& d, const ExecView<D>& v, const Formula& f) {
  switch (f.op) {
    case Formula::True: return d.tt();
    case Formula::False: return d.ff();
    case Formula::Leaf: return encode_atom(d, v, f.atom);
    case Formula::Not: return d.lnot(encode_formula(d, v, f.kids.at(0)));
    case Formula::And: {
      auto x = d.tt();
      for (const auto& k : f.kids) x = d.land(x, encode_formula(d, v, k));
      return x;
    }
    case Formula::Or: {
      auto x = d.ff();
      for (const auto& k : f.kids) x = d.lor(x, encode_formula(d, v, k));
      return x;
    }
  }
  return d.ff();
}

// Concrete evaluation context: a program with one trace (structural atoms) or a pair (all atoms).
struct EvalContext {
  const PlatformModel* model = nullptr;
  const Trace* t1 = nullptr;
  const Trace* t2 = nullptr;
  int set_index_width = 0;
};

ExecView<Conc> make_view(const EvalContext& c);
bool eval_atom(const Atom& a, const std::vector<size_t>& positions, const EvalContext& c);
bool eval_constraint(const Constraint& k, const std::vector<size_t>& positions, const EvalContext& c);
bool eval_formula(const Formula& f, const EvalContext& c);

}  // namespace sempat
