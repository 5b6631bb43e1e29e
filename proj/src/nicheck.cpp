#include "sempat/nicheck.hpp"

#include <algorithm>
#include <atomic>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "sempat/cnf.hpp"

namespace sempat {

namespace {

constexpr const char* kEndLabel = "L";

Instruction make_instruction(Opcode op, uint32_t rd, uint32_t rs1, uint32_t rs2, uint32_t imm, uint32_t fn) {
  switch (op.kind) {
    case OpKind::Ld: return Instruction::ld(rd, imm, rs1);
    case OpKind::St: return Instruction::st(rs2, imm, rs1);
    case OpKind::Mul: return Instruction::mul(rd, rs1, rs2);
    case OpKind::Alu: return Instruction::alu(static_cast<AluFn>(fn), rd, rs1, rs2);
    case OpKind::Br: return Instruction::br(rs1, kEndLabel);
    case OpKind::Synth: return Instruction::synth(op.index);
  }
  throw Error("bad opcode");
}

}  // namespace

TaintState taint_step(const PlatformModel& m, const TaintState& t, Opcode op) {
  TaintState out = t;
  for (const auto& r : m.taint_rules(op)) {
    bool hit = std::any_of(r.reads.begin(), r.reads.end(), [&](int v) { return t.count(v) > 0; });
    if (hit) out.insert(r.writes.begin(), r.writes.end());
  }
  return out;
}

std::set<int> vars_of(const std::vector<VarRef>& refs) {
  std::set<int> out;
  for (const auto& r : refs) out.insert(r.var);
  return out;
}

bool taint_propagates(const PlatformModel& m, const std::vector<Opcode>& tmpl, const std::set<int>& v_sec,
                      const std::set<int>& v_obs) {
  TaintState t(v_sec.begin(), v_sec.end());
  for (Opcode op : tmpl) t = taint_step(m, t, op);
  return std::any_of(v_obs.begin(), v_obs.end(), [&](int v) { return t.count(v) > 0; });
}

bool taint_propagates(const PlatformModel& m, const NIProperty& p, const std::vector<Opcode>& tmpl) {
  // Secret sources are the variables with at least one free secret slot.
  auto plan = plan_slots(m, p);
  std::set<int> sec;
  for (size_t s = 0; s < plan.size(); ++s)
    if (plan[s].kind == SlotInit::Secret) sec.insert(m.layout().slot_var(static_cast<int>(s)));
  return taint_propagates(m, tmpl, sec, vars_of(p.v_obs));
}

namespace {

State random_state(const PlatformModel& m, std::mt19937_64& rng) {
  const auto& l = m.layout();
  State s = initial_state(m);
  for (int i = 0; i < l.num_slots(); ++i)
    if (l.var(l.slot_var(i)).cls != VarClass::Internal) s.v[i] = rng() & MachineConfig::mask(l.slot_width(i));
  return s;
}

bool wf(const PlatformModel& m, const State& s) {
  Conc d;
  return m.wellformed(d, m.to_conc(s));
}

void clear_valid(const PlatformModel& m, State& s) {
  const auto& l = m.layout();
  for (int id = 0; id < static_cast<int>(l.vars().size()); ++id) {
    const auto& v = l.var(id);
    int f = v.field_index("valid");
    if (v.kind != VarKind::Records || f < 0) continue;
    for (int e = 0; e < v.count; ++e) s.v[l.slot(id, e, f)] = 0;
  }
}

Instruction random_instruction(Opcode op, const MachineConfig& mc, std::mt19937_64& rng) {
  auto reg = [&] { return static_cast<uint32_t>(rng() % mc.register_count); };
  uint32_t imm = rng() & MachineConfig::mask(mc.immediate_width);
  return make_instruction(op, reg(), reg(), reg(), imm, static_cast<uint32_t>(rng() % kAluFnCount));
}

}  // namespace

TaintCheckReport taint_soundness_check(const ModelPtr& m, int trials, uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto& l = m->layout();
  std::vector<int> visible;
  for (int id = 0; id < static_cast<int>(l.vars().size()); ++id)
    if (l.var(id).cls != VarClass::Internal) visible.push_back(id);
  TaintCheckReport rep;
  for (int t = 0; t < trials; ++t) {
    ++rep.trials;
    size_t len = 1 + rng() % 4;
    std::vector<Opcode> tmpl;
    std::vector<Instruction> prog;
    for (size_t i = 0; i < len; ++i) {
      tmpl.push_back(m->opcodes()[rng() % m->opcodes().size()]);
      prog.push_back(random_instruction(tmpl.back(), m->machine(), rng));
    }
    std::set<int> sec;
    for (int id : visible)
      if (rng() % 3 == 0) sec.insert(id);
    if (sec.empty()) sec.insert(visible[rng() % visible.size()]);

    State s1;
    bool ok = false;
    for (int tries = 0; tries < 20 && !ok; ++tries) {
      s1 = random_state(*m, rng);
      ok = wf(*m, s1);
    }
    if (!ok) {
      clear_valid(*m, s1);
      if (!wf(*m, s1)) continue;
    }
    State s2;
    ok = false;
    for (int tries = 0; tries < 20 && !ok; ++tries) {
      s2 = s1;
      for (int i = 0; i < l.num_slots(); ++i)
        if (sec.count(l.slot_var(i)) && rng() % 2) s2.v[i] = rng() & MachineConfig::mask(l.slot_width(i));
      ok = wf(*m, s2);
    }
    if (!ok) continue;
    std::vector<bool> choices;
    for (size_t i = 0; i < len; ++i) choices.push_back(rng() % 2);
    ++rep.effective;
    auto t1 = run(*m, s1, prog, Mode::Full, choices);
    auto t2 = run(*m, s2, prog, Mode::Full, choices);
    TaintState taint(sec.begin(), sec.end());
    for (Opcode op : tmpl) taint = taint_step(*m, taint, op);
    for (int id : visible) {
      if (taint.count(id)) continue;
      bool same = true;
      for (int sl : l.slots_of(VarRef{id, -1})) same = same && t1.states.back().v[sl] == t2.states.back().v[sl];
      if (same) continue;
      ++rep.failures;
      if (rep.first_failure.empty()) {
        std::string ops;
        for (Opcode op : tmpl) ops += op.name() + " ";
        rep.first_failure = fmt::format("{}differs on untainted {}", ops, l.var(id).name);
      }
    }
  }
  return rep;
}

Code Code::from_template(const std::vector<Opcode>& t) {
  Code c;
  c.ops = t;
  c.fixed.assign(t.size(), std::nullopt);
  return c;
}

Code Code::from_program(const std::vector<Instruction>& p) {
  Code c;
  for (const auto& in : p) {
    c.ops.push_back(in.op);
    c.fixed.push_back(in);
  }
  return c;
}

namespace {

std::vector<uint32_t> reg_domain(const MachineConfig& mc, const OperandDomain& d) {
  std::vector<uint32_t> out;
  if (d.regs.empty()) {
    for (int r = 0; r < mc.register_count; ++r) out.push_back(r);
  } else {
    for (int r : d.regs)
      if (r >= 0 && r < mc.register_count) out.push_back(r);
  }
  return out;
}

std::vector<uint32_t> imm_domain(const MachineConfig& mc, const OperandDomain& d) {
  std::vector<uint32_t> out;
  if (d.imms.empty()) {
    for (uint32_t v = 0; v <= MachineConfig::mask(mc.immediate_width); ++v) out.push_back(v);
  } else {
    for (uint32_t v : d.imms)
      if (v <= MachineConfig::mask(mc.immediate_width)) out.push_back(v);
  }
  return out;
}

bool assumption_holds(const PlatformModel& m, const Trace& t, const BranchAssume& a) {
  const auto& in = t.instrs.at(a.index);
  const State& post = t.states.at(a.index + 1);
  bool cond = m.get(post, "regfile", in.rs1.value_or(0)) != 0;
  return cond == a.taken || post.spec;
}

// Runs the executions of a candidate and checks every session condition except initial-state membership.
bool admissible(const PlatformModel& m, const NIProperty& p, const SessionOptions& o, const Formula& extra,
                Witness& w, std::string* why) {
  auto fail = [&](const char* msg) {
    if (why) *why = msg;
    return false;
  };
  w.t1 = run(m, w.sigma1, w.program, Mode::Full, w.choices);
  w.t2 = run(m, w.sigma2, w.program, Mode::Full, w.choices);
  for (const auto& a : o.assumptions)
    if (!assumption_holds(m, w.t1, a) || !assumption_holds(m, w.t2, a)) return fail("branch assumption violated");
  if (o.require_violation) {
    if (p.variant == Variant::SNI) {
      w.t1ns = run(m, w.sigma1, w.program, Mode::Nonspec);
      w.t2ns = run(m, w.sigma2, w.program, Mode::Nonspec);
    }
    if (!violates(m, p, w.t1, w.t2, w.t1ns ? &*w.t1ns : nullptr, w.t2ns ? &*w.t2ns : nullptr))
      return fail("no violation");
  }
  EvalContext ctx{&m, &w.t1, &w.t2, o.set_index_width};
  if (!eval_formula(extra, ctx)) return fail("constraint not satisfied");
  return true;
}

std::vector<bool> initiator_choices(const PlatformModel& m, const std::vector<Instruction>& prog,
                                    const std::vector<bool>& per_position) {
  std::vector<bool> out;
  for (size_t i = 0; i < prog.size(); ++i)
    if (m.is_initiator(prog[i].op)) out.push_back(per_position[i]);
  return out;
}

class SatSession : public Session {
 public:
  SatSession(const ModelPtr& m, const NIProperty& p, const Code& code, const SessionOptions& o, const SearchBudget& b)
      : m_(m), p_(p), code_(code), o_(o), b_(b), br_(g_, s_) {
    const auto& mc = m->machine();
    const auto& l = m->layout();
    int rb = mc.reg_bits();
    std::vector<sym::Lit> base;
    auto regs = reg_domain(mc, b.operands);
    auto imms = imm_domain(mc, b.operands);
    auto member = [&](const sym::Bits& x, const std::vector<uint32_t>& dom) {
      std::vector<sym::Lit> alts;
      for (uint32_t v : dom) alts.push_back(d_.eqc(x, v));
      return g_.lor_all(alts);
    };
    for (size_t i = 0; i < code.size(); ++i) {
      InstT<Sym> in;
      in.op = code.ops[i];
      if (code.fixed[i]) {
        auto c = m->lower(*code.fixed[i]);
        in.rd = d_.wconst(c.rd.v, c.rd.w);
        in.rs1 = d_.wconst(c.rs1.v, c.rs1.w);
        in.rs2 = d_.wconst(c.rs2.v, c.rs2.w);
        in.imm = d_.wconst(c.imm.v, c.imm.w);
        in.fn = d_.wconst(c.fn.v, c.fn.w);
      } else {
        if (!m->supports(in.op)) throw Error(fmt::format("opcode {} not supported by {}", in.op.name(), m->name()));
        Roles r = roles(in.op.kind);
        auto field = [&](bool used, int w, const std::vector<uint32_t>& dom) {
          if (!used) return d_.wconst(0, w);
          auto x = sym::bv_input(g_, w);
          base.push_back(member(x, dom));
          return x;
        };
        in.rd = field(r.rd, rb, regs);
        in.rs1 = field(r.rs1, rb, regs);
        in.rs2 = field(r.rs2, rb, regs);
        in.imm = field(r.imm, mc.immediate_width, imms);
        in.fn = field(r.fn, 2, {0, 1, 2});
      }
      ins_.push_back(in);
    }

    auto plan = plan_slots(*m, p);
    StateT<Sym> s1, s2;
    for (int s = 0; s < l.num_slots(); ++s) {
      int w = l.slot_width(s);
      switch (plan[s].kind) {
        case SlotInit::Public: {
          auto x = sym::bv_input(g_, w);
          s1.slots.push_back(x);
          s2.slots.push_back(x);
          break;
        }
        case SlotInit::Secret:
          s1.slots.push_back(sym::bv_input(g_, w));
          s2.slots.push_back(sym::bv_input(g_, w));
          break;
        case SlotInit::Zero:
        case SlotInit::Fixed:
          s1.slots.push_back(d_.wconst(plan[s].value, w));
          s2.slots.push_back(s1.slots.back());
          break;
      }
    }
    s1.spec = s2.spec = d_.ff();
    init1_ = s1.slots;
    init2_ = s2.slots;
    base.push_back(m->wellformed(d_, s1));
    base.push_back(m->wellformed(d_, s2));

    for (size_t i = 0; i < code.size(); ++i) choice_.push_back(m->is_initiator(code.ops[i]) ? g_.input() : d_.ff());

    auto obs = observable_slots(*m, p);
    auto eqobs = [&](const StateT<Sym>& a, const StateT<Sym>& c) {
      sym::Lit x = d_.tt();
      for (int s : obs) x = d_.land(x, d_.eq(a.slots[s], c.slots[s]));
      return x;
    };
    int regfile = l.find("regfile");
    auto post_reg = [&](const StateT<Sym>& st, const sym::Bits& idx) {
      const auto& v = l.var(regfile);
      return select<Sym>(d_, std::span<const sym::Bits>(st.slots.data() + v.offset, v.count), idx);
    };
    StepOpts opts{o.arch_only};
    view_.has_pair = true;
    view_.set_index_width = o.set_index_width;
    view_.ops = code.ops;
    view_.ins = ins_;
    sym::Lit same_full = eqobs(s1, s2);
    StateT<Sym> n1 = s1, n2 = s2;
    for (size_t i = 0; i < code.size(); ++i) {
      view_.out1.push_back(m->step(d_, s1, ins_[i], Mode::Full, choice_[i], opts));
      view_.out2.push_back(m->step(d_, s2, ins_[i], Mode::Full, choice_[i], opts));
      if (o.require_violation) same_full = d_.land(same_full, eqobs(s1, s2));
      for (const auto& a : o.assumptions) {
        if (a.index != i) continue;
        if (code.ops[i] != kBr || regfile < 0) throw Error("branch assumption on a non-branch position");
        for (const StateT<Sym>* st : {&s1, &s2}) {
          sym::Lit cond = d_.nonzero(post_reg(*st, ins_[i].rs1));
          base.push_back(d_.lor(a.taken ? cond : d_.lnot(cond), st->spec));
        }
      }
    }
    if (o.require_violation) {
      sym::Lit viol = d_.lnot(same_full);
      if (p.variant == Variant::SNI) {
        sym::Lit same_ns = eqobs(n1, n2);
        for (size_t i = 0; i < code.size(); ++i) {
          m->step(d_, n1, ins_[i], Mode::Nonspec, d_.ff(), opts);
          m->step(d_, n2, ins_[i], Mode::Nonspec, d_.ff(), opts);
          same_ns = d_.land(same_ns, eqobs(n1, n2));
        }
        viol = d_.land(viol, same_ns);
      }
      base.push_back(viol);
    }
    sym::Lit all = g_.land_all(base);
    if (all == sym::kFalse) {
      base_ok_ = false;
    } else if (all != sym::kTrue) {
      base_ok_ = s_.add_clause({br_.lit(all)});
    }
  }

  CheckResult check(const Formula& extra) override {
    ++queries_;
    if (!base_ok_) return {Verdict::None, std::nullopt};
    sym::Lit e = encode_formula(d_, view_, extra);
    if (e == sym::kFalse) return {Verdict::None, std::nullopt};
    std::vector<sat::SLit> as;
    if (e != sym::kTrue) as.push_back(br_.lit(e));
    auto r = s_.solve(as, b_.deadline);
    if (r == sat::Result::Unknown) return {Verdict::Unknown, std::nullopt};
    if (r == sat::Result::Unsat) return {Verdict::None, std::nullopt};
    Witness w = extract();
    std::string why;
    if (!admissible(*m_, p_, o_, extra, w, &why))
      throw Error(fmt::format("internal: SAT witness failed replay ({})", why));
    return {Verdict::Found, std::move(w)};
  }

  uint64_t queries() const override { return queries_; }

 private:
  Witness extract() {
    Witness w;
    std::vector<bool> per_pos;
    for (size_t i = 0; i < code_.size(); ++i) {
      if (code_.fixed[i]) {
        w.program.push_back(*code_.fixed[i]);
      } else {
        const auto& in = ins_[i];
        w.program.push_back(make_instruction(in.op, br_.value(in.rd), br_.value(in.rs1), br_.value(in.rs2),
                                             br_.value(in.imm), br_.value(in.fn)));
      }
      per_pos.push_back(br_.value(choice_[i]));
    }
    w.choices = initiator_choices(*m_, w.program, per_pos);
    w.sigma1.v.resize(init1_.size());
    w.sigma2.v.resize(init2_.size());
    for (size_t s = 0; s < init1_.size(); ++s) {
      w.sigma1.v[s] = br_.value(init1_[s]);
      w.sigma2.v[s] = br_.value(init2_[s]);
    }
    return w;
  }

  ModelPtr m_;
  NIProperty p_;
  Code code_;
  SessionOptions o_;
  SearchBudget b_;
  sym::Aig g_;
  Sym d_{g_};
  sat::Solver s_;
  CnfBridge br_;
  std::vector<InstT<Sym>> ins_;
  std::vector<sym::Bits> init1_, init2_;
  std::vector<sym::Lit> choice_;
  ExecView<Sym> view_;
  bool base_ok_ = true;
  uint64_t queries_ = 0;
};

// Exhaustive search in lexicographic order over
// (template operands, speculation choices, public initial values, secret values of side 1, side 2).
class EnumSession : public Session {
 public:
  EnumSession(const ModelPtr& m, const NIProperty& p, const Code& code, const SessionOptions& o, const SearchBudget& b)
      : m_(m), p_(p), code_(code), o_(o), b_(b) {
    const auto& mc = m->machine();
    const auto& l = m->layout();
    auto regs = reg_domain(mc, b.operands);
    auto imms = imm_domain(mc, b.operands);
    for (size_t i = 0; i < code.size(); ++i) {
      if (code.fixed[i]) continue;
      if (!m->supports(code.ops[i])) throw Error(fmt::format("opcode {} not supported", code.ops[i].name()));
      Roles r = roles(code.ops[i].kind);
      auto add = [&](int field, const std::vector<uint32_t>& dom) { digits_.push_back({Digit::Operand, i, field, dom}); };
      if (r.rd) add(0, regs);
      if (r.rs1) add(1, regs);
      if (r.rs2) add(2, regs);
      if (r.imm) add(3, imms);
      if (r.fn) add(4, {0, 1, 2});
    }
    for (size_t i = 0; i < code.size(); ++i)
      if (m->is_initiator(code.ops[i])) digits_.push_back({Digit::Choice, i, 0, {0, 1}});
    plan_ = plan_slots(*m, p);
    auto full = [&](int s) {
      std::vector<uint32_t> v;
      for (uint32_t x = 0; x <= MachineConfig::mask(l.slot_width(s)); ++x) v.push_back(x);
      return v;
    };
    for (int s = 0; s < l.num_slots(); ++s)
      if (plan_[s].kind == SlotInit::Public) digits_.push_back({Digit::Public, static_cast<size_t>(s), 0, full(s)});
    for (int side = 1; side <= 2; ++side)
      for (int s = 0; s < l.num_slots(); ++s)
        if (plan_[s].kind == SlotInit::Secret)
          digits_.push_back({side == 1 ? Digit::Secret1 : Digit::Secret2, static_cast<size_t>(s), 0, full(s)});
    total_ = 1;
    for (const auto& dg : digits_) {
      if (total_ > (uint64_t{1} << 62) / dg.values.size()) {
        total_ = 0;
        break;
      }
      total_ *= dg.values.size();
    }
    if (total_ == 0 && b.max_pairs == 0) throw Error("enumeration space too large; set max_pairs or use the sat engine");
  }

  CheckResult check(const Formula& extra) override {
    ++queries_;
    uint64_t limit = total_ == 0 ? b_.max_pairs : total_;
    bool capped = false;
    if (b_.max_pairs > 0 && b_.max_pairs < limit) {
      limit = b_.max_pairs;
      capped = true;
    }
    int jobs = std::max(1, b_.jobs);
    std::vector<std::optional<std::pair<uint64_t, Witness>>> found(jobs);
    std::atomic<bool> timed_out{false};
    std::atomic<uint64_t> best{UINT64_MAX};
    auto worker = [&](int j) {
      uint64_t lo = limit / jobs * j, hi = j + 1 == jobs ? limit : limit / jobs * (j + 1);
      for (uint64_t idx = lo; idx < hi; ++idx) {
        if (idx > best.load()) return;
        if ((idx & 1023) == 0 && b_.deadline.expired()) {
          timed_out = true;
          return;
        }
        Witness w;
        if (!candidate(idx, w)) continue;
        if (!admissible(*m_, p_, o_, extra, w, nullptr)) continue;
        found[j] = std::make_pair(idx, std::move(w));
        uint64_t cur = best.load();
        while (idx < cur && !best.compare_exchange_weak(cur, idx)) {
        }
        return;
      }
    };
    if (jobs == 1) {
      worker(0);
    } else {
      std::vector<std::thread> ts;
      for (int j = 0; j < jobs; ++j) ts.emplace_back(worker, j);
      for (auto& t : ts) t.join();
    }
    for (auto& f : found)
      if (f) return {Verdict::Found, std::move(f->second)};
    if (timed_out || capped) return {Verdict::Unknown, std::nullopt};
    return {Verdict::None, std::nullopt};
  }

  uint64_t queries() const override { return queries_; }

 private:
  struct Digit {
    enum Kind { Operand, Choice, Public, Secret1, Secret2 } kind;
    size_t where;
    int field;
    std::vector<uint32_t> values;
  };

  // Decodes a mixed-radix index (first digit most significant) into a candidate; false if not well-formed.
  bool candidate(uint64_t idx, Witness& w) const {
    const auto& l = m_->layout();
    std::vector<uint32_t> val(digits_.size());
    for (size_t k = digits_.size(); k-- > 0;) {
      uint64_t n = digits_[k].values.size();
      val[k] = digits_[k].values[idx % n];
      idx /= n;
    }
    std::vector<std::array<uint32_t, 5>> ops(code_.size(), {0, 0, 0, 0, 0});
    std::vector<bool> per_pos(code_.size(), false);
    w.sigma1.v.assign(l.num_slots(), 0);
    for (int s = 0; s < l.num_slots(); ++s)
      if (plan_[s].kind == SlotInit::Fixed) w.sigma1.v[s] = plan_[s].value;
    w.sigma2 = w.sigma1;
    for (size_t k = 0; k < digits_.size(); ++k) {
      const auto& dg = digits_[k];
      switch (dg.kind) {
        case Digit::Operand: ops[dg.where][dg.field] = val[k]; break;
        case Digit::Choice: per_pos[dg.where] = val[k] != 0; break;
        case Digit::Public:
          w.sigma1.v[dg.where] = val[k];
          w.sigma2.v[dg.where] = val[k];
          break;
        case Digit::Secret1: w.sigma1.v[dg.where] = val[k]; break;
        case Digit::Secret2: w.sigma2.v[dg.where] = val[k]; break;
      }
    }
    Conc d;
    if (!m_->wellformed(d, m_->to_conc(w.sigma1)) || !m_->wellformed(d, m_->to_conc(w.sigma2))) return false;
    for (size_t i = 0; i < code_.size(); ++i) {
      if (code_.fixed[i]) {
        w.program.push_back(*code_.fixed[i]);
      } else {
        const auto& o = ops[i];
        w.program.push_back(make_instruction(code_.ops[i], o[0], o[1], o[2], o[3], o[4]));
      }
    }
    w.choices = initiator_choices(*m_, w.program, per_pos);
    return true;
  }

  ModelPtr m_;
  NIProperty p_;
  Code code_;
  SessionOptions o_;
  SearchBudget b_;
  std::vector<SlotPlan> plan_;
  std::vector<Digit> digits_;
  uint64_t total_ = 0;
  uint64_t queries_ = 0;
};

}  // namespace

std::unique_ptr<Session> open_session(const ModelPtr& m, const NIProperty& p, const Code& code, const SessionOptions& o,
                                      const SearchBudget& b) {
  if (o.require_violation && o.arch_only) throw Error("violation search needs microarchitectural state");
  if (b.engine == EngineKind::Enum) return std::make_unique<EnumSession>(m, p, code, o, b);
  return std::make_unique<SatSession>(m, p, code, o, b);
}

bool verify_witness(const PlatformModel& m, const NIProperty& p, const Witness& w, const SessionOptions& o,
                    const Formula& extra, std::string* why) {
  auto fail = [&](const char* msg) {
    if (why) *why = msg;
    return false;
  };
  if (!init_holds(m, p, w.sigma1) || !init_holds(m, p, w.sigma2)) return fail("initial state outside init predicate");
  if (!low_equiv(m, w.sigma1, w.sigma2, p.v_pub)) return fail("initial states not low-equivalent");
  try {
    validate_program(Program{w.program, {{kEndLabel, w.program.size()}}}, m.machine());
  } catch (const Error&) {
    return fail("malformed program");
  }
  Witness replay = w;
  if (!admissible(m, p, o, extra, replay, why)) return false;
  if (!(replay.t1 == w.t1) || !(replay.t2 == w.t2)) return fail("stored traces differ from replay");
  if (o.require_violation && p.variant == Variant::SNI) {
    if (!w.t1ns || !w.t2ns || !(*replay.t1ns == *w.t1ns) || !(*replay.t2ns == *w.t2ns))
      return fail("stored non-speculative traces differ from replay");
  }
  return true;
}

CheckResult find_violation(const ModelPtr& m, const NIProperty& p, const Code& code, const Constraint& c,
                           const SearchBudget& b) {
  std::vector<size_t> ident(code.size());
  for (size_t i = 0; i < ident.size(); ++i) ident[i] = i;
  SessionOptions o;
  if (m->params().count("set_index_width")) o.set_index_width = std::stoi(m->params().at("set_index_width"));
  auto s = open_session(m, p, code, o, b);
  return s->check(Formula::of(c, ident));
}

HyperResult check_program_hyper(const ModelPtr& m, const NIProperty& p, const std::vector<Instruction>& program,
                                const std::vector<BranchAssume>& assumptions, const SearchBudget& b) {
  if (program.empty()) return {HyperVerdict::Safe, std::nullopt};
  SessionOptions o;
  o.assumptions = assumptions;
  auto s = open_session(m, p, Code::from_program(program), o, b);
  auto r = s->check(Formula::truth());
  switch (r.verdict) {
    case Verdict::Found: return {HyperVerdict::Unsafe, std::move(r.witness)};
    case Verdict::None: return {HyperVerdict::Safe, std::nullopt};
    case Verdict::Unknown: return {HyperVerdict::Inconclusive, std::nullopt};
  }
  return {};
}

std::string render_witness(const PlatformModel& m, const Witness& w) {
  std::string out;
  Program prog{w.program, {}};
  bool has_branch = std::any_of(w.program.begin(), w.program.end(), [](const Instruction& i) { return i.op == kBr; });
  if (has_branch) prog.labels[kEndLabel] = w.program.size();
  out += render_program(prog);
  std::string ch;
  for (bool c : w.choices) ch += c ? '1' : '0';
  out += fmt::format("# choices: {}\n", ch.empty() ? "-" : ch);
  out += fmt::format("# sigma1: {}\n", m.describe(w.sigma1));
  out += fmt::format("# sigma2: {}\n", m.describe(w.sigma2));
  out += fmt::format("# final1: {}\n", m.describe(w.t1.states.back()));
  out += fmt::format("# final2: {}\n", m.describe(w.t2.states.back()));
  return out;
}

}  // namespace sempat
