#pragma once

// Exhaustive reference semantics for tests: enumerates initial states from the slot plan and runs the concrete
// interpreter directly. Shares no code with the symbolic engine or the enumeration session.

#include <functional>
#include <optional>
#include <vector>

#include "sempat/grammar.hpp"
#include "sempat/secspec.hpp"

namespace sempat::brute {

struct StateSpace {
  // States grouped by their public part; pairs are taken within a group.
  std::vector<std::vector<State>> groups;
  size_t size() const {
    size_t n = 0;
    for (const auto& g : groups) n += g.size();
    return n;
  }
};

inline StateSpace state_space(const PlatformModel& m, const NIProperty& p, int max_bits = 22) {
  auto plan = plan_slots(m, p);
  const auto& l = m.layout();
  std::vector<int> pub, sec;
  int bits = 0;
  for (size_t s = 0; s < plan.size(); ++s) {
    if (plan[s].kind == SlotInit::Public) pub.push_back(static_cast<int>(s));
    if (plan[s].kind == SlotInit::Secret) sec.push_back(static_cast<int>(s));
    if (plan[s].kind == SlotInit::Public || plan[s].kind == SlotInit::Secret) bits += l.slot_width(static_cast<int>(s));
  }
  if (bits > max_bits) throw Error("state space too large for brute force");
  State base;
  base.v.assign(plan.size(), 0);
  for (size_t s = 0; s < plan.size(); ++s)
    if (plan[s].kind == SlotInit::Fixed) base.v[s] = plan[s].value;

  auto odometer = [&](const std::vector<int>& slots, State& st, auto&& each) {
    for (int s : slots) st.v[s] = 0;
    while (true) {
      each(st);
      size_t k = 0;
      for (; k < slots.size(); ++k) {
        int s = slots[k];
        if (++st.v[s] <= MachineConfig::mask(l.slot_width(s))) break;
        st.v[s] = 0;
      }
      if (k == slots.size()) return;
    }
  };

  StateSpace out;
  Conc d;
  State st = base;
  odometer(pub, st, [&](State& a) {
    std::vector<State> g;
    State b = a;
    odometer(sec, b, [&](State& c) {
      if (m.wellformed(d, m.to_conc(c))) g.push_back(c);
    });
    if (!g.empty()) out.groups.push_back(std::move(g));
  });
  return out;
}

// Every concrete instruction for op at the model's machine configuration. Branch targets are "L".
inline std::vector<Instruction> instances(const PlatformModel& m, Opcode op) {
  const auto& mc = m.machine();
  std::vector<Instruction> out;
  int R = mc.register_count;
  uint32_t I = MachineConfig::mask(mc.immediate_width);
  switch (op.kind) {
    case OpKind::Synth: out.push_back(Instruction::synth(op.index)); break;
    case OpKind::Mul:
      for (int a = 0; a < R; ++a)
        for (int b = 0; b < R; ++b)
          for (int c = 0; c < R; ++c) out.push_back(Instruction::mul(a, b, c));
      break;
    case OpKind::Alu:
      for (int f = 0; f < kAluFnCount; ++f)
        for (int a = 0; a < R; ++a)
          for (int b = 0; b < R; ++b)
            for (int c = 0; c < R; ++c) out.push_back(Instruction::alu(static_cast<AluFn>(f), a, b, c));
      break;
    case OpKind::Ld:
      for (int a = 0; a < R; ++a)
        for (uint32_t i = 0; i <= I; ++i)
          for (int b = 0; b < R; ++b) out.push_back(Instruction::ld(a, i, b));
      break;
    case OpKind::St:
      for (int a = 0; a < R; ++a)
        for (uint32_t i = 0; i <= I; ++i)
          for (int b = 0; b < R; ++b) out.push_back(Instruction::st(a, i, b));
      break;
    case OpKind::Br:
      for (int a = 0; a < R; ++a) out.push_back(Instruction::br(a, "L"));
      break;
  }
  return out;
}

// Calls f for every instruction sequence whose opcodes are tmpl; stops early when f returns false.
inline void for_each_program(const PlatformModel& m, const std::vector<Opcode>& tmpl,
                             const std::function<bool(const std::vector<Instruction>&)>& f) {
  std::vector<std::vector<Instruction>> choices;
  for (Opcode op : tmpl) choices.push_back(instances(m, op));
  std::vector<size_t> idx(tmpl.size(), 0);
  std::vector<Instruction> prog(tmpl.size());
  while (true) {
    for (size_t k = 0; k < tmpl.size(); ++k) prog[k] = choices[k][idx[k]];
    if (!f(prog)) return;
    size_t k = tmpl.size();
    while (k > 0) {
      --k;
      if (++idx[k] < choices[k].size()) break;
      idx[k] = 0;
      if (k == 0) return;
    }
    if (tmpl.empty()) return;
  }
}

struct Execution {
  Trace t1, t2;
};

// Calls f for every violating execution pair of prog (speculation-free models only: no choice inputs).
// Stops early when f returns false. Returns false if stopped.
inline bool for_each_violation(const PlatformModel& m, const NIProperty& p, const StateSpace& space,
                               const std::vector<Instruction>& prog,
                               const std::function<bool(const Execution&)>& f) {
  if (m.spec_feature() != SpecFeature::None) throw Error("brute force covers speculation-free models");
  auto obs = slots_of(m.layout(), p.v_obs);
  for (const auto& g : space.groups) {
    std::vector<Trace> ts;
    ts.reserve(g.size());
    for (const auto& s : g) ts.push_back(run(m, s, prog, Mode::Full));
    for (size_t i = 0; i < ts.size(); ++i)
      for (size_t j = 0; j < ts.size(); ++j) {
        if (i == j) continue;
        if (!violates(m, p, ts[i], ts[j])) continue;
        if (!f(Execution{ts[i], ts[j]})) return false;
      }
  }
  return true;
}

inline bool has_violation(const PlatformModel& m, const NIProperty& p, const StateSpace& space,
                          const std::vector<Instruction>& prog) {
  return !for_each_violation(m, p, space, prog, [](const Execution&) { return false; });
}

inline bool template_violates(const PlatformModel& m, const NIProperty& p, const StateSpace& space,
                              const std::vector<Opcode>& tmpl) {
  bool found = false;
  for_each_program(m, tmpl, [&](const std::vector<Instruction>& prog) {
    found = has_violation(m, p, space, prog);
    return !found;
  });
  return found;
}

}  // namespace sempat::brute
