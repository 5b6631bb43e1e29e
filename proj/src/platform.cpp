#include "sempat/platform.hpp"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>

namespace sempat {

int StateVar::field_index(std::string_view f) const {
  for (size_t i = 0; i < fields.size(); ++i)
    if (fields[i].name == f) return static_cast<int>(i);
  return -1;
}

int Layout::add(StateVar v) {
  if (find(v.name) >= 0) throw Error(fmt::format("duplicate state variable '{}'", v.name));
  if (v.fields.empty()) throw Error("state variable without fields");
  v.offset = num_slots_;
  int id = static_cast<int>(vars_.size());
  for (int e = 0; e < v.count; ++e)
    for (const auto& f : v.fields) {
      slot_width_.push_back(f.width);
      slot_var_.push_back(id);
    }
  num_slots_ += v.num_slots();
  vars_.push_back(std::move(v));
  return id;
}

int Layout::find(std::string_view name) const {
  for (size_t i = 0; i < vars_.size(); ++i)
    if (vars_[i].name == name) return static_cast<int>(i);
  return -1;
}

std::string Layout::slot_name(int s) const {
  const auto& v = vars_[slot_var_[s]];
  int rel = s - v.offset;
  int e = rel / v.stride(), f = rel % v.stride();
  std::string out = v.name;
  if (v.kind != VarKind::Scalar) out += fmt::format("[{}]", e);
  if (v.kind == VarKind::Records) out += "." + v.fields[f].name;
  return out;
}

VarRef Layout::parse_ref(std::string_view text) const {
  auto lb = text.find('[');
  std::string_view name = text.substr(0, lb);
  int id = find(name);
  if (id < 0) throw Error(fmt::format("unknown state variable '{}'", name));
  VarRef r{id, -1};
  if (lb != std::string_view::npos) {
    auto rb = text.find(']', lb);
    if (rb == std::string_view::npos || rb != text.size() - 1) throw Error(fmt::format("bad variable reference '{}'", text));
    auto num = text.substr(lb + 1, rb - lb - 1);
    int e = 0;
    auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), e);
    if (ec != std::errc() || p != num.data() + num.size()) throw Error(fmt::format("bad index in '{}'", text));
    if (vars_[id].kind == VarKind::Scalar || e < 0 || e >= vars_[id].count)
      throw Error(fmt::format("index out of range in '{}'", text));
    r.entry = e;
  }
  return r;
}

std::string Layout::ref_name(const VarRef& r) const {
  if (r.entry < 0) return vars_[r.var].name;
  return fmt::format("{}[{}]", vars_[r.var].name, r.entry);
}

std::vector<int> Layout::slots_of(const VarRef& r) const {
  const auto& v = vars_[r.var];
  std::vector<int> out;
  int e0 = r.entry < 0 ? 0 : r.entry;
  int e1 = r.entry < 0 ? v.count : r.entry + 1;
  for (int e = e0; e < e1; ++e)
    for (int f = 0; f < v.stride(); ++f) out.push_back(slot(r.var, e, f));
  return out;
}

std::string spec_feature_name(SpecFeature f) {
  switch (f) {
    case SpecFeature::None: return "none";
    case SpecFeature::Branch: return "branch";
    case SpecFeature::Stl: return "stl";
  }
  return "?";
}

SpecFeature parse_spec_feature(std::string_view s) {
  if (s == "none") return SpecFeature::None;
  if (s == "branch") return SpecFeature::Branch;
  if (s == "stl") return SpecFeature::Stl;
  throw Error(fmt::format("unknown spec_feature '{}'", s));
}

bool PlatformModel::supports(Opcode op) const {
  return std::find(opcodes_.begin(), opcodes_.end(), op) != opcodes_.end();
}

bool PlatformModel::is_initiator(Opcode op) const {
  switch (feature_) {
    case SpecFeature::None: return false;
    case SpecFeature::Branch: return op == kBr;
    case SpecFeature::Stl: return op == kLd;
  }
  return false;
}

std::string PlatformModel::fingerprint() const {
  std::string out = name_;
  out += fmt::format(" word_width={} register_count={} immediate_width={}", mc_.word_width, mc_.register_count,
                     mc_.immediate_width);
  for (const auto& [k, v] : params_) out += fmt::format(" {}={}", k, v);
  return out;
}

StateT<Conc> PlatformModel::to_conc(const State& s) const {
  StateT<Conc> c;
  c.slots.resize(layout_.num_slots());
  for (int i = 0; i < layout_.num_slots(); ++i) {
    int w = layout_.slot_width(i);
    c.slots[i] = CWord{s.v.at(i) & MachineConfig::mask(w), static_cast<uint8_t>(w)};
  }
  c.spec = s.spec;
  return c;
}

State PlatformModel::from_conc(const StateT<Conc>& c) const {
  State s;
  s.v.resize(c.slots.size());
  for (size_t i = 0; i < c.slots.size(); ++i) s.v[i] = c.slots[i].v;
  s.spec = c.spec;
  return s;
}

InstT<Conc> PlatformModel::lower(const Instruction& in) const {
  validate_instruction(in, mc_);
  if (!supports(in.op)) throw Error(fmt::format("opcode {} not supported by model {}", in.op.name(), name_));
  int rb = mc_.reg_bits();
  InstT<Conc> c;
  c.op = in.op;
  c.rd = CWord{in.rd.value_or(0), static_cast<uint8_t>(rb)};
  c.rs1 = CWord{in.rs1.value_or(0), static_cast<uint8_t>(rb)};
  c.rs2 = CWord{in.rs2.value_or(0), static_cast<uint8_t>(rb)};
  c.imm = CWord{in.imm.value_or(0), static_cast<uint8_t>(mc_.immediate_width)};
  c.fn = CWord{static_cast<uint32_t>(in.fn.value_or(AluFn::Add)), 2};
  return c;
}

uint32_t PlatformModel::get(const State& s, std::string_view var, int entry, std::string_view field) const {
  int id = layout_.find(var);
  if (id < 0) throw Error(fmt::format("unknown state variable '{}'", var));
  const auto& v = layout_.var(id);
  int f = field.empty() ? 0 : v.field_index(field);
  if (f < 0 || entry < 0 || entry >= v.count) throw Error("bad state access");
  return s.v.at(layout_.slot(id, entry, f));
}

void PlatformModel::set(State& s, std::string_view var, uint32_t value, int entry, std::string_view field) const {
  int id = layout_.find(var);
  if (id < 0) throw Error(fmt::format("unknown state variable '{}'", var));
  const auto& v = layout_.var(id);
  int f = field.empty() ? 0 : v.field_index(field);
  if (f < 0 || entry < 0 || entry >= v.count) throw Error("bad state access");
  int sl = layout_.slot(id, entry, f);
  s.v.at(sl) = value & MachineConfig::mask(layout_.slot_width(sl));
}

std::string PlatformModel::describe(const State& s) const {
  std::string out;
  for (int i = 0; i < layout_.num_slots(); ++i) {
    if (layout_.var(layout_.slot_var(i)).cls == VarClass::Internal) continue;
    out += fmt::format("{}={} ", layout_.slot_name(i), s.v[i]);
  }
  out += fmt::format("spec={}", s.spec ? 1 : 0);
  return out;
}

State initial_state(const PlatformModel& m) {
  State s;
  s.v.assign(m.layout().num_slots(), 0);
  return s;
}

namespace {

StepRecord record_of(StepOut<Conc>&& o) {
  StepRecord r;
  r.initiated = o.initiated;
  r.rolled_back = o.rolled_back;
  for (const auto& w : o.src) r.src.push_back(w.v);
  if (o.result) r.result = o.result->v;
  if (o.addr) r.addr = o.addr->v;
  r.reads = std::move(o.reads);
  r.writes = std::move(o.writes);
  return r;
}

}  // namespace

State step(const PlatformModel& m, const State& s, const Instruction& in, Mode mode, bool spec_choice,
           StepRecord* rec) {
  Conc d;
  auto cs = m.to_conc(s);
  auto out = m.step(d, cs, m.lower(in), mode, spec_choice, StepOpts{});
  if (rec) *rec = record_of(std::move(out));
  return m.from_conc(cs);
}

Trace run(const PlatformModel& m, const State& init, std::span<const Instruction> instrs, Mode mode,
          const std::vector<bool>& spec_choices) {
  Trace t;
  t.mode = mode;
  t.instrs.assign(instrs.begin(), instrs.end());
  t.states.push_back(init);
  Conc d;
  auto cs = m.to_conc(init);
  size_t next_choice = 0;
  for (const auto& in : instrs) {
    bool choice = false;
    if (m.is_initiator(in.op)) {
      if (next_choice < spec_choices.size()) choice = spec_choices[next_choice];
      ++next_choice;
    }
    auto out = m.step(d, cs, m.lower(in), mode, choice, StepOpts{});
    t.steps.push_back(record_of(std::move(out)));
    t.states.push_back(m.from_conc(cs));
  }
  return t;
}

Trace run(const PlatformModel& m, const State& init, const Program& p, Mode mode,
          const std::vector<bool>& spec_choices) {
  return run(m, init, std::span<const Instruction>(p.instructions), mode, spec_choices);
}

std::optional<size_t> last_writer(const Trace& t, const VarRef& v, size_t i) {
  if (i > t.steps.size()) i = t.steps.size();
  Loc target{v.var, v.entry};
  for (size_t j = i; j-- > 0;) {
    for (const auto& w : t.steps[j].writes)
      if (w.overlaps(target)) return j;
  }
  return std::nullopt;
}

std::set<size_t> dependency_closure(const Trace& t, const std::set<size_t>& indices) {
  std::set<size_t> out = indices;
  std::vector<size_t> work(indices.begin(), indices.end());
  while (!work.empty()) {
    size_t j = work.back();
    work.pop_back();
    for (const auto& r : t.steps.at(j).reads) {
      auto lw = last_writer(t, VarRef{r.var, r.entry}, j);
      if (lw && out.insert(*lw).second) work.push_back(*lw);
    }
  }
  return out;
}

}  // namespace sempat
