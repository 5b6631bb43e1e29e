#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sempat/domain.hpp"
#include "sempat/isa.hpp"

namespace sempat {

enum class VarKind { Scalar, Array, Records };
enum class VarClass { Arch, March, Internal };
enum class DefaultInit { Free, Zero };

struct Field {
  std::string name;
  int width = 0;
};

struct StateVar {
  std::string name;
  VarKind kind = VarKind::Scalar;
  VarClass cls = VarClass::Arch;
  int count = 1;
  std::vector<Field> fields;
  DefaultInit init = DefaultInit::Free;
  bool memory = false;
  int offset = 0;

  int stride() const { return static_cast<int>(fields.size()); }
  int num_slots() const { return count * stride(); }
  int field_index(std::string_view f) const;
};

// A variable instance: the whole variable (entry = -1) or one array entry / record.
struct VarRef {
  int var = -1;
  int entry = -1;
  auto operator<=>(const VarRef&) const = default;
  bool overlaps(const VarRef& o) const { return var == o.var && (entry < 0 || o.entry < 0 || entry == o.entry); }
};

class Layout {
 public:
  int add(StateVar v);
  const std::vector<StateVar>& vars() const { return vars_; }
  const StateVar& var(int id) const { return vars_.at(id); }
  int find(std::string_view name) const;
  int slot(int var, int entry = 0, int field = 0) const {
    const auto& v = vars_[var];
    return v.offset + entry * v.stride() + field;
  }
  int num_slots() const { return num_slots_; }
  int slot_width(int s) const { return slot_width_[s]; }
  int slot_var(int s) const { return slot_var_[s]; }
  std::string slot_name(int s) const;
  // Parses "mem", "mem[3]", "reuse_buf[1]".
  VarRef parse_ref(std::string_view text) const;
  std::string ref_name(const VarRef& r) const;
  std::vector<int> slots_of(const VarRef& r) const;

 private:
  std::vector<StateVar> vars_;
  std::vector<int> slot_width_;
  std::vector<int> slot_var_;
  int num_slots_ = 0;
};

enum class Mode { Full, Nonspec };
enum class SpecFeature { None, Branch, Stl };
std::string spec_feature_name(SpecFeature f);
SpecFeature parse_spec_feature(std::string_view s);

template <class D>
struct StateT {
  std::vector<typename D::Word> slots;
  typename D::Bool spec;
};

template <class D>
struct InstT {
  Opcode op;
  typename D::Word rd, rs1, rs2, imm, fn;
};

struct Loc {
  int var = -1;
  int entry = -1;
  bool overlaps(const Loc& o) const { return var == o.var && (entry < 0 || o.entry < 0 || entry == o.entry); }
  bool operator==(const Loc&) const = default;
};

template <class D>
struct StepOut {
  typename D::Bool initiated;
  typename D::Bool rolled_back;
  std::vector<typename D::Word> src;
  std::optional<typename D::Word> result;
  std::optional<typename D::Word> addr;
  // Declared read and write sets; filled for the concrete domain only.
  std::vector<Loc> reads;
  std::vector<Loc> writes;
};

struct StepOpts {
  // Skip microarchitectural bookkeeping. Architectural behavior of the shipped models does not depend on it.
  bool arch_only = false;
};

struct State {
  std::vector<uint32_t> v;
  bool spec = false;
  bool operator==(const State&) const = default;
};

struct StepRecord {
  bool initiated = false;
  bool rolled_back = false;
  std::vector<uint32_t> src;
  std::optional<uint32_t> result;
  std::optional<uint32_t> addr;
  std::vector<Loc> reads;
  std::vector<Loc> writes;
  bool operator==(const StepRecord&) const = default;
};

struct Trace {
  std::vector<State> states;
  std::vector<Instruction> instrs;
  Mode mode = Mode::Full;
  std::vector<StepRecord> steps;
  bool operator==(const Trace&) const = default;
};

// One taint transfer edge: if any read variable is tainted, every written variable becomes tainted.
struct TaintRule {
  std::set<int> reads;
  std::set<int> writes;
};

class PlatformModel {
 public:
  virtual ~PlatformModel() = default;

  const std::string& name() const { return name_; }
  const Layout& layout() const { return layout_; }
  const MachineConfig& machine() const { return mc_; }
  const std::vector<Opcode>& opcodes() const { return opcodes_; }
  SpecFeature spec_feature() const { return feature_; }
  int spec_window() const { return window_; }
  bool supports(Opcode op) const;
  bool is_initiator(Opcode op) const;
  const std::map<std::string, std::string>& params() const { return params_; }
  std::string fingerprint() const;

  virtual StepOut<Conc> step(Conc& d, StateT<Conc>& s, const InstT<Conc>& in, Mode m, bool choice,
                             const StepOpts& o) const = 0;
  virtual StepOut<Sym> step(Sym& d, StateT<Sym>& s, const InstT<Sym>& in, Mode m, sym::Lit choice,
                            const StepOpts& o) const = 0;
  // Model well-formedness of an initial state (e.g. buffer coherence).
  virtual bool wellformed(Conc& d, const StateT<Conc>& s) const = 0;
  virtual sym::Lit wellformed(Sym& d, const StateT<Sym>& s) const = 0;
  virtual std::vector<TaintRule> taint_rules(Opcode op) const = 0;
  virtual std::shared_ptr<const PlatformModel> with_speculation(SpecFeature f, int window) const = 0;

  // Slot widths are taken from the layout.
  StateT<Conc> to_conc(const State& s) const;
  State from_conc(const StateT<Conc>& s) const;
  InstT<Conc> lower(const Instruction& in) const;
  uint32_t get(const State& s, std::string_view var, int entry = 0, std::string_view field = "") const;
  void set(State& s, std::string_view var, uint32_t value, int entry = 0, std::string_view field = "") const;
  std::string describe(const State& s) const;

 protected:
  std::string name_;
  Layout layout_;
  MachineConfig mc_;
  std::vector<Opcode> opcodes_;
  SpecFeature feature_ = SpecFeature::None;
  int window_ = 0;
  std::map<std::string, std::string> params_;
};

using ModelPtr = std::shared_ptr<const PlatformModel>;

// CRTP bridge: Impl provides templated step_impl / wf_impl.
template <class Impl>
class ModelT : public PlatformModel {
 public:
  StepOut<Conc> step(Conc& d, StateT<Conc>& s, const InstT<Conc>& in, Mode m, bool c,
                     const StepOpts& o) const override {
    return static_cast<const Impl*>(this)->step_impl(d, s, in, m, c, o);
  }
  StepOut<Sym> step(Sym& d, StateT<Sym>& s, const InstT<Sym>& in, Mode m, sym::Lit c,
                    const StepOpts& o) const override {
    return static_cast<const Impl*>(this)->step_impl(d, s, in, m, c, o);
  }
  bool wellformed(Conc& d, const StateT<Conc>& s) const override {
    return static_cast<const Impl*>(this)->wf_impl(d, s);
  }
  sym::Lit wellformed(Sym& d, const StateT<Sym>& s) const override {
    return static_cast<const Impl*>(this)->wf_impl(d, s);
  }
};

State initial_state(const PlatformModel& m);

State step(const PlatformModel& m, const State& s, const Instruction& in, Mode mode, bool spec_choice,
           StepRecord* rec = nullptr);

// spec_choices holds one entry per spec-initiator occurrence; missing entries count as false.
Trace run(const PlatformModel& m, const State& init, std::span<const Instruction> instrs, Mode mode,
          const std::vector<bool>& spec_choices = {});
Trace run(const PlatformModel& m, const State& init, const Program& p, Mode mode,
          const std::vector<bool>& spec_choices = {});

std::optional<size_t> last_writer(const Trace& t, const VarRef& v, size_t i);
std::set<size_t> dependency_closure(const Trace& t, const std::set<size_t>& indices);

}  // namespace sempat
