#include "sempat/models.hpp"

#include <fmt/format.h>

namespace sempat {

namespace {

template <class D>
using W = typename D::Word;
template <class D>
using B = typename D::Bool;

// p < n for a pointer word whose width may not hold n itself.
template <class D>
B<D> ptr_in_range(D& d, const W<D>& p, int n) {
  if (static_cast<uint32_t>(n) > MachineConfig::mask(d.width(p))) return d.tt();
  return d.ult(p, d.wconst(n, d.width(p)));
}

StateVar array_var(std::string name, VarClass cls, int count, int width, DefaultInit init) {
  StateVar v;
  v.name = std::move(name);
  v.kind = VarKind::Array;
  v.cls = cls;
  v.count = count;
  v.fields = {{"value", width}};
  v.init = init;
  return v;
}

StateVar scalar_var(std::string name, VarClass cls, int width, DefaultInit init) {
  StateVar v;
  v.name = std::move(name);
  v.kind = VarKind::Scalar;
  v.cls = cls;
  v.count = 1;
  v.fields = {{"value", width}};
  v.init = init;
  return v;
}

StateVar record_var(std::string name, int count, std::vector<Field> fields) {
  StateVar v;
  v.name = std::move(name);
  v.kind = VarKind::Records;
  v.cls = VarClass::March;
  v.count = count;
  v.fields = std::move(fields);
  v.init = DefaultInit::Zero;
  return v;
}

constexpr int kCounterWidth = 8;

// Register file, memory and the single-frame speculation machinery shared by PlatCR and PlatSS.
// Impl supplies exec<D>() for instruction semantics and rollback<D>() for microarchitectural cleanup.
template <class Impl>
class ArchModel : public ModelT<Impl> {
 public:
  template <class D>
  StepOut<D> step_impl(D& d, StateT<D>& s, const InstT<D>& in, Mode mode, B<D> choice, const StepOpts& o) const {
    StepOut<D> out;
    out.initiated = d.ff();
    out.rolled_back = d.ff();
    const bool specful = this->feature_ != SpecFeature::None;
    B<D> was = s.spec;
    B<D> init = d.ff();
    if (specful && mode == Mode::Full && this->is_initiator(in.op)) init = d.land(choice, d.lnot(s.spec));
    if (specful) {
      bool k;
      if (!(d.known_bool(init, &k) && !k)) {
        copy_guarded(d, s, ckpt_regfile_, regfile_, init);
        copy_guarded(d, s, ckpt_mem_, mem_, init);
        auto& left = s.slots[this->layout_.slot(spec_left_)];
        left = d.ite(init, d.wconst(this->window_, kCounterWidth), left);
        s.spec = d.lor(s.spec, init);
        if constexpr (!D::kSymbolic) {
          if (init) {
            out.reads.push_back({regfile_, -1});
            out.reads.push_back({mem_, -1});
            out.writes.push_back({ckpt_regfile_, -1});
            out.writes.push_back({ckpt_mem_, -1});
          }
        }
      }
    }
    out.initiated = init;

    static_cast<const Impl*>(this)->exec(d, s, in, init, out, o);

    if (specful) {
      bool k;
      if (!(d.known_bool(was, &k) && !k)) {
        auto& left = s.slots[this->layout_.slot(spec_left_)];
        left = d.ite(was, d.sub(left, d.wconst(1, kCounterWidth)), left);
        B<D> rb = d.land(was, d.eqc(left, 0));
        copy_guarded(d, s, regfile_, ckpt_regfile_, rb);
        copy_guarded(d, s, mem_, ckpt_mem_, rb);
        s.spec = d.land(s.spec, d.lnot(rb));
        if (!o.arch_only) static_cast<const Impl*>(this)->rollback(d, s, rb);
        out.rolled_back = rb;
        if constexpr (!D::kSymbolic) {
          if (rb) {
            out.reads.push_back({ckpt_regfile_, -1});
            out.reads.push_back({ckpt_mem_, -1});
            out.writes.push_back({regfile_, -1});
            out.writes.push_back({mem_, -1});
          }
        }
      }
    }
    return out;
  }

 protected:
  void add_arch_vars(int mem_width_bits) {
    regfile_ = this->layout_.add(array_var("regfile", VarClass::Arch, this->mc_.register_count,
                                           this->mc_.word_width, DefaultInit::Free));
    StateVar m = array_var("mem", VarClass::Arch, 1 << mem_width_bits, this->mc_.word_width, DefaultInit::Free);
    m.memory = true;
    mem_ = this->layout_.add(m);
  }

  void add_spec_vars() {
    if (this->feature_ == SpecFeature::None) return;
    const auto& rf = this->layout_.var(regfile_);
    const auto& mm = this->layout_.var(mem_);
    int w = this->mc_.word_width;
    ckpt_regfile_ = this->layout_.add(array_var("ckpt_regfile", VarClass::Internal, rf.count, w, DefaultInit::Zero));
    ckpt_mem_ = this->layout_.add(array_var("ckpt_mem", VarClass::Internal, mm.count, w, DefaultInit::Zero));
    spec_left_ = this->layout_.add(scalar_var("spec_left", VarClass::Internal, kCounterWidth, DefaultInit::Zero));
    if (this->feature_ == SpecFeature::Stl) {
      pend_valid_ = this->layout_.add(scalar_var("pend_valid", VarClass::Internal, 1, DefaultInit::Zero));
      pend_addr_ = this->layout_.add(scalar_var("pend_addr", VarClass::Internal, w, DefaultInit::Zero));
      pend_old_ = this->layout_.add(scalar_var("pend_old", VarClass::Internal, w, DefaultInit::Zero));
    }
  }

  template <class D>
  static void copy_guarded(D& d, StateT<D>& s, int base_dst, int base_src, B<D> g, const Layout& l) {
    const auto& v = l.var(base_dst);
    int n = v.num_slots();
    int od = v.offset, os = l.var(base_src).offset;
    for (int i = 0; i < n; ++i) s.slots[od + i] = d.ite(g, s.slots[os + i], s.slots[od + i]);
  }
  template <class D>
  void copy_guarded(D& d, StateT<D>& s, int dst, int src, B<D> g) const {
    copy_guarded(d, s, dst, src, g, this->layout_);
  }

  template <class D>
  W<D> reg(D& d, const StateT<D>& s, const W<D>& idx) const {
    const auto& v = this->layout_.var(regfile_);
    return select<D>(d, std::span<const W<D>>(s.slots.data() + v.offset, v.count), idx);
  }
  template <class D>
  void set_reg(D& d, StateT<D>& s, const W<D>& idx, const W<D>& val) const {
    const auto& v = this->layout_.var(regfile_);
    store<D>(d, s.slots, v.offset, v.count, 1, idx, val, d.tt());
  }
  template <class D>
  W<D> load(D& d, const StateT<D>& s, const W<D>& addr) const {
    const auto& v = this->layout_.var(mem_);
    return select<D>(d, std::span<const W<D>>(s.slots.data() + v.offset, v.count), addr);
  }
  template <class D>
  void write_mem(D& d, StateT<D>& s, const W<D>& addr, const W<D>& val, B<D> g) const {
    const auto& v = this->layout_.var(mem_);
    store<D>(d, s.slots, v.offset, v.count, 1, addr, val, g);
  }
  template <class D>
  W<D> eff_addr(D& d, const W<D>& base, const W<D>& imm) const {
    return d.add(base, d.resize(imm, this->mc_.word_width));
  }

  // Architectural load value; an STL-initiating load reads the pre-store value of a matching pending store.
  template <class D>
  W<D> arch_load(D& d, StateT<D>& s, const W<D>& addr, B<D> init, StepOut<D>& out) const {
    W<D> v = load(d, s, addr);
    if (this->feature_ != SpecFeature::Stl) return v;
    const auto& l = this->layout_;
    B<D> stale = d.land(init, d.land(d.nonzero(s.slots[l.slot(pend_valid_)]), d.eq(s.slots[l.slot(pend_addr_)], addr)));
    if constexpr (!D::kSymbolic) {
      out.reads.push_back({pend_valid_, -1});
      out.reads.push_back({pend_addr_, -1});
      out.reads.push_back({pend_old_, -1});
    }
    return d.ite(stale, s.slots[l.slot(pend_old_)], v);
  }

  template <class D>
  void note_store(D& d, StateT<D>& s, const W<D>& addr, StepOut<D>& out) const {
    if (this->feature_ != SpecFeature::Stl) return;
    const auto& l = this->layout_;
    s.slots[l.slot(pend_old_)] = load(d, s, addr);
    s.slots[l.slot(pend_addr_)] = addr;
    s.slots[l.slot(pend_valid_)] = d.wconst(1, 1);
    if constexpr (!D::kSymbolic) {
      uint32_t a = addr.v;
      out.reads.push_back({mem_, static_cast<int>(a)});
      out.writes.push_back({pend_valid_, -1});
      out.writes.push_back({pend_addr_, -1});
      out.writes.push_back({pend_old_, -1});
    }
  }

  template <class D>
  static W<D> alu(D& d, const W<D>& fn, const W<D>& a, const W<D>& b) {
    W<D> slt = d.from_bool(d.ult(a, b), d.width(a));
    return d.ite(d.eqc(fn, 0), d.add(a, b), d.ite(d.eqc(fn, 1), d.bxor(a, b), slt));
  }

  // Semantics common to both models for AluOp / BrOp; returns false for other opcodes.
  template <class D>
  bool exec_simple(D& d, StateT<D>& s, const InstT<D>& in, StepOut<D>& out) const {
    if (in.op == kAlu) {
      W<D> a = reg(d, s, in.rs1), b = reg(d, s, in.rs2);
      W<D> r = alu(d, in.fn, a, b);
      set_reg(d, s, in.rd, r);
      out.src = {a, b};
      out.result = r;
      if constexpr (!D::kSymbolic) {
        out.reads = {{regfile_, static_cast<int>(in.rs1.v)}, {regfile_, static_cast<int>(in.rs2.v)}};
        out.writes = {{regfile_, static_cast<int>(in.rd.v)}};
      }
      return true;
    }
    if (in.op == kBr) {
      out.src = {reg(d, s, in.rs1)};
      if constexpr (!D::kSymbolic) out.reads = {{regfile_, static_cast<int>(in.rs1.v)}};
      return true;
    }
    return false;
  }

  // Taint edges for speculation, appended to every opcode's rules.
  void add_spec_taint(Opcode op, std::vector<TaintRule>& rules) const {
    if (this->feature_ == SpecFeature::None) return;
    if (this->is_initiator(op)) rules.push_back({{regfile_, mem_}, {ckpt_regfile_, ckpt_mem_}});
    rules.push_back({{ckpt_regfile_, ckpt_mem_}, {regfile_, mem_}});
    if (this->feature_ == SpecFeature::Stl) {
      if (op == kSt) rules.push_back({{regfile_, mem_}, {pend_valid_, pend_addr_, pend_old_}});
    }
  }

  void base_params() {
    this->params_["spec_feature"] = spec_feature_name(this->feature_);
    this->params_["spec_window"] = std::to_string(this->window_);
  }

  int regfile_ = -1, mem_ = -1;
  int ckpt_regfile_ = -1, ckpt_mem_ = -1, spec_left_ = -1;
  int pend_valid_ = -1, pend_addr_ = -1, pend_old_ = -1;
};

void check_spec(SpecFeature f, int window) {
  if (f != SpecFeature::None && window < 1) throw Error("spec_window must be >= 1");
}

class PlatCR : public ArchModel<PlatCR> {
 public:
  PlatCR(const MachineConfig& mc, const PlatCRParams& p) : p_(p) {
    mc.validate();
    if (p.reuse_buf_size < 1) throw Error("reuse_buf_size must be >= 1");
    check_spec(p.spec_feature, p.spec_window);
    name_ = "platcr";
    mc_ = mc;
    feature_ = p.spec_feature;
    window_ = p.spec_feature == SpecFeature::None ? 0 : p.spec_window;
    opcodes_ = {kLd, kSt, kMul, kAlu, kBr};
    int w = mc.word_width;
    add_arch_vars(w);
    rb_ = layout_.add(record_var("reuse_buf", p.reuse_buf_size, {{"valid", 1}, {"op1", w}, {"op2", w}, {"result", w}}));
    ptr_ = layout_.add(scalar_var("rb_ptr", VarClass::March, bits_for(p.reuse_buf_size), DefaultInit::Zero));
    count_ = layout_.add(scalar_var("mulcount", VarClass::March, kCounterWidth, DefaultInit::Zero));
    add_spec_vars();
    params_["reuse_buf_size"] = std::to_string(p.reuse_buf_size);
    base_params();
  }

  template <class D>
  void exec(D& d, StateT<D>& s, const InstT<D>& in, B<D> init, StepOut<D>& out, const StepOpts& o) const {
    if (exec_simple(d, s, in, out)) return;
    switch (in.op.kind) {
      case OpKind::Ld: {
        W<D> a = reg(d, s, in.rs1);
        W<D> addr = eff_addr(d, a, in.imm);
        if constexpr (!D::kSymbolic) out.reads = {{regfile_, static_cast<int>(in.rs1.v)}, {mem_, static_cast<int>(addr.v)}};
        W<D> v = arch_load(d, s, addr, init, out);
        set_reg(d, s, in.rd, v);
        out.src = {a};
        out.result = v;
        out.addr = addr;
        if constexpr (!D::kSymbolic) out.writes.push_back({regfile_, static_cast<int>(in.rd.v)});
        return;
      }
      case OpKind::St: {
        W<D> a = reg(d, s, in.rs1), val = reg(d, s, in.rs2);
        W<D> addr = eff_addr(d, a, in.imm);
        if constexpr (!D::kSymbolic)
          out.reads = {{regfile_, static_cast<int>(in.rs1.v)}, {regfile_, static_cast<int>(in.rs2.v)}};
        note_store(d, s, addr, out);
        write_mem(d, s, addr, val, d.tt());
        out.src = {a, val};
        out.addr = addr;
        if constexpr (!D::kSymbolic) out.writes.push_back({mem_, static_cast<int>(addr.v)});
        return;
      }
      case OpKind::Mul: {
        W<D> a = reg(d, s, in.rs1), b = reg(d, s, in.rs2);
        W<D> prod = d.mul(a, b);
        W<D> res = prod;
        if (!o.arch_only) res = mul_micro(d, s, a, b, prod);
        set_reg(d, s, in.rd, res);
        out.src = {a, b};
        out.result = res;
        if constexpr (!D::kSymbolic) {
          out.reads = {{regfile_, static_cast<int>(in.rs1.v)}, {regfile_, static_cast<int>(in.rs2.v)},
                       {rb_, -1}, {ptr_, -1}, {count_, -1}};
          out.writes = {{regfile_, static_cast<int>(in.rd.v)}, {rb_, -1}, {ptr_, -1}, {count_, -1}};
        }
        return;
      }
      default: throw Error(fmt::format("opcode {} not supported by platcr", in.op.name()));
    }
  }

  template <class D>
  void rollback(D&, StateT<D>&, B<D>) const {}

  template <class D>
  B<D> wf_impl(D& d, const StateT<D>& s) const {
    B<D> ok = ptr_in_range(d, s.slots[layout_.slot(ptr_)], p_.reuse_buf_size);
    for (int e = 0; e < p_.reuse_buf_size; ++e) {
      const auto& valid = s.slots[layout_.slot(rb_, e, 0)];
      const auto& op1 = s.slots[layout_.slot(rb_, e, 1)];
      const auto& op2 = s.slots[layout_.slot(rb_, e, 2)];
      const auto& res = s.slots[layout_.slot(rb_, e, 3)];
      ok = d.land(ok, d.lor(d.lnot(d.nonzero(valid)), d.eq(res, d.mul(op1, op2))));
    }
    return ok;
  }

  std::vector<TaintRule> taint_rules(Opcode op) const override {
    std::vector<TaintRule> r;
    switch (op.kind) {
      case OpKind::Ld: {
        TaintRule t{{regfile_, mem_}, {regfile_}};
        if (feature_ == SpecFeature::Stl) t.reads.insert({pend_valid_, pend_addr_, pend_old_});
        r.push_back(t);
        break;
      }
      case OpKind::St: r.push_back({{regfile_}, {mem_}}); break;
      case OpKind::Mul: r.push_back({{regfile_, rb_, ptr_}, {regfile_, rb_, ptr_, count_}}); break;
      case OpKind::Alu: r.push_back({{regfile_}, {regfile_}}); break;
      default: break;
    }
    add_spec_taint(op, r);
    return r;
  }

  ModelPtr with_speculation(SpecFeature f, int window) const override {
    PlatCRParams p = p_;
    p.spec_feature = f;
    p.spec_window = window;
    return std::make_shared<PlatCR>(mc_, p);
  }

 private:
  // Reuse-buffer lookup; on a miss the multiplier runs, mulcount increments and the FIFO slot is replaced.
  template <class D>
  W<D> mul_micro(D& d, StateT<D>& s, const W<D>& a, const W<D>& b, const W<D>& prod) const {
    int n = p_.reuse_buf_size;
    B<D> hit = d.ff();
    W<D> hres = prod;
    for (int e = n; e-- > 0;) {
      B<D> m = d.land(d.nonzero(s.slots[layout_.slot(rb_, e, 0)]),
                      d.land(d.eq(s.slots[layout_.slot(rb_, e, 1)], a), d.eq(s.slots[layout_.slot(rb_, e, 2)], b)));
      hres = d.ite(m, s.slots[layout_.slot(rb_, e, 3)], hres);
      hit = d.lor(hit, m);
    }
    B<D> miss = d.lnot(hit);
    auto& cnt = s.slots[layout_.slot(count_)];
    cnt = d.ite(miss, d.add(cnt, d.wconst(1, kCounterWidth)), cnt);
    auto& ptr = s.slots[layout_.slot(ptr_)];
    size_t base = layout_.slot(rb_), stride = layout_.var(rb_).stride();
    store<D>(d, s.slots, base + 0, n, stride, ptr, d.wconst(1, 1), miss);
    store<D>(d, s.slots, base + 1, n, stride, ptr, a, miss);
    store<D>(d, s.slots, base + 2, n, stride, ptr, b, miss);
    store<D>(d, s.slots, base + 3, n, stride, ptr, prod, miss);
    ptr = d.ite(miss, ptr_next(d, ptr, n), ptr);
    return d.ite(hit, hres, prod);
  }

  PlatCRParams p_;
  int rb_ = -1, ptr_ = -1, count_ = -1;
};

class PlatSS : public ArchModel<PlatSS> {
 public:
  PlatSS(const MachineConfig& mc, const PlatSSParams& p) : p_(p) {
    mc.validate();
    if (p.lsqc_entries < 1) throw Error("lsqc_entries must be >= 1");
    if (p.set_index_width < 1 || p.set_index_width >= mc.word_width)
      throw Error("set_index_width must satisfy 1 <= set_index_width < word_width");
    check_spec(p.spec_feature, p.spec_window);
    name_ = "platss";
    mc_ = mc;
    feature_ = p.spec_feature;
    window_ = p.spec_feature == SpecFeature::None ? 0 : p.spec_window;
    opcodes_ = {kLd, kSt, kMul, kAlu, kBr};
    int w = mc.word_width;
    add_arch_vars(w);
    lsqc_ = layout_.add(record_var("lsqc", p.lsqc_entries,
                                   {{"valid", 1}, {"is_load", 1}, {"addr", w}, {"data", w}, {"spec", 1}}));
    ptr_ = layout_.add(scalar_var("lptr", VarClass::March, bits_for(p.lsqc_entries), DefaultInit::Zero));
    count_ = layout_.add(scalar_var("lscount", VarClass::March, kCounterWidth, DefaultInit::Zero));
    add_spec_vars();
    params_["lsqc_entries"] = std::to_string(p.lsqc_entries);
    params_["set_index_width"] = std::to_string(p.set_index_width);
    params_["store_invalidation"] =
        p.store_invalidation == StoreInvalidation::PerAddress ? "per-address" : "per-set-index";
    base_params();
  }

  template <class D>
  void exec(D& d, StateT<D>& s, const InstT<D>& in, B<D> init, StepOut<D>& out, const StepOpts& o) const {
    if (exec_simple(d, s, in, out)) return;
    switch (in.op.kind) {
      case OpKind::Ld: {
        W<D> a = reg(d, s, in.rs1);
        W<D> addr = eff_addr(d, a, in.imm);
        if constexpr (!D::kSymbolic) out.reads = {{regfile_, static_cast<int>(in.rs1.v)}, {mem_, static_cast<int>(addr.v)}};
        W<D> mv = arch_load(d, s, addr, init, out);
        W<D> v = mv;
        if (!o.arch_only) {
          auto [found, fd] = lookup(d, s, addr);
          B<D> hit = d.land(found, d.lnot(init));
          v = d.ite(hit, fd, mv);
          B<D> miss = d.lnot(hit);
          bump(d, s, miss);
          insert(d, s, miss, true, addr, v, s.spec);
        }
        set_reg(d, s, in.rd, v);
        out.src = {a};
        out.result = v;
        out.addr = addr;
        if constexpr (!D::kSymbolic) {
          out.reads.insert(out.reads.end(), {{lsqc_, -1}, {ptr_, -1}, {count_, -1}});
          out.writes = {{regfile_, static_cast<int>(in.rd.v)}, {lsqc_, -1}, {ptr_, -1}, {count_, -1}};
        }
        return;
      }
      case OpKind::St: {
        W<D> a = reg(d, s, in.rs1), val = reg(d, s, in.rs2);
        W<D> addr = eff_addr(d, a, in.imm);
        if constexpr (!D::kSymbolic)
          out.reads = {{regfile_, static_cast<int>(in.rs1.v)}, {regfile_, static_cast<int>(in.rs2.v)}};
        note_store(d, s, addr, out);
        if (o.arch_only) {
          write_mem(d, s, addr, val, d.tt());
        } else if (p_.store_invalidation == StoreInvalidation::PerAddress) {
          auto [found, fd] = lookup(d, s, addr);
          B<D> write = d.lnot(d.land(found, d.eq(fd, val)));
          write_mem(d, s, addr, val, write);
          bump(d, s, write);
          insert(d, s, write, false, addr, val, s.spec);
        } else {
          write_mem(d, s, addr, val, d.tt());
          bump(d, s, d.tt());
          W<D> idx = index_of(d, addr);
          for (int e = 0; e < p_.lsqc_entries; ++e) {
            auto& valid = s.slots[layout_.slot(lsqc_, e, 0)];
            B<D> same = d.eq(index_of(d, s.slots[layout_.slot(lsqc_, e, 2)]), idx);
            valid = d.ite(same, d.wconst(0, 1), valid);
          }
        }
        out.src = {a, val};
        out.addr = addr;
        if constexpr (!D::kSymbolic) {
          out.reads.insert(out.reads.end(), {{lsqc_, -1}, {ptr_, -1}, {count_, -1}});
          out.writes.insert(out.writes.end(), {{mem_, static_cast<int>(addr.v)}, {lsqc_, -1}, {ptr_, -1}, {count_, -1}});
        }
        return;
      }
      case OpKind::Mul: {
        W<D> a = reg(d, s, in.rs1), b = reg(d, s, in.rs2);
        W<D> r = d.mul(a, b);
        set_reg(d, s, in.rd, r);
        out.src = {a, b};
        out.result = r;
        if constexpr (!D::kSymbolic) {
          out.reads = {{regfile_, static_cast<int>(in.rs1.v)}, {regfile_, static_cast<int>(in.rs2.v)}};
          out.writes = {{regfile_, static_cast<int>(in.rd.v)}};
        }
        return;
      }
      default: throw Error(fmt::format("opcode {} not supported by platss", in.op.name()));
    }
  }

  // Entries filled inside a squashed frame are dropped so the queue stays coherent with restored memory.
  template <class D>
  void rollback(D& d, StateT<D>& s, B<D> rb) const {
    bool k;
    if (d.known_bool(rb, &k) && !k) return;
    for (int e = 0; e < p_.lsqc_entries; ++e) {
      auto& valid = s.slots[layout_.slot(lsqc_, e, 0)];
      auto& tag = s.slots[layout_.slot(lsqc_, e, 4)];
      B<D> drop = d.land(rb, d.nonzero(tag));
      valid = d.ite(drop, d.wconst(0, 1), valid);
      tag = d.ite(rb, d.wconst(0, 1), tag);
    }
  }

  template <class D>
  B<D> wf_impl(D& d, const StateT<D>& s) const {
    B<D> ok = ptr_in_range(d, s.slots[layout_.slot(ptr_)], p_.lsqc_entries);
    for (int e = 0; e < p_.lsqc_entries; ++e) {
      const auto& valid = s.slots[layout_.slot(lsqc_, e, 0)];
      const auto& addr = s.slots[layout_.slot(lsqc_, e, 2)];
      const auto& data = s.slots[layout_.slot(lsqc_, e, 3)];
      const auto& tag = s.slots[layout_.slot(lsqc_, e, 4)];
      ok = d.land(ok, d.lor(d.lnot(d.nonzero(valid)), d.eq(data, load(d, s, addr))));
      ok = d.land(ok, d.lnot(d.nonzero(tag)));
    }
    return ok;
  }

  std::vector<TaintRule> taint_rules(Opcode op) const override {
    std::vector<TaintRule> r;
    switch (op.kind) {
      case OpKind::Ld: {
        TaintRule t{{regfile_, mem_, lsqc_, ptr_}, {regfile_, lsqc_, ptr_, count_}};
        if (feature_ == SpecFeature::Stl) t.reads.insert({pend_valid_, pend_addr_, pend_old_});
        r.push_back(t);
        break;
      }
      case OpKind::St: r.push_back({{regfile_, lsqc_, ptr_}, {mem_, lsqc_, ptr_, count_}}); break;
      case OpKind::Mul:
      case OpKind::Alu: r.push_back({{regfile_}, {regfile_}}); break;
      default: break;
    }
    add_spec_taint(op, r);
    return r;
  }

  ModelPtr with_speculation(SpecFeature f, int window) const override {
    PlatSSParams p = p_;
    p.spec_feature = f;
    p.spec_window = window;
    return std::make_shared<PlatSS>(mc_, p);
  }

 private:
  template <class D>
  W<D> index_of(D& d, const W<D>& addr) const {
    return d.slice(addr, 2, p_.set_index_width + 1);
  }

  template <class D>
  void bump(D& d, StateT<D>& s, B<D> g) const {
    auto& cnt = s.slots[layout_.slot(count_)];
    cnt = d.ite(g, d.add(cnt, d.wconst(1, kCounterWidth)), cnt);
  }

  // Newest valid entry with a matching address, scanning backwards from the insertion pointer.
  template <class D>
  std::pair<B<D>, W<D>> lookup(D& d, const StateT<D>& s, const W<D>& addr) const {
    int n = p_.lsqc_entries;
    const W<D>& ptr = s.slots[layout_.slot(ptr_)];
    std::vector<B<D>> match(n);
    for (int e = 0; e < n; ++e)
      match[e] = d.land(d.nonzero(s.slots[layout_.slot(lsqc_, e, 0)]), d.eq(s.slots[layout_.slot(lsqc_, e, 2)], addr));
    auto scan = [&](int p) {
      B<D> f = d.ff();
      W<D> v = d.wconst(0, mc_.word_width);
      // oldest first so the newest match wins
      for (int k = n; k-- > 0;) {
        int e = ((p - 1 - k) % n + n) % n;
        f = d.lor(f, match[e]);
        v = d.ite(match[e], s.slots[layout_.slot(lsqc_, e, 3)], v);
      }
      return std::pair<B<D>, W<D>>{f, v};
    };
    uint32_t known;
    if (d.known(ptr, &known)) return scan(static_cast<int>(known));
    auto [f, v] = scan(0);
    for (int p = 1; p < n; ++p) {
      auto [fp, vp] = scan(p);
      B<D> sel = d.eqc(ptr, static_cast<uint32_t>(p));
      f = d.bite(sel, fp, f);
      v = d.ite(sel, vp, v);
    }
    return {f, v};
  }

  template <class D>
  void insert(D& d, StateT<D>& s, B<D> g, bool is_load, const W<D>& addr, const W<D>& data, B<D> spec) const {
    int n = p_.lsqc_entries;
    auto& ptr = s.slots[layout_.slot(ptr_)];
    size_t base = layout_.slot(lsqc_), stride = layout_.var(lsqc_).stride();
    store<D>(d, s.slots, base + 0, n, stride, ptr, d.wconst(1, 1), g);
    store<D>(d, s.slots, base + 1, n, stride, ptr, d.wconst(is_load ? 1 : 0, 1), g);
    store<D>(d, s.slots, base + 2, n, stride, ptr, addr, g);
    store<D>(d, s.slots, base + 3, n, stride, ptr, data, g);
    store<D>(d, s.slots, base + 4, n, stride, ptr, d.from_bool(spec, 1), g);
    ptr = d.ite(g, ptr_next(d, ptr, n), ptr);
  }

  PlatSSParams p_;
  int lsqc_ = -1, ptr_ = -1, count_ = -1;
};

class PlatSynth : public ModelT<PlatSynth> {
 public:
  PlatSynth(int pdep, int word_width) {
    if (pdep < 1) throw Error("pdep must be >= 1");
    mc_ = MachineConfig{word_width, 2, std::min(word_width, 4)};
    mc_.validate();
    name_ = "platsynth";
    for (int i = 0; i <= pdep; ++i) {
      bufs_.push_back(layout_.add(scalar_var(fmt::format("buf_{}", i), VarClass::Arch, word_width, DefaultInit::Free)));
      if (i > 0) opcodes_.push_back(Opcode::synth(i));
    }
    params_["pdep"] = std::to_string(pdep);
  }

  template <class D>
  StepOut<D> step_impl(D& d, StateT<D>& s, const InstT<D>& in, Mode, B<D>, const StepOpts&) const {
    int i = in.op.index;
    if (in.op.kind != OpKind::Synth || i < 1 || i >= static_cast<int>(bufs_.size()))
      throw Error(fmt::format("opcode {} not supported by platsynth", in.op.name()));
    StepOut<D> out;
    out.initiated = d.ff();
    out.rolled_back = d.ff();
    W<D> v = s.slots[layout_.slot(bufs_[i - 1])];
    s.slots[layout_.slot(bufs_[i])] = v;
    out.src = {v};
    out.result = v;
    if constexpr (!D::kSymbolic) {
      out.reads = {{bufs_[i - 1], -1}};
      out.writes = {{bufs_[i], -1}};
    }
    return out;
  }

  template <class D>
  B<D> wf_impl(D& d, const StateT<D>&) const {
    return d.tt();
  }

  std::vector<TaintRule> taint_rules(Opcode op) const override {
    int i = op.index;
    if (op.kind != OpKind::Synth || i < 1 || i >= static_cast<int>(bufs_.size())) return {};
    return {TaintRule{{bufs_[i - 1]}, {bufs_[i]}}};
  }

  ModelPtr with_speculation(SpecFeature f, int) const override {
    if (f == SpecFeature::None) return std::make_shared<PlatSynth>(*this);
    throw Error(fmt::format("platsynth has no opcodes for {} speculation", spec_feature_name(f)));
  }

 private:
  std::vector<int> bufs_;
};

}  // namespace

ModelPtr build_platcr(const MachineConfig& mc, const PlatCRParams& p) { return std::make_shared<PlatCR>(mc, p); }

ModelPtr build_platss(const MachineConfig& mc, const PlatSSParams& p) { return std::make_shared<PlatSS>(mc, p); }

ModelPtr build_platsynth(int pdep, int word_width) { return std::make_shared<PlatSynth>(pdep, word_width); }

ModelPtr attach_speculation(const ModelPtr& m, SpecFeature f, int window) {
  if (f == SpecFeature::Branch && !m->supports(kBr)) throw Error("branch speculation needs BrOp");
  if (f == SpecFeature::Stl && !(m->supports(kLd) && m->supports(kSt))) throw Error("stl speculation needs LdOp and StOp");
  return m->with_speculation(f, window);
}

}  // namespace sempat
