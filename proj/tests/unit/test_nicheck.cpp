#include <gtest/gtest.h>

#include <random>

#include <fmt/format.h>

#include "sempat/models.hpp"
#include "sempat/nicheck.hpp"

using namespace sempat;

namespace {

MachineConfig mc4() { return MachineConfig{4, 4, 4}; }

std::set<int> ids(const PlatformModel& m, std::initializer_list<const char*> names) {
  std::set<int> out;
  for (auto n : names) out.insert(m.layout().find(n));
  return out;
}

SearchBudget sat_budget() { return SearchBudget{}; }

SearchBudget enum_budget() {
  SearchBudget b;
  b.engine = EngineKind::Enum;
  return b;
}

NIProperty cr_prop(const PlatformModel& m) { return make_property(m, {"mem"}, {"mulcount"}); }
NIProperty synth_prop(const PlatformModel& m, int k) {
  return make_property(m, {"buf_0"}, {fmt::format("buf_{}", k)});
}

std::vector<Opcode> ops(std::initializer_list<Opcode> o) { return o; }

}  // namespace

TEST(Taint, SynthCopy) {
  auto m = build_platsynth(2);
  EXPECT_EQ(taint_step(*m, ids(*m, {"buf_0"}), Opcode::synth(1)), ids(*m, {"buf_0", "buf_1"}));
}

TEST(Taint, MulIgnoresMem) {
  auto m = build_platcr(mc4(), {});
  EXPECT_EQ(taint_step(*m, ids(*m, {"mem"}), kMul), ids(*m, {"mem"}));
}

TEST(Taint, EmptyStaysEmpty) {
  for (auto m : {build_platcr(mc4(), {}), build_platss(mc4(), {}), build_platsynth(3)})
    for (Opcode op : m->opcodes()) EXPECT_TRUE(taint_step(*m, {}, op).empty());
}

TEST(Taint, PropagationExamples) {
  auto m = build_platcr(mc4(), {});
  auto sec = ids(*m, {"mem"}), obs = ids(*m, {"mulcount"});
  EXPECT_TRUE(taint_propagates(*m, ops({kLd, kMul}), sec, obs));
  for (Opcode op : m->opcodes()) EXPECT_FALSE(taint_propagates(*m, {op}, sec, obs)) << op.name();

  for (int k = 2; k <= 5; ++k) {
    auto s = build_platsynth(k);
    std::vector<Opcode> chain;
    for (int i = 1; i < k; ++i) chain.push_back(Opcode::synth(i));
    auto kobs = std::set<int>{s->layout().find(fmt::format("buf_{}", k))};
    EXPECT_FALSE(taint_propagates(*s, chain, ids(*s, {"buf_0"}), kobs));
    chain.push_back(Opcode::synth(k));
    EXPECT_TRUE(taint_propagates(*s, chain, ids(*s, {"buf_0"}), kobs));
  }
}

TEST(Taint, RandomizedSoundness) {
  std::vector<ModelPtr> models = {
      build_platcr(mc4(), {}),
      build_platcr(mc4(), {3, SpecFeature::Branch, 2}),
      build_platcr(mc4(), {2, SpecFeature::Stl, 3}),
      build_platss(mc4(), {}),
      build_platss(mc4(), {2, 1, StoreInvalidation::PerSetIndex, SpecFeature::None, 4}),
      build_platss(mc4(), {3, 1, StoreInvalidation::PerAddress, SpecFeature::Stl, 2}),
      build_platss(mc4(), {2, 1, StoreInvalidation::PerAddress, SpecFeature::Branch, 4}),
      build_platsynth(4),
  };
  uint64_t seed = 7;
  for (const auto& m : models) {
    auto r = taint_soundness_check(m, 1500, seed++);
    EXPECT_EQ(r.failures, 0) << m->fingerprint() << ": " << r.first_failure;
    EXPECT_GT(r.effective, r.trials / 4) << m->fingerprint();
  }
}

TEST(FindViolation, LdMulIsSafe) {
  auto m = build_platcr(mc4(), {});
  auto r = find_violation(m, cr_prop(*m), Code::from_template(ops({kLd, kMul})), {}, sat_budget());
  EXPECT_EQ(r.verdict, Verdict::None);
}

TEST(FindViolation, MulLdMulLeaks) {
  auto m = build_platcr(mc4(), {});
  auto p = cr_prop(*m);
  auto r = find_violation(m, p, Code::from_template(ops({kMul, kLd, kMul})), {}, sat_budget());
  ASSERT_EQ(r.verdict, Verdict::Found);
  std::string why;
  EXPECT_TRUE(verify_witness(*m, p, *r.witness, {}, Formula::truth(), &why)) << why;
  EXPECT_NE(m->get(r.witness->t1.states.back(), "mulcount"), m->get(r.witness->t2.states.back(), "mulcount"));
}

TEST(FindViolation, SynthPairDiffersOnBuf0) {
  auto m = build_platsynth(2);
  auto p = synth_prop(*m, 2);
  for (auto b : {sat_budget(), enum_budget()}) {
    auto r = find_violation(m, p, Code::from_template({Opcode::synth(1), Opcode::synth(2)}), {}, b);
    ASSERT_EQ(r.verdict, Verdict::Found);
    EXPECT_NE(m->get(r.witness->sigma1, "buf_0"), m->get(r.witness->sigma2, "buf_0"));
    EXPECT_TRUE(verify_witness(*m, p, *r.witness, {}, Formula::truth()));
  }
}

TEST(FindViolation, EnumCapIsInconclusive) {
  auto m = build_platsynth(2);
  auto b = enum_budget();
  b.max_pairs = 1;
  auto r = find_violation(m, synth_prop(*m, 2), Code::from_template({Opcode::synth(2)}), {}, b);
  EXPECT_EQ(r.verdict, Verdict::Unknown);
}

TEST(FindViolation, ConstraintRestrictsWitness) {
  auto m = build_platcr(mc4(), {});
  auto p = cr_prop(*m);
  auto code = Code::from_template(ops({kMul, kLd, kMul}));
  auto g = default_grammar();
  Constraint c = {parse_atom(g, "datadep(1,2)"), parse_atom(g, "srcdata_reg(0,r2)")};
  auto r = find_violation(m, p, code, c, sat_budget());
  ASSERT_EQ(r.verdict, Verdict::Found);
  EvalContext ctx{m.get(), &r.witness->t1, &r.witness->t2, 0};
  EXPECT_TRUE(eval_constraint(c, {0, 1, 2}, ctx));
  const auto& prog = r.witness->program;
  EXPECT_TRUE(prog[0].rs1 == 2 || prog[0].rs2 == 2);
}

TEST(FindViolation, TamperedWitnessRejected) {
  auto m = build_platcr(mc4(), {});
  auto p = cr_prop(*m);
  auto r = find_violation(m, p, Code::from_template(ops({kMul, kLd, kMul})), {}, sat_budget());
  ASSERT_EQ(r.verdict, Verdict::Found);
  Witness w = *r.witness;
  w.sigma2 = w.sigma1;
  w.t2 = w.t1;
  std::string why;
  EXPECT_FALSE(verify_witness(*m, p, w, {}, Formula::truth(), &why));
  w = *r.witness;
  m->set(w.sigma2, "regfile", m->get(w.sigma2, "regfile", 1) + 1, 1);
  EXPECT_FALSE(verify_witness(*m, p, w, {}, Formula::truth(), &why));
}

TEST(FindViolation, SatAgreesWithEnumOnSmallMachine) {
  MachineConfig mc{2, 2, 2};
  std::vector<ModelPtr> models = {build_platcr(mc, {1, SpecFeature::None, 4}),
                                  build_platss(mc, {1, 1, StoreInvalidation::PerAddress, SpecFeature::None, 4}),
                                  build_platcr(mc, {1, SpecFeature::Branch, 2})};
  for (const auto& m : models) {
    auto obs = m->layout().find("mulcount") >= 0 ? "mulcount" : "lscount";
    auto p = make_property(*m, {"mem"}, {obs});
    p.init.secret_cells = 1;
    std::vector<std::vector<Opcode>> tmpls;
    for (Opcode a : m->opcodes()) {
      tmpls.push_back({a});
      for (Opcode b : m->opcodes()) tmpls.push_back({a, b});
    }
    for (const auto& t : tmpls) {
      auto code = Code::from_template(t);
      auto rs = find_violation(m, p, code, {}, sat_budget());
      auto re = find_violation(m, p, code, {}, enum_budget());
      std::string name;
      for (auto o : t) name += o.name() + " ";
      ASSERT_NE(re.verdict, Verdict::Unknown);
      EXPECT_EQ(rs.verdict, re.verdict) << m->fingerprint() << " " << name;
      if (re.witness) EXPECT_TRUE(verify_witness(*m, p, *re.witness, {}, Formula::truth()));
    }
  }
}

TEST(FindViolation, EnumThreadsDeterministic) {
  MachineConfig mc{2, 2, 2};
  auto m = build_platcr(mc, {1, SpecFeature::None, 4});
  auto p = make_property(*m, {"mem"}, {"mulcount"});
  auto code = Code::from_template(ops({kMul, kLd, kMul}));
  auto b = enum_budget();
  auto one = find_violation(m, p, code, {}, b);
  b.jobs = 3;
  auto three = find_violation(m, p, code, {}, b);
  ASSERT_EQ(one.verdict, Verdict::Found);
  ASSERT_EQ(three.verdict, Verdict::Found);
  EXPECT_EQ(one.witness->program, three.witness->program);
  EXPECT_EQ(one.witness->sigma1, three.witness->sigma1);
  EXPECT_EQ(one.witness->sigma2, three.witness->sigma2);
}

TEST(FindViolation, SynthAgreesWithHyperUpToThree) {
  auto m = build_platsynth(2);
  auto p = synth_prop(*m, 2);
  std::vector<std::vector<Opcode>> tmpls = {{}};
  for (int len = 1; len <= 3; ++len) {
    std::vector<std::vector<Opcode>> next;
    for (const auto& t : tmpls)
      for (Opcode o : m->opcodes()) {
        auto u = t;
        u.push_back(o);
        next.push_back(u);
      }
    tmpls = next;
    for (const auto& t : tmpls) {
      auto r = find_violation(m, p, Code::from_template(t), {}, enum_budget());
      std::vector<Instruction> prog;
      for (Opcode o : t) prog.push_back(Instruction::synth(o.index));
      auto h = check_program_hyper(m, p, prog, {}, enum_budget());
      EXPECT_EQ(r.verdict == Verdict::Found, h.verdict == HyperVerdict::Unsafe);
    }
  }
}

namespace {

// Priming mul, bounds-check branch, load through the checked register, dependent mul.
std::vector<Instruction> v1_gadget() {
  return parse_program("mul r0, r3, r3\nbr r1, L\nld r2, 0(r1)\nmul r0, r2, r2\nL:\n").instructions;
}

}  // namespace

TEST(Hyper, EmptyProgramSafe) {
  auto m = build_platcr(mc4(), {});
  EXPECT_EQ(check_program_hyper(m, cr_prop(*m), {}, {}, sat_budget()).verdict, HyperVerdict::Safe);
}

TEST(Hyper, SpectreV1Gadget) {
  auto spec = build_platcr(mc4(), {2, SpecFeature::Branch, 4});
  auto flat = build_platcr(mc4(), {});
  std::vector<BranchAssume> fallthrough = {{1, false}};
  auto p = make_property(*spec, {"mem[8..15]"}, {"mulcount"});
  auto r = check_program_hyper(spec, p, v1_gadget(), fallthrough, sat_budget());
  ASSERT_EQ(r.verdict, HyperVerdict::Unsafe);
  EXPECT_TRUE(r.witness->t1.steps[1].initiated);
  SessionOptions o;
  o.assumptions = fallthrough;
  EXPECT_TRUE(verify_witness(*spec, p, *r.witness, o, Formula::truth()));
  auto pf = make_property(*flat, {"mem[8..15]"}, {"mulcount"});
  EXPECT_EQ(check_program_hyper(flat, pf, v1_gadget(), fallthrough, sat_budget()).verdict, HyperVerdict::Safe);
}

TEST(Hyper, WitnessRendersProgram) {
  auto m = build_platcr(mc4(), {2, SpecFeature::Branch, 4});
  auto p = make_property(*m, {"mem[8..15]"}, {"mulcount"});
  auto r = check_program_hyper(m, p, v1_gadget(), {{1, false}}, sat_budget());
  ASSERT_TRUE(r.witness);
  auto text = render_witness(*m, *r.witness);
  EXPECT_NE(text.find("br r1, L"), std::string::npos);
  EXPECT_NE(text.find("# choices: 1"), std::string::npos);
}
