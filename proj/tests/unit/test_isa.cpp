#include <gtest/gtest.h>

#include <random>

#include "sempat/isa.hpp"

using namespace sempat;

TEST(Isa, ParsesMul) {
  auto p = parse_program("mul r1, r2, r3");
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p.instructions[0], Instruction::mul(1, 2, 3));
}

TEST(Isa, EmptyProgram) {
  EXPECT_EQ(parse_program("").size(), 0u);
  EXPECT_EQ(render_program(Program{}), "");
}

TEST(Isa, RegisterOutOfRange) {
  try {
    parse_program("ld r1, 4(r9)");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("register index out of range"), std::string::npos);
    EXPECT_EQ(e.line(), 1);
  }
}

TEST(Isa, RenderSingleMul) {
  Program p;
  p.instructions.push_back(Instruction::mul(1, 2, 3));
  EXPECT_EQ(render_program(p), "mul r1, r2, r3\n");
}

TEST(Isa, LabelOnOwnLine) {
  auto p = parse_program("br r1, out\nld r2, 0x3(r0)\nout:\nmul r1, r2, r3\n");
  ASSERT_EQ(p.labels.at("out"), 2u);
  EXPECT_EQ(p.instructions[1], Instruction::ld(2, 3, 0));
  auto text = render_program(p);
  EXPECT_NE(text.find("\nout:\n"), std::string::npos);
  EXPECT_EQ(parse_program(text), p);
}

TEST(Isa, Errors) {
  EXPECT_THROW(parse_program("foo r1, r2"), ParseError);
  EXPECT_THROW(parse_program("mul r1, r2"), ParseError);
  EXPECT_THROW(parse_program("br r1, nowhere"), ParseError);
  EXPECT_THROW(parse_program("top:\nmul r1, r2, r3\nbr r1, top"), ParseError);
  EXPECT_THROW(parse_program("ld r1, 99(r0)"), ParseError);
}

TEST(Isa, CommentsAndHex) {
  auto p = parse_program("# header\n  aluxor r0, r1, r2  # trailing\nst r3, 0xf(r1)\n");
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p.instructions[0], Instruction::alu(AluFn::Xor, 0, 1, 2));
  EXPECT_EQ(p.instructions[1], Instruction::st(3, 15, 1));
}

TEST(Isa, AluSltUnsigned) {
  EXPECT_EQ(alu_apply(AluFn::Slt, 1, 15, 4), 1u);
  EXPECT_EQ(alu_apply(AluFn::Slt, 15, 1, 4), 0u);
  EXPECT_EQ(alu_apply(AluFn::Add, 9, 9, 4), 2u);
}

TEST(Isa, MachineConfigInvariants) {
  EXPECT_THROW((MachineConfig{1, 4, 1}.validate()), Error);
  EXPECT_THROW((MachineConfig{4, 1, 4}.validate()), Error);
  EXPECT_THROW((MachineConfig{4, 4, 5}.validate()), Error);
  EXPECT_NO_THROW(MachineConfig{}.validate());
}

namespace {

Instruction random_instruction(std::mt19937_64& rng, const MachineConfig& mc) {
  int R = mc.register_count;
  uint32_t imm = rng() & MachineConfig::mask(mc.immediate_width);
  switch (rng() % 5) {
    case 0: return Instruction::mul(rng() % R, rng() % R, rng() % R);
    case 1: return Instruction::alu(static_cast<AluFn>(rng() % kAluFnCount), rng() % R, rng() % R, rng() % R);
    case 2: return Instruction::ld(rng() % R, imm, rng() % R);
    case 3: return Instruction::st(rng() % R, imm, rng() % R);
    default: return Instruction::br(rng() % R, "");
  }
}

}  // namespace

TEST(Isa, RenderParseRoundTripRandom) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    MachineConfig mc{2 + static_cast<int>(rng() % 7), 2 + static_cast<int>(rng() % 7),
                     1 + static_cast<int>(rng() % 8)};
    Program p;
    size_t n = rng() % 9;
    for (size_t i = 0; i < n; ++i) p.instructions.push_back(random_instruction(rng, mc));
    int next_label = 0;
    for (size_t i = 0; i < n; ++i) {
      auto& in = p.instructions[i];
      if (in.op != kBr) continue;
      size_t target = i + 1 + rng() % (n - i);
      std::string name;
      for (const auto& [l, idx] : p.labels)
        if (idx == target && rng() % 2) name = l;
      if (name.empty()) {
        name = "l" + std::to_string(next_label++);
        p.labels[name] = target;
      }
      in.target = name;
    }
    auto text = render_program(p);
    Program back;
    ASSERT_NO_THROW(back = parse_program(text, mc)) << text;
    ASSERT_EQ(back, p) << text;
    EXPECT_EQ(render_program(back), text);
  }
}
