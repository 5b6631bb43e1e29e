#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sempat {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& msg);
  int line() const { return line_; }

 private:
  int line_;
};

struct MachineConfig {
  int word_width = 4;
  int register_count = 4;
  int immediate_width = 4;

  void validate() const;
  uint32_t word_mask() const { return mask(word_width); }
  int reg_bits() const;
  static uint32_t mask(int w) { return w >= 32 ? 0xffffffffu : ((1u << w) - 1u); }
  bool operator==(const MachineConfig&) const = default;
};

enum class OpKind : uint8_t { Ld, St, Mul, Alu, Br, Synth };

// Synthetic opcodes carry their chain index (Op_1..Op_k).
struct Opcode {
  OpKind kind = OpKind::Ld;
  uint8_t index = 0;

  auto operator<=>(const Opcode&) const = default;
  std::string name() const;
  static Opcode parse(std::string_view name);
  static Opcode synth(int i) { return Opcode{OpKind::Synth, static_cast<uint8_t>(i)}; }
};

inline constexpr Opcode kLd{OpKind::Ld, 0};
inline constexpr Opcode kSt{OpKind::St, 0};
inline constexpr Opcode kMul{OpKind::Mul, 0};
inline constexpr Opcode kAlu{OpKind::Alu, 0};
inline constexpr Opcode kBr{OpKind::Br, 0};

struct Roles {
  bool rd = false;
  bool rs1 = false;
  bool rs2 = false;
  bool imm = false;
  bool fn = false;
  bool target = false;
};

Roles roles(OpKind k);
inline bool is_memory(OpKind k) { return k == OpKind::Ld || k == OpKind::St; }

enum class AluFn : uint8_t { Add = 0, Xor = 1, Slt = 2 };
inline constexpr int kAluFnCount = 3;
std::string alu_fn_name(AluFn f);
uint32_t alu_apply(AluFn f, uint32_t a, uint32_t b, int width);

struct Instruction {
  Opcode op;
  std::optional<uint8_t> rd;
  std::optional<uint8_t> rs1;
  std::optional<uint8_t> rs2;
  std::optional<uint32_t> imm;
  std::optional<AluFn> fn;
  std::string target;

  bool operator==(const Instruction&) const = default;

  static Instruction mul(int rd, int rs1, int rs2);
  static Instruction alu(AluFn f, int rd, int rs1, int rs2);
  static Instruction ld(int rd, uint32_t imm, int rs1);
  static Instruction st(int rs2, uint32_t imm, int rs1);
  static Instruction br(int rs1, std::string target);
  static Instruction synth(int i);
};

// Throws Error when the populated fields do not match the opcode or exceed the machine bounds.
void validate_instruction(const Instruction& in, const MachineConfig& mc);
std::string render_instruction(const Instruction& in);

struct Program {
  std::vector<Instruction> instructions;
  std::map<std::string, size_t> labels;

  bool operator==(const Program&) const = default;
  size_t size() const { return instructions.size(); }
};

Program parse_program(std::string_view text, const MachineConfig& mc = {});
std::string render_program(const Program& p);
void validate_program(const Program& p, const MachineConfig& mc);

}  // namespace sempat
