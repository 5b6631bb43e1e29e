#include "sempat/isa.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include <fmt/format.h>

namespace sempat {

ParseError::ParseError(int line, const std::string& msg)
    : Error(fmt::format("line {}: {}", line, msg)), line_(line) {}

void MachineConfig::validate() const {
  if (word_width < 2 || word_width > 16) throw Error("word_width must be in [2, 16]");
  if (register_count < 2 || register_count > 64) throw Error("register_count must be in [2, 64]");
  if (immediate_width < 1 || immediate_width > word_width)
    throw Error("immediate_width must be in [1, word_width]");
}

int MachineConfig::reg_bits() const {
  int b = 1;
  while ((1 << b) < register_count) ++b;
  return b;
}

std::string Opcode::name() const {
  switch (kind) {
    case OpKind::Ld: return "LdOp";
    case OpKind::St: return "StOp";
    case OpKind::Mul: return "MulOp";
    case OpKind::Alu: return "AluOp";
    case OpKind::Br: return "BrOp";
    case OpKind::Synth: return fmt::format("Op_{}", index);
  }
  return "?";
}

Opcode Opcode::parse(std::string_view n) {
  if (n == "LdOp") return kLd;
  if (n == "StOp") return kSt;
  if (n == "MulOp") return kMul;
  if (n == "AluOp") return kAlu;
  if (n == "BrOp") return kBr;
  if (n.size() > 3 && n.substr(0, 3) == "Op_") {
    int v = 0;
    auto sv = n.substr(3);
    auto [p, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
    if (ec == std::errc() && p == sv.data() + sv.size() && v >= 1 && v <= 255) return synth(v);
  }
  throw Error(fmt::format("unknown opcode '{}'", n));
}

Roles roles(OpKind k) {
  switch (k) {
    case OpKind::Ld: return {.rd = true, .rs1 = true, .imm = true};
    case OpKind::St: return {.rs1 = true, .rs2 = true, .imm = true};
    case OpKind::Mul: return {.rd = true, .rs1 = true, .rs2 = true};
    case OpKind::Alu: return {.rd = true, .rs1 = true, .rs2 = true, .fn = true};
    case OpKind::Br: return {.rs1 = true, .target = true};
    case OpKind::Synth: return {};
  }
  return {};
}

std::string alu_fn_name(AluFn f) {
  switch (f) {
    case AluFn::Add: return "add";
    case AluFn::Xor: return "xor";
    case AluFn::Slt: return "slt";
  }
  return "?";
}

// slt compares unsigned words.
uint32_t alu_apply(AluFn f, uint32_t a, uint32_t b, int width) {
  uint32_t m = MachineConfig::mask(width);
  switch (f) {
    case AluFn::Add: return (a + b) & m;
    case AluFn::Xor: return (a ^ b) & m;
    case AluFn::Slt: return (a & m) < (b & m) ? 1u : 0u;
  }
  return 0;
}

Instruction Instruction::mul(int rd, int rs1, int rs2) {
  Instruction i;
  i.op = kMul;
  i.rd = rd;
  i.rs1 = rs1;
  i.rs2 = rs2;
  return i;
}

Instruction Instruction::alu(AluFn f, int rd, int rs1, int rs2) {
  Instruction i;
  i.op = kAlu;
  i.fn = f;
  i.rd = rd;
  i.rs1 = rs1;
  i.rs2 = rs2;
  return i;
}

Instruction Instruction::ld(int rd, uint32_t imm, int rs1) {
  Instruction i;
  i.op = kLd;
  i.rd = rd;
  i.imm = imm;
  i.rs1 = rs1;
  return i;
}

Instruction Instruction::st(int rs2, uint32_t imm, int rs1) {
  Instruction i;
  i.op = kSt;
  i.rs2 = rs2;
  i.imm = imm;
  i.rs1 = rs1;
  return i;
}

Instruction Instruction::br(int rs1, std::string target) {
  Instruction i;
  i.op = kBr;
  i.rs1 = rs1;
  i.target = std::move(target);
  return i;
}

Instruction Instruction::synth(int k) {
  Instruction i;
  i.op = Opcode::synth(k);
  return i;
}

void validate_instruction(const Instruction& in, const MachineConfig& mc) {
  Roles r = roles(in.op.kind);
  auto check = [&](bool want, bool have, const char* field) {
    if (want != have)
      throw Error(fmt::format("{}: operand '{}' {}", in.op.name(), field, want ? "missing" : "not allowed"));
  };
  check(r.rd, in.rd.has_value(), "rd");
  check(r.rs1, in.rs1.has_value(), "rs1");
  check(r.rs2, in.rs2.has_value(), "rs2");
  check(r.imm, in.imm.has_value(), "imm");
  check(r.fn, in.fn.has_value(), "fn");
  check(r.target, !in.target.empty(), "target");
  for (auto reg : {in.rd, in.rs1, in.rs2})
    if (reg && *reg >= mc.register_count) throw Error("register index out of range");
  if (in.imm && *in.imm > MachineConfig::mask(mc.immediate_width)) throw Error("immediate out of range");
  if (in.fn && static_cast<int>(*in.fn) >= kAluFnCount) throw Error("bad alu function");
  if (in.op.kind == OpKind::Synth && in.op.index == 0) throw Error("synthetic opcode index must be >= 1");
}

std::string render_instruction(const Instruction& in) {
  switch (in.op.kind) {
    case OpKind::Ld: return fmt::format("ld r{}, {}(r{})", *in.rd, *in.imm, *in.rs1);
    case OpKind::St: return fmt::format("st r{}, {}(r{})", *in.rs2, *in.imm, *in.rs1);
    case OpKind::Mul: return fmt::format("mul r{}, r{}, r{}", *in.rd, *in.rs1, *in.rs2);
    case OpKind::Alu:
      return fmt::format("alu{} r{}, r{}, r{}", alu_fn_name(*in.fn), *in.rd, *in.rs1, *in.rs2);
    case OpKind::Br: return fmt::format("br r{}, {}", *in.rs1, in.target);
    case OpKind::Synth: return fmt::format("op{}", in.op.index);
  }
  return "";
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_ident(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_' || s[0] == '.')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
  });
}

std::vector<std::string_view> split_operands(std::string_view s) {
  std::vector<std::string_view> out;
  if (trim(s).empty()) return out;
  size_t start = 0;
  for (size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',') {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

struct LineParser {
  int line;
  const MachineConfig& mc;

  [[noreturn]] void fail(const std::string& m) const { throw ParseError(line, m); }

  uint8_t reg(std::string_view t) const {
    if (t.size() < 2 || (t[0] != 'r' && t[0] != 'R')) fail(fmt::format("expected register, got '{}'", t));
    unsigned v = 0;
    auto [p, ec] = std::from_chars(t.data() + 1, t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size()) fail(fmt::format("bad register '{}'", t));
    if (v >= static_cast<unsigned>(mc.register_count)) fail("register index out of range");
    return static_cast<uint8_t>(v);
  }

  uint32_t imm(std::string_view t) const {
    t = trim(t);
    uint32_t v = 0;
    int base = 10;
    if (t.size() > 2 && t[0] == '0' && (t[1] == 'x' || t[1] == 'X')) {
      base = 16;
      t.remove_prefix(2);
    }
    if (t.empty()) fail("empty immediate");
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v, base);
    if (ec != std::errc() || p != t.data() + t.size()) fail(fmt::format("bad immediate '{}'", t));
    if (v > MachineConfig::mask(mc.immediate_width)) fail("immediate out of range");
    return v;
  }

  // "imm(rN)"
  std::pair<uint32_t, uint8_t> mem_operand(std::string_view t) const {
    auto lp = t.find('(');
    auto rp = t.rfind(')');
    if (lp == std::string_view::npos || rp == std::string_view::npos || rp < lp || rp != t.size() - 1)
      fail(fmt::format("expected imm(rN), got '{}'", t));
    return {imm(t.substr(0, lp)), reg(trim(t.substr(lp + 1, rp - lp - 1)))};
  }

  void arity(const std::vector<std::string_view>& ops, size_t n, std::string_view mn) const {
    if (ops.size() != n)
      fail(fmt::format("operand arity mismatch for '{}': expected {}, got {}", mn, n, ops.size()));
  }

  Instruction parse(std::string_view mn, std::string_view rest) const {
    auto ops = split_operands(rest);
    if (mn == "mul") {
      arity(ops, 3, mn);
      return Instruction::mul(reg(ops[0]), reg(ops[1]), reg(ops[2]));
    }
    if (mn.substr(0, 3) == "alu") {
      auto f = mn.substr(3);
      AluFn fn;
      if (f == "add") fn = AluFn::Add;
      else if (f == "xor") fn = AluFn::Xor;
      else if (f == "slt") fn = AluFn::Slt;
      else fail(fmt::format("unknown opcode '{}'", mn));
      arity(ops, 3, mn);
      return Instruction::alu(fn, reg(ops[0]), reg(ops[1]), reg(ops[2]));
    }
    if (mn == "ld") {
      arity(ops, 2, mn);
      auto [i, r] = mem_operand(ops[1]);
      return Instruction::ld(reg(ops[0]), i, r);
    }
    if (mn == "st") {
      arity(ops, 2, mn);
      auto [i, r] = mem_operand(ops[1]);
      return Instruction::st(reg(ops[0]), i, r);
    }
    if (mn == "br") {
      arity(ops, 2, mn);
      if (!is_ident(ops[1])) fail(fmt::format("bad label '{}'", ops[1]));
      return Instruction::br(reg(ops[0]), std::string(ops[1]));
    }
    if (mn.size() > 2 && mn.substr(0, 2) == "op") {
      int v = 0;
      auto sv = mn.substr(2);
      auto [p, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
      if (ec == std::errc() && p == sv.data() + sv.size() && v >= 1 && v <= 255) {
        arity(ops, 0, mn);
        return Instruction::synth(v);
      }
    }
    fail(fmt::format("unknown opcode '{}'", mn));
  }
};

}  // namespace

Program parse_program(std::string_view text, const MachineConfig& mc) {
  Program prog;
  std::vector<int> br_lines;
  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
    line = trim(line);
    if (line.empty()) {
      if (nl == text.size()) break;
      continue;
    }
    if (line.back() == ':') {
      auto name = trim(line.substr(0, line.size() - 1));
      if (!is_ident(name)) throw ParseError(line_no, fmt::format("bad label '{}'", name));
      if (!prog.labels.emplace(std::string(name), prog.instructions.size()).second)
        throw ParseError(line_no, fmt::format("duplicate label '{}'", name));
    } else {
      size_t sp = 0;
      while (sp < line.size() && !std::isspace(static_cast<unsigned char>(line[sp]))) ++sp;
      LineParser lp{line_no, mc};
      std::string mn(line.substr(0, sp));
      std::transform(mn.begin(), mn.end(), mn.begin(), [](unsigned char c) { return std::tolower(c); });
      prog.instructions.push_back(lp.parse(mn, line.substr(sp)));
      br_lines.push_back(line_no);
    }
    if (nl == text.size()) break;
  }
  for (size_t i = 0; i < prog.instructions.size(); ++i) {
    const auto& in = prog.instructions[i];
    if (in.op.kind != OpKind::Br) continue;
    auto it = prog.labels.find(in.target);
    if (it == prog.labels.end()) throw ParseError(br_lines[i], fmt::format("unresolved label '{}'", in.target));
    if (it->second <= i) throw ParseError(br_lines[i], fmt::format("backward label '{}'", in.target));
  }
  return prog;
}

void validate_program(const Program& p, const MachineConfig& mc) {
  for (size_t i = 0; i < p.instructions.size(); ++i) {
    const auto& in = p.instructions[i];
    validate_instruction(in, mc);
    if (in.op.kind == OpKind::Br) {
      auto it = p.labels.find(in.target);
      if (it == p.labels.end()) throw Error(fmt::format("unresolved label '{}'", in.target));
      if (it->second <= i) throw Error(fmt::format("backward label '{}'", in.target));
    }
  }
  for (const auto& [name, idx] : p.labels)
    if (idx > p.instructions.size()) throw Error(fmt::format("label '{}' out of range", name));
}

std::string render_program(const Program& p) {
  std::multimap<size_t, std::string> by_index;
  for (const auto& [name, idx] : p.labels) by_index.emplace(idx, name);
  std::string out;
  auto emit_labels = [&](size_t i) {
    auto [b, e] = by_index.equal_range(i);
    for (auto it = b; it != e; ++it) out += it->second + ":\n";
  };
  for (size_t i = 0; i < p.instructions.size(); ++i) {
    emit_labels(i);
    out += render_instruction(p.instructions[i]) + "\n";
  }
  emit_labels(p.instructions.size());
  return out;
}

}  // namespace sempat
