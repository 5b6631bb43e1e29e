#pragma once

#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "sempat/grammar.hpp"
#include "sempat/sat.hpp"
#include "sempat/secspec.hpp"

namespace sempat {

using TaintState = std::set<int>;

TaintState taint_step(const PlatformModel& m, const TaintState& t, Opcode op);
std::set<int> vars_of(const std::vector<VarRef>& refs);
bool taint_propagates(const PlatformModel& m, const std::vector<Opcode>& tmpl, const std::set<int>& v_sec,
                      const std::set<int>& v_obs);
bool taint_propagates(const PlatformModel& m, const NIProperty& p, const std::vector<Opcode>& tmpl);

// Randomized differential check of the taint rules: two runs from states differing only on a random
// secret set must agree on every variable left untainted.
struct TaintCheckReport {
  int trials = 0;
  int effective = 0;
  int failures = 0;
  std::string first_failure;
};
TaintCheckReport taint_soundness_check(const ModelPtr& m, int trials, uint64_t seed);

enum class EngineKind { Sat, Enum };

// Empty lists mean the full domain at the configured machine.
struct OperandDomain {
  std::vector<int> regs;
  std::vector<uint32_t> imms;
};

struct SearchBudget {
  EngineKind engine = EngineKind::Sat;
  // Enumeration engine: cap on candidate executions per check, 0 = unlimited.
  uint64_t max_pairs = 0;
  OperandDomain operands;
  sat::Deadline deadline;
  int jobs = 1;
};

// Program positions: a fixed instruction, or a template slot whose operands range over the domain.
struct Code {
  std::vector<Opcode> ops;
  std::vector<std::optional<Instruction>> fixed;

  static Code from_template(const std::vector<Opcode>& t);
  static Code from_program(const std::vector<Instruction>& p);
  size_t size() const { return ops.size(); }
};

// Path condition for an unrolled branch: ((rs1 != 0) == taken) or spec, checked after the branch steps.
struct BranchAssume {
  size_t index = 0;
  bool taken = false;
  bool operator==(const BranchAssume&) const = default;
};

struct SessionOptions {
  bool require_violation = true;
  bool arch_only = false;
  std::vector<BranchAssume> assumptions;
  int set_index_width = 0;
};

struct Witness {
  std::vector<Instruction> program;
  State sigma1, sigma2;
  std::vector<bool> choices;
  Trace t1, t2;
  std::optional<Trace> t1ns, t2ns;
};

enum class Verdict { Found, None, Unknown };

struct CheckResult {
  Verdict verdict = Verdict::None;
  std::optional<Witness> witness;
};

class Session {
 public:
  virtual ~Session() = default;
  // Searches for an execution pair satisfying the session's base conditions and extra.
  virtual CheckResult check(const Formula& extra) = 0;
  virtual uint64_t queries() const = 0;
};

std::unique_ptr<Session> open_session(const ModelPtr& m, const NIProperty& p, const Code& code, const SessionOptions& o,
                                      const SearchBudget& b);

// Replays a witness and re-checks every condition it claims. why receives the first failing condition.
bool verify_witness(const PlatformModel& m, const NIProperty& p, const Witness& w, const SessionOptions& o,
                    const Formula& extra, std::string* why = nullptr);

CheckResult find_violation(const ModelPtr& m, const NIProperty& p, const Code& code, const Constraint& c,
                           const SearchBudget& b);

enum class HyperVerdict { Safe, Unsafe, Inconclusive };
struct HyperResult {
  HyperVerdict verdict = HyperVerdict::Safe;
  std::optional<Witness> witness;
};
HyperResult check_program_hyper(const ModelPtr& m, const NIProperty& p, const std::vector<Instruction>& program,
                                const std::vector<BranchAssume>& assumptions, const SearchBudget& b);

std::string render_witness(const PlatformModel& m, const Witness& w);

}  // namespace sempat
