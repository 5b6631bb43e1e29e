#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sempat/platform.hpp"

namespace sempat {

enum class Variant { NI, SNI };

// Per-variable initial constraint. Variables without an entry use the model's DefaultInit.
struct InitConstraint {
  enum Kind { Fixed, Invalid, Free } kind = Free;
  uint32_t value = 0;
  bool operator==(const InitConstraint&) const = default;
};

struct InitPred {
  std::map<int, InitConstraint> vars;
  // Free secret memory cells (lowest secret addresses first); the rest of secret memory is fixed to 0.
  // A negative value leaves every secret cell free.
  int secret_cells = 2;
  bool operator==(const InitPred&) const = default;
};

struct NIProperty {
  InitPred init;
  std::vector<VarRef> v_pub;
  std::vector<VarRef> v_obs;
  Variant variant = Variant::NI;
};

// Parses "mem", "mem[3]", "mem[8..15]".
std::vector<VarRef> parse_refs(const Layout& l, std::string_view text);
// Complement of refs over non-internal variable instances.
std::vector<VarRef> complement_refs(const Layout& l, const std::vector<VarRef>& refs);
NIProperty make_property(const PlatformModel& m, const std::vector<std::string>& v_sec,
                         const std::vector<std::string>& v_obs, Variant variant = Variant::NI);

// Slot-level views derived from a property.
enum class SlotInit { Public, Secret, Zero, Fixed };
struct SlotPlan {
  SlotInit kind = SlotInit::Zero;
  uint32_t value = 0;
};
std::vector<SlotPlan> plan_slots(const PlatformModel& m, const NIProperty& p);
std::vector<int> slots_of(const Layout& l, const std::vector<VarRef>& refs);
std::vector<int> public_slots(const PlatformModel& m, const NIProperty& p);
std::vector<int> observable_slots(const PlatformModel& m, const NIProperty& p);

bool init_holds(const PlatformModel& m, const NIProperty& p, const State& s);
bool low_equiv(const PlatformModel& m, const State& a, const State& b, const std::vector<VarRef>& vars);
bool trace_equiv(const PlatformModel& m, const Trace& a, const Trace& b, const std::vector<VarRef>& vars);
bool violates(const PlatformModel& m, const NIProperty& p, const Trace& t1, const Trace& t2,
              const Trace* t1ns = nullptr, const Trace* t2ns = nullptr);

std::string describe_property(const PlatformModel& m, const NIProperty& p);

}  // namespace sempat
