#include "sempat/secspec.hpp"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>

namespace sempat {

namespace {

int parse_int(std::string_view s, std::string_view ctx) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw Error(fmt::format("bad index in '{}'", ctx));
  return v;
}

}  // namespace

std::vector<VarRef> parse_refs(const Layout& l, std::string_view text) {
  auto dots = text.find("..");
  if (dots == std::string_view::npos) return {l.parse_ref(text)};
  auto lb = text.find('[');
  auto rb = text.rfind(']');
  if (lb == std::string_view::npos || rb != text.size() - 1 || dots < lb)
    throw Error(fmt::format("bad variable range '{}'", text));
  int id = l.find(text.substr(0, lb));
  if (id < 0) throw Error(fmt::format("unknown state variable '{}'", text.substr(0, lb)));
  int lo = parse_int(text.substr(lb + 1, dots - lb - 1), text);
  int hi = parse_int(text.substr(dots + 2, rb - dots - 2), text);
  const auto& v = l.var(id);
  if (v.kind == VarKind::Scalar || lo < 0 || hi >= v.count || lo > hi)
    throw Error(fmt::format("index out of range in '{}'", text));
  std::vector<VarRef> out;
  for (int e = lo; e <= hi; ++e) out.push_back({id, e});
  return out;
}

std::vector<int> slots_of(const Layout& l, const std::vector<VarRef>& refs) {
  std::vector<int> out;
  for (const auto& r : refs)
    for (int s : l.slots_of(r)) out.push_back(s);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<VarRef> complement_refs(const Layout& l, const std::vector<VarRef>& refs) {
  std::vector<VarRef> out;
  for (int id = 0; id < static_cast<int>(l.vars().size()); ++id) {
    const auto& v = l.var(id);
    if (v.cls == VarClass::Internal) continue;
    auto covered = [&](int e) {
      return std::any_of(refs.begin(), refs.end(), [&](const VarRef& r) { return r.overlaps(VarRef{id, e}); });
    };
    bool any = false;
    for (int e = 0; e < v.count; ++e) any = any || covered(e);
    if (!any) {
      out.push_back({id, -1});
      continue;
    }
    for (int e = 0; e < v.count; ++e)
      if (!covered(e)) out.push_back({id, v.kind == VarKind::Scalar ? -1 : e});
  }
  return out;
}

NIProperty make_property(const PlatformModel& m, const std::vector<std::string>& v_sec,
                         const std::vector<std::string>& v_obs, Variant variant) {
  const auto& l = m.layout();
  std::vector<VarRef> sec;
  for (const auto& s : v_sec)
    for (const auto& r : parse_refs(l, s)) sec.push_back(r);
  NIProperty p;
  p.v_pub = complement_refs(l, sec);
  for (const auto& s : v_obs)
    for (const auto& r : parse_refs(l, s)) p.v_obs.push_back(r);
  p.variant = variant;
  return p;
}

std::vector<SlotPlan> plan_slots(const PlatformModel& m, const NIProperty& p) {
  const auto& l = m.layout();
  std::vector<SlotPlan> plan(l.num_slots());
  std::vector<char> pub(l.num_slots(), 0);
  for (int s : slots_of(l, p.v_pub)) pub[s] = 1;
  for (const auto& r : p.v_pub)
    if (l.var(r.var).cls == VarClass::Internal) throw Error("internal variables cannot be public");
  int free_secret_mem = 0;
  for (int id = 0; id < static_cast<int>(l.vars().size()); ++id) {
    const auto& v = l.var(id);
    auto it = p.init.vars.find(id);
    for (int e = 0; e < v.count; ++e)
      for (int f = 0; f < v.stride(); ++f) {
        int s = l.slot(id, e, f);
        SlotPlan& sp = plan[s];
        if (v.cls == VarClass::Internal) {
          sp.kind = SlotInit::Zero;
          continue;
        }
        InitConstraint c{v.init == DefaultInit::Free ? InitConstraint::Free : InitConstraint::Invalid, 0};
        if (it != p.init.vars.end()) c = it->second;
        if (c.kind == InitConstraint::Fixed) {
          sp = {SlotInit::Fixed, c.value & MachineConfig::mask(l.slot_width(s))};
        } else if (c.kind == InitConstraint::Invalid) {
          sp.kind = SlotInit::Zero;
        } else if (pub[s]) {
          sp.kind = SlotInit::Public;
        } else if (v.memory && p.init.secret_cells >= 0 && free_secret_mem >= p.init.secret_cells) {
          sp.kind = SlotInit::Zero;
        } else {
          sp.kind = SlotInit::Secret;
          if (v.memory) ++free_secret_mem;
        }
      }
  }
  return plan;
}

std::vector<int> public_slots(const PlatformModel& m, const NIProperty& p) { return slots_of(m.layout(), p.v_pub); }

std::vector<int> observable_slots(const PlatformModel& m, const NIProperty& p) {
  return slots_of(m.layout(), p.v_obs);
}

bool init_holds(const PlatformModel& m, const NIProperty& p, const State& s) {
  if (s.spec) return false;
  auto plan = plan_slots(m, p);
  for (size_t i = 0; i < plan.size(); ++i) {
    if (plan[i].kind == SlotInit::Zero && s.v[i] != 0) return false;
    if (plan[i].kind == SlotInit::Fixed && s.v[i] != plan[i].value) return false;
  }
  Conc d;
  return m.wellformed(d, m.to_conc(s));
}

bool low_equiv(const PlatformModel& m, const State& a, const State& b, const std::vector<VarRef>& vars) {
  for (int s : slots_of(m.layout(), vars))
    if (a.v.at(s) != b.v.at(s)) return false;
  return true;
}

bool trace_equiv(const PlatformModel& m, const Trace& a, const Trace& b, const std::vector<VarRef>& vars) {
  if (a.states.size() != b.states.size()) throw Error("trace length mismatch");
  auto slots = slots_of(m.layout(), vars);
  for (size_t i = 0; i < a.states.size(); ++i)
    for (int s : slots)
      if (a.states[i].v[s] != b.states[i].v[s]) return false;
  return true;
}

bool violates(const PlatformModel& m, const NIProperty& p, const Trace& t1, const Trace& t2, const Trace* t1ns,
              const Trace* t2ns) {
  bool diverge = !trace_equiv(m, t1, t2, p.v_obs);
  if (p.variant == Variant::NI) return diverge;
  if (!t1ns || !t2ns) throw Error("SNI check needs non-speculative traces");
  return diverge && trace_equiv(m, *t1ns, *t2ns, p.v_obs);
}

std::string describe_property(const PlatformModel& m, const NIProperty& p) {
  const auto& l = m.layout();
  auto names = [&](const std::vector<VarRef>& rs) {
    std::string out;
    for (const auto& r : rs) out += (out.empty() ? "" : ",") + l.ref_name(r);
    return out;
  };
  std::string init;
  for (const auto& [id, c] : p.init.vars) {
    init += init.empty() ? "" : ",";
    init += l.var(id).name + ":";
    init += c.kind == InitConstraint::Fixed ? std::to_string(c.value) : c.kind == InitConstraint::Invalid ? "invalid" : "free";
  }
  return fmt::format("{} v_sec=[{}] v_obs=[{}] init={{{}}} secret_cells={}", p.variant == Variant::NI ? "ni" : "sni",
                     names(complement_refs(l, p.v_pub)), names(p.v_obs), init,
                     p.init.secret_cells < 0 ? std::string("all") : std::to_string(p.init.secret_cells));
}

}  // namespace sempat
