#include "sempat/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace sempat {

namespace {

std::string trim(std::string_view s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

long long to_int(const std::string& key, const std::string& v) {
  long long x = 0;
  int base = 10;
  std::string_view s = v;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    s.remove_prefix(2);
  }
  bool neg = !s.empty() && s[0] == '-';
  if (neg) s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x, base);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw Error(fmt::format("{}: expected an integer, got '{}'", key, v));
  return neg ? -x : x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw Error(fmt::format("{}: expected a boolean, got '{}'", key, v));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char ch : v) {
    if (ch == '[') depth++;
    if (ch == ']') depth--;
    if ((ch == ',' || ch == ' ') && depth == 0) {
      if (!trim(cur).empty()) out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

std::string strip_brackets(const std::string& v) {
  std::string t = trim(v);
  if (t.size() >= 2 && t.front() == '[' && t.back() == ']') return t.substr(1, t.size() - 2);
  return t;
}

}  // namespace

void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  const std::string& v = value;
  auto i = [&] { return static_cast<int>(to_int(key, v)); };
  if (key == "platform") {
    if (v != "platcr" && v != "platss" && v != "platsynth") throw Error(fmt::format("unknown platform '{}'", v));
    c.platform = v;
  } else if (key == "word_width") {
    c.machine.word_width = i();
  } else if (key == "register_count") {
    c.machine.register_count = i();
  } else if (key == "immediate_width") {
    c.machine.immediate_width = i();
  } else if (key == "reuse_buf_size") {
    c.reuse_buf_size = i();
  } else if (key == "lsqc_entries") {
    c.lsqc_entries = i();
  } else if (key == "set_index_width") {
    c.set_index_width = i();
  } else if (key == "store_invalidation") {
    if (v == "per_address") c.store_invalidation = StoreInvalidation::PerAddress;
    else if (v == "per_set_index") c.store_invalidation = StoreInvalidation::PerSetIndex;
    else throw Error(fmt::format("store_invalidation: expected per_address or per_set_index, got '{}'", v));
  } else if (key == "spec_feature") {
    c.spec_feature = parse_spec_feature(v);
  } else if (key == "spec_window") {
    c.spec_window = i();
  } else if (key == "pdep") {
    c.pdep = i();
  } else if (key == "synth_word_width") {
    c.synth_word_width = i();
  } else if (key == "variant") {
    if (v == "ni" || v == "NI") c.variant = Variant::NI;
    else if (v == "sni" || v == "SNI") c.variant = Variant::SNI;
    else throw Error(fmt::format("variant: expected ni or sni, got '{}'", v));
  } else if (key == "v_sec") {
    c.v_sec = split_list(strip_brackets(v));
  } else if (key == "v_pub") {
    c.v_pub = split_list(strip_brackets(v));
  } else if (key == "v_obs") {
    c.v_obs = split_list(strip_brackets(v));
  } else if (key == "init") {
    std::string body = trim(v);
    if (body.size() < 2 || body.front() != '{' || body.back() != '}')
      throw Error(fmt::format("init: expected '{{ var: value, ... }}', got '{}'", v));
    std::string_view inner = std::string_view(body).substr(1, body.size() - 2);
    size_t pos = 0;
    while (pos <= inner.size()) {
      size_t comma = inner.find(',', pos);
      if (comma == std::string_view::npos) comma = inner.size();
      std::string item = trim(inner.substr(pos, comma - pos));
      pos = comma + 1;
      if (item.empty()) continue;
      auto colon = item.find(':');
      if (colon == std::string::npos) throw Error(fmt::format("init: expected 'var: value', got '{}'", item));
      c.init[trim(std::string_view(item).substr(0, colon))] = trim(std::string_view(item).substr(colon + 1));
    }
  } else if (key.rfind("init.", 0) == 0) {
    c.init[key.substr(5)] = v;
  } else if (key == "secret_cells") {
    c.secret_cells = v == "all" ? -1 : i();
  } else if (key == "grammar") {
    if (v != "diffindex") grammar_by_id(v);
    c.grammar = v;
  } else if (key == "depth") {
    c.depth = i();
  } else if (key == "max_branch") {
    c.max_branch = i();
  } else if (key == "prune") {
    c.prune = to_bool(key, v);
  } else if (key == "allow_partial") {
    c.allow_partial = to_bool(key, v);
  } else if (key == "engine") {
    if (v == "sat") c.engine = EngineKind::Sat;
    else if (v == "enum") c.engine = EngineKind::Enum;
    else throw Error(fmt::format("engine: expected sat or enum, got '{}'", v));
  } else if (key == "max_pairs") {
    c.max_pairs = static_cast<uint64_t>(to_int(key, v));
  } else if (key == "deadline_ms") {
    c.deadline_ms = static_cast<long>(to_int(key, v));
  } else if (key == "jobs") {
    c.jobs = i();
  } else if (key == "regs") {
    c.regs.clear();
    for (auto& s : split_list(v)) c.regs.push_back(static_cast<int>(to_int(key, s)));
  } else if (key == "imms") {
    c.imms.clear();
    for (auto& s : split_list(v)) c.imms.push_back(static_cast<uint32_t>(to_int(key, s)));
  } else if (key == "unroll_depth") {
    c.unroll_depth = i();
  } else if (key == "output") {
    c.output = v;
  } else if (key == "bench.experiment") {
    c.bench_experiment = v;
  } else if (key == "bench.values") {
    c.bench_values.clear();
    for (auto& s : split_list(v)) c.bench_values.push_back(static_cast<int>(to_int(key, s)));
  } else if (key == "bench.programs") {
    c.bench_programs = split_list(v);
  } else if (key == "bench.cell_timeout_ms") {
    c.bench_cell_timeout_ms = static_cast<long>(to_int(key, v));
  } else {
    throw Error(fmt::format("unknown configuration key '{}'", key));
  }
  c.explicit_keys.insert(key);
}

RunConfig parse_config(std::string_view text) {
  RunConfig c;
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    n++;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::string t = trim(line);
    if (t.empty()) continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError(n, fmt::format("expected 'key = value', got '{}'", t));
    std::string key = trim(std::string_view(t).substr(0, eq));
    std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ParseError(n, "empty key");
    try {
      apply_setting(c, key, value);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(n, e.what());
    }
  }
  return c;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(fmt::format("cannot open '{}'", path));
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

RunConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

void validate_config(const RunConfig& c) {
  if (c.platform == "platsynth") {
    if (c.pdep < 1) throw Error("pdep must be at least 1");
  } else {
    c.machine.validate();
  }
  bool siw_used = c.platform == "platss" || c.grammar.rfind("diffindex", 0) == 0;
  if (c.explicit_keys.count("set_index_width") && !siw_used)
    throw Error("set_index_width requires platform = platss or a diffindex grammar");
  if (siw_used && c.set_index_width < 1) throw Error("set_index_width must be at least 1");
  if (c.explicit_keys.count("store_invalidation") && c.platform != "platss")
    throw Error("store_invalidation applies to platform = platss only");
  if (c.explicit_keys.count("reuse_buf_size") && c.platform != "platcr")
    throw Error("reuse_buf_size applies to platform = platcr only");
  if (c.explicit_keys.count("lsqc_entries") && c.platform != "platss")
    throw Error("lsqc_entries applies to platform = platss only");
  if (c.platform == "platsynth" && c.spec_feature != SpecFeature::None)
    throw Error("platsynth has no speculation feature");
  if (c.grammar.rfind("diffindex:", 0) == 0) {
    Grammar g = grammar_by_id(c.grammar);
    (void)g;
    if (c.explicit_keys.count("set_index_width") &&
        c.grammar != fmt::format("diffindex:{}", c.set_index_width))
      throw Error("set_index_width disagrees with the diffindex grammar width");
  }
  if (!c.v_pub.empty() && !c.v_sec.empty()) throw Error("give either v_pub or v_sec, not both");
  if (c.depth < 1) throw Error("depth must be at least 1");
  if (c.max_branch < 2 || c.max_branch > 3) throw Error("max_branch must be 2 or 3");
  if (c.jobs < 1) throw Error("jobs must be at least 1");
  if (c.spec_window < 1) throw Error("spec_window must be at least 1");
  if (c.unroll_depth < 1) throw Error("unroll_depth must be at least 1");
  if (c.variant == Variant::SNI && c.spec_feature == SpecFeature::None && c.platform != "platsynth")
    throw Error("variant = sni needs a speculation feature");
}

ModelPtr build_model(const RunConfig& c) {
  if (c.platform == "platcr") {
    PlatCRParams q;
    q.reuse_buf_size = c.reuse_buf_size;
    q.spec_feature = c.spec_feature;
    q.spec_window = c.spec_window;
    return build_platcr(c.machine, q);
  }
  if (c.platform == "platss") {
    PlatSSParams q;
    q.lsqc_entries = c.lsqc_entries;
    q.set_index_width = c.set_index_width;
    q.store_invalidation = c.store_invalidation;
    q.spec_feature = c.spec_feature;
    q.spec_window = c.spec_window;
    return build_platss(c.machine, q);
  }
  return build_platsynth(c.pdep, c.synth_word_width);
}

NIProperty build_property(const RunConfig& c, const PlatformModel& m) {
  std::vector<std::string> sec = c.v_sec, obs = c.v_obs;
  if (!c.v_pub.empty()) {
    std::vector<VarRef> pub;
    for (const auto& s : c.v_pub)
      for (const auto& r : parse_refs(m.layout(), s)) pub.push_back(r);
    sec.clear();
    for (const auto& r : complement_refs(m.layout(), pub)) sec.push_back(m.layout().ref_name(r));
  }
  if (c.platform == "platsynth") {
    if (sec.empty()) sec = {"buf_0"};
    if (obs.empty()) obs = {fmt::format("buf_{}", c.pdep)};
  } else {
    if (sec.empty()) sec = {"mem"};
    if (obs.empty()) obs = {c.platform == "platcr" ? "mulcount" : "lscount"};
  }
  NIProperty p = make_property(m, sec, obs, c.variant);
  p.init.secret_cells = c.secret_cells;
  for (auto& [name, v] : c.init) {
    int id = m.layout().find(name);
    if (id < 0) throw Error(fmt::format("init.{}: unknown state variable", name));
    InitConstraint ic;
    if (v == "free") {
      ic.kind = InitConstraint::Free;
    } else if (v == "invalid") {
      ic.kind = InitConstraint::Invalid;
    } else {
      ic.kind = InitConstraint::Fixed;
      ic.value = static_cast<uint32_t>(to_int("init." + name, v));
    }
    p.init.vars[id] = ic;
  }
  return p;
}

std::string grammar_id(const RunConfig& c) {
  if (c.grammar == "diffindex") return fmt::format("diffindex:{}", c.set_index_width);
  return c.grammar;
}

Grammar build_grammar(const RunConfig& c) { return grammar_by_id(grammar_id(c)); }

SearchBudget build_budget(const RunConfig& c) {
  SearchBudget b;
  b.engine = c.engine;
  b.max_pairs = c.max_pairs;
  b.jobs = c.jobs;
  if (c.deadline_ms > 0) b.deadline = sat::Deadline::after_ms(c.deadline_ms);
  b.operands.regs = c.regs;
  b.operands.imms = c.imms;
  return b;
}

GenerateOptions build_generate_options(const RunConfig& c) {
  GenerateOptions o;
  o.depth = c.depth;
  o.specialize.max_branch = c.max_branch;
  o.specialize.prune_siblings = c.prune;
  o.allow_partial = c.allow_partial;
  return o;
}

}  // namespace sempat
