#include "sempat/cnf.hpp"

namespace sempat {

sat::SLit CnfBridge::lit(sym::Lit l) {
  using namespace sym;
  if (is_const(l)) {
    if (const_var_ < 0) {
      const_var_ = s_.new_var();
      s_.add_clause({sat::mk(const_var_, true)});
    }
    return sat::mk(const_var_, l == kTrue);
  }
  if (var_.size() < g_.num_nodes()) var_.resize(g_.num_nodes(), -1);
  std::vector<uint32_t> stack{node_of(l)};
  while (!stack.empty()) {
    uint32_t n = stack.back();
    if (var_[n] >= 0) {
      stack.pop_back();
      continue;
    }
    if (g_.is_input(n)) {
      var_[n] = s_.new_var();
      stack.pop_back();
      continue;
    }
    Lit a = g_.fanin0(n), b = g_.fanin1(n);
    bool ready = true;
    for (Lit x : {a, b})
      if (!is_const(x) && var_[node_of(x)] < 0) {
        stack.push_back(node_of(x));
        ready = false;
      }
    if (!ready) continue;
    stack.pop_back();
    int v = s_.new_var();
    var_[n] = v;
    sat::SLit sa = lit(a), sb = lit(b), sv = sat::mk(v);
    s_.add_clause({sat::sneg(sv), sa});
    s_.add_clause({sat::sneg(sv), sb});
    s_.add_clause({sv, sat::sneg(sa), sat::sneg(sb)});
  }
  return sat::mk(var_[node_of(l)], is_neg(l));
}

bool CnfBridge::value(sym::Lit l) const {
  using namespace sym;
  if (is_const(l)) return l == kTrue;
  uint32_t n = node_of(l);
  if (n < var_.size() && var_[n] >= 0) return s_.model_value(var_[n]) != is_neg(l);
  std::vector<bool> in(g_.num_inputs(), false);
  for (size_t i = 0; i < g_.num_inputs(); ++i) {
    uint32_t node = g_.input_node(i);
    if (node < var_.size() && var_[node] >= 0) in[i] = s_.model_value(var_[node]);
  }
  return g_.eval(l, in);
}

uint32_t CnfBridge::value(const sym::Bits& b) const {
  uint32_t v = 0;
  for (size_t i = 0; i < b.size(); ++i)
    if (value(b[i])) v |= 1u << i;
  return v;
}

}  // namespace sempat
