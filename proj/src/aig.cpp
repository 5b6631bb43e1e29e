#include "sempat/aig.hpp"

#include <cassert>

namespace sempat::sym {

Aig::Aig() {
  fan0_.push_back(0);
  fan1_.push_back(0);
  input_idx_.push_back(-1);
  strash_.reserve(1 << 12);
}

Lit Aig::input() {
  uint32_t n = static_cast<uint32_t>(fan0_.size());
  fan0_.push_back(kInputMark);
  fan1_.push_back(kInputMark);
  input_idx_.push_back(static_cast<int>(inputs_.size()));
  inputs_.push_back(n);
  return n << 1;
}

Lit Aig::land(Lit a, Lit b) {
  if (a == kFalse || b == kFalse) return kFalse;
  if (a == kTrue) return b;
  if (b == kTrue) return a;
  if (a == b) return a;
  if (a == neg(b)) return kFalse;
  if (a > b) std::swap(a, b);
  uint64_t key = (static_cast<uint64_t>(a) << 32) | b;
  auto it = strash_.find(key);
  if (it != strash_.end()) return it->second << 1;
  uint32_t n = static_cast<uint32_t>(fan0_.size());
  fan0_.push_back(a);
  fan1_.push_back(b);
  input_idx_.push_back(-1);
  strash_.emplace(key, n);
  return n << 1;
}

Lit Aig::lxor(Lit a, Lit b) {
  if (a == kFalse) return b;
  if (b == kFalse) return a;
  if (a == kTrue) return neg(b);
  if (b == kTrue) return neg(a);
  if (a == b) return kFalse;
  if (a == neg(b)) return kTrue;
  return lor(land(a, neg(b)), land(neg(a), b));
}

Lit Aig::ite(Lit c, Lit t, Lit e) {
  if (c == kTrue) return t;
  if (c == kFalse) return e;
  if (t == e) return t;
  if (t == kTrue) return lor(c, e);
  if (t == kFalse) return land(neg(c), e);
  if (e == kFalse) return land(c, t);
  if (e == kTrue) return lor(neg(c), t);
  if (t == neg(e)) return lxnor(c, t);
  return lor(land(c, t), land(neg(c), e));
}

Lit Aig::land_all(const std::vector<Lit>& v) {
  Lit r = kTrue;
  for (Lit l : v) {
    r = land(r, l);
    if (r == kFalse) break;
  }
  return r;
}

Lit Aig::lor_all(const std::vector<Lit>& v) {
  Lit r = kFalse;
  for (Lit l : v) {
    r = lor(r, l);
    if (r == kTrue) break;
  }
  return r;
}

bool Aig::eval(Lit l, const std::vector<bool>& in) const {
  std::vector<int8_t> memo(fan0_.size(), -1);
  memo[0] = 0;
  std::vector<uint32_t> stack{node_of(l)};
  while (!stack.empty()) {
    uint32_t n = stack.back();
    if (memo[n] >= 0) {
      stack.pop_back();
      continue;
    }
    if (is_input(n)) {
      memo[n] = in[input_idx_[n]] ? 1 : 0;
      stack.pop_back();
      continue;
    }
    uint32_t a = node_of(fan0_[n]), b = node_of(fan1_[n]);
    if (memo[a] < 0) {
      stack.push_back(a);
      continue;
    }
    if (memo[b] < 0) {
      stack.push_back(b);
      continue;
    }
    bool va = memo[a] ^ is_neg(fan0_[n]);
    bool vb = memo[b] ^ is_neg(fan1_[n]);
    memo[n] = (va && vb) ? 1 : 0;
    stack.pop_back();
  }
  return memo[node_of(l)] ^ is_neg(l);
}

Bits bv_const(uint32_t v, int w) {
  Bits b(w);
  for (int i = 0; i < w; ++i) b[i] = ((v >> i) & 1u) ? kTrue : kFalse;
  return b;
}

Bits bv_input(Aig& g, int w) {
  Bits b(w);
  for (int i = 0; i < w; ++i) b[i] = g.input();
  return b;
}

Bits bv_add(Aig& g, const Bits& a, const Bits& b) {
  assert(a.size() == b.size());
  Bits r(a.size());
  Lit c = kFalse;
  for (size_t i = 0; i < a.size(); ++i) {
    Lit x = g.lxor(a[i], b[i]);
    r[i] = g.lxor(x, c);
    c = g.lor(g.land(a[i], b[i]), g.land(c, x));
  }
  return r;
}

Bits bv_sub(Aig& g, const Bits& a, const Bits& b) {
  assert(a.size() == b.size());
  Bits r(a.size());
  Lit c = kTrue;
  for (size_t i = 0; i < a.size(); ++i) {
    Lit nb = neg(b[i]);
    Lit x = g.lxor(a[i], nb);
    r[i] = g.lxor(x, c);
    c = g.lor(g.land(a[i], nb), g.land(c, x));
  }
  return r;
}

Bits bv_mul(Aig& g, const Bits& a, const Bits& b) {
  assert(a.size() == b.size());
  size_t w = a.size();
  Bits acc = bv_const(0, static_cast<int>(w));
  for (size_t i = 0; i < w; ++i) {
    if (b[i] == kFalse) continue;
    Bits pp(w, kFalse);
    for (size_t j = 0; j + i < w; ++j) pp[j + i] = g.land(a[j], b[i]);
    acc = bv_add(g, acc, pp);
  }
  return acc;
}

Bits bv_xor(Aig& g, const Bits& a, const Bits& b) {
  assert(a.size() == b.size());
  Bits r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = g.lxor(a[i], b[i]);
  return r;
}

Bits bv_ite(Aig& g, Lit c, const Bits& t, const Bits& e) {
  assert(t.size() == e.size());
  if (c == kTrue) return t;
  if (c == kFalse) return e;
  Bits r(t.size());
  for (size_t i = 0; i < t.size(); ++i) r[i] = g.ite(c, t[i], e[i]);
  return r;
}

Lit bv_eq(Aig& g, const Bits& a, const Bits& b) {
  assert(a.size() == b.size());
  Lit r = kTrue;
  for (size_t i = 0; i < a.size() && r != kFalse; ++i) r = g.land(r, g.lxnor(a[i], b[i]));
  return r;
}

Lit bv_ult(Aig& g, const Bits& a, const Bits& b) {
  assert(a.size() == b.size());
  // From LSB upward: lt = (¬a ∧ b) ∨ (a == b ∧ lt_lower)
  Lit lt = kFalse;
  for (size_t i = 0; i < a.size(); ++i) {
    Lit less = g.land(neg(a[i]), b[i]);
    Lit same = g.lxnor(a[i], b[i]);
    lt = g.lor(less, g.land(same, lt));
  }
  return lt;
}

Lit bv_nonzero(Aig& g, const Bits& a) { return g.lor_all(a); }

Bits bv_resize(const Bits& a, int w) {
  Bits r(w, kFalse);
  for (int i = 0; i < w && i < static_cast<int>(a.size()); ++i) r[i] = a[i];
  return r;
}

Bits bv_slice(const Bits& a, int lo, int hi) {
  Bits r;
  for (int i = lo; i <= hi; ++i) r.push_back(i < static_cast<int>(a.size()) ? a[i] : kFalse);
  return r;
}

bool bv_is_const(const Bits& a, uint32_t* out) {
  uint32_t v = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    if (!is_const(a[i])) return false;
    if (a[i] == kTrue) v |= 1u << i;
  }
  if (out) *out = v;
  return true;
}

}  // namespace sempat::sym
