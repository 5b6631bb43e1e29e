#pragma once

// Two value domains over which model semantics are written once:
// Conc evaluates on machine words, Sym builds AIG bit vectors.

#include <cstdint>
#include <span>
#include <vector>

#include "sempat/aig.hpp"
#include "sempat/isa.hpp"

namespace sempat {

struct CWord {
  uint32_t v = 0;
  uint8_t w = 0;
};

struct Conc {
  using Bool = bool;
  using Word = CWord;
  static constexpr bool kSymbolic = false;

  Bool tt() const { return true; }
  Bool ff() const { return false; }
  Bool bconst(bool b) const { return b; }
  Bool land(Bool a, Bool b) const { return a && b; }
  Bool lor(Bool a, Bool b) const { return a || b; }
  Bool lnot(Bool a) const { return !a; }
  Bool bite(Bool c, Bool a, Bool b) const { return c ? a : b; }

  Word wconst(uint32_t v, int w) const { return {v & MachineConfig::mask(w), static_cast<uint8_t>(w)}; }
  int width(const Word& a) const { return a.w; }
  Word add(const Word& a, const Word& b) const { return wconst(a.v + b.v, a.w); }
  Word sub(const Word& a, const Word& b) const { return wconst(a.v - b.v, a.w); }
  Word mul(const Word& a, const Word& b) const { return wconst(a.v * b.v, a.w); }
  Word bxor(const Word& a, const Word& b) const { return wconst(a.v ^ b.v, a.w); }
  Word ite(Bool c, const Word& a, const Word& b) const { return c ? a : b; }
  Bool eq(const Word& a, const Word& b) const { return a.v == b.v; }
  Bool ult(const Word& a, const Word& b) const { return a.v < b.v; }
  Bool nonzero(const Word& a) const { return a.v != 0; }
  Bool eqc(const Word& a, uint32_t c) const { return a.v == c; }
  Word resize(const Word& a, int w) const { return wconst(a.v, w); }
  Word slice(const Word& a, int lo, int hi) const {
    return wconst(a.v >> lo, hi - lo + 1);
  }
  Word from_bool(Bool b, int w) const { return wconst(b ? 1 : 0, w); }
  // Concrete value when known; always known here.
  bool known(const Word& a, uint32_t* out) const {
    *out = a.v;
    return true;
  }
  bool known_bool(Bool b, bool* out) const {
    *out = b;
    return true;
  }
};

struct Sym {
  using Bool = sym::Lit;
  using Word = sym::Bits;
  static constexpr bool kSymbolic = true;

  sym::Aig& g;

  Bool tt() const { return sym::kTrue; }
  Bool ff() const { return sym::kFalse; }
  Bool bconst(bool b) const { return b ? sym::kTrue : sym::kFalse; }
  Bool land(Bool a, Bool b) const { return g.land(a, b); }
  Bool lor(Bool a, Bool b) const { return g.lor(a, b); }
  Bool lnot(Bool a) const { return sym::neg(a); }
  Bool bite(Bool c, Bool a, Bool b) const { return g.ite(c, a, b); }

  Word wconst(uint32_t v, int w) const { return sym::bv_const(v, w); }
  int width(const Word& a) const { return static_cast<int>(a.size()); }
  Word add(const Word& a, const Word& b) const { return sym::bv_add(g, a, b); }
  Word sub(const Word& a, const Word& b) const { return sym::bv_sub(g, a, b); }
  Word mul(const Word& a, const Word& b) const { return sym::bv_mul(g, a, b); }
  Word bxor(const Word& a, const Word& b) const { return sym::bv_xor(g, a, b); }
  Word ite(Bool c, const Word& a, const Word& b) const { return sym::bv_ite(g, c, a, b); }
  Bool eq(const Word& a, const Word& b) const { return sym::bv_eq(g, a, b); }
  Bool ult(const Word& a, const Word& b) const { return sym::bv_ult(g, a, b); }
  Bool nonzero(const Word& a) const { return sym::bv_nonzero(g, a); }
  Bool eqc(const Word& a, uint32_t c) const { return sym::bv_eq(g, a, sym::bv_const(c, width(a))); }
  Word resize(const Word& a, int w) const { return sym::bv_resize(a, w); }
  Word slice(const Word& a, int lo, int hi) const { return sym::bv_slice(a, lo, hi); }
  Word from_bool(Bool b, int w) const {
    Word r(w, sym::kFalse);
    r[0] = b;
    return r;
  }
  bool known(const Word& a, uint32_t* out) const { return sym::bv_is_const(a, out); }
  bool known_bool(Bool b, bool* out) const {
    if (!sym::is_const(b)) return false;
    *out = b == sym::kTrue;
    return true;
  }
};

// Generic helpers.

template <class D>
typename D::Word select(D& d, std::span<const typename D::Word> arr, const typename D::Word& idx) {
  uint32_t k;
  if (d.known(idx, &k)) {
    if (k >= arr.size()) throw Error("array index out of bounds");
    return arr[k];
  }
  typename D::Word r = arr[0];
  for (size_t e = 1; e < arr.size(); ++e) r = d.ite(d.eqc(idx, static_cast<uint32_t>(e)), arr[e], r);
  return r;
}

template <class D>
typename D::Bool select_bool(D& d, std::span<const typename D::Bool> arr, const typename D::Word& idx) {
  uint32_t k;
  if (d.known(idx, &k)) {
    if (k >= arr.size()) throw Error("array index out of bounds");
    return arr[k];
  }
  typename D::Bool r = arr[0];
  for (size_t e = 1; e < arr.size(); ++e) r = d.bite(d.eqc(idx, static_cast<uint32_t>(e)), arr[e], r);
  return r;
}

// Guarded write of val into slots[base + e*stride] for the entry e selected by idx.
template <class D>
void store(D& d, std::vector<typename D::Word>& slots, size_t base, size_t count, size_t stride,
           const typename D::Word& idx, const typename D::Word& val, typename D::Bool guard) {
  bool g;
  if (d.known_bool(guard, &g) && !g) return;
  uint32_t k;
  if (d.known(idx, &k)) {
    if (k >= count) throw Error("array index out of bounds");
    auto& s = slots[base + k * stride];
    s = d.ite(guard, val, s);
    return;
  }
  for (size_t e = 0; e < count; ++e) {
    auto& s = slots[base + e * stride];
    s = d.ite(d.land(guard, d.eqc(idx, static_cast<uint32_t>(e))), val, s);
  }
}

// (p + 1) mod n for a pointer word.
template <class D>
typename D::Word ptr_next(D& d, const typename D::Word& p, int n) {
  int w = d.width(p);
  auto inc = d.add(p, d.wconst(1, w));
  return d.ite(d.eqc(p, static_cast<uint32_t>(n - 1)), d.wconst(0, w), inc);
}

inline int bits_for(int n) {
  int b = 1;
  while ((1 << b) < n) ++b;
  return b;
}

}  // namespace sempat
