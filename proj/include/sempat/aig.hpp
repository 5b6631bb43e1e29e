#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace sempat::sym {

// Literal = 2 * node + complement bit. Node 0 is constant false.
using Lit = uint32_t;
inline constexpr Lit kFalse = 0;
inline constexpr Lit kTrue = 1;
inline constexpr Lit neg(Lit l) { return l ^ 1u; }
inline constexpr uint32_t node_of(Lit l) { return l >> 1; }
inline constexpr bool is_neg(Lit l) { return l & 1u; }
inline constexpr bool is_const(Lit l) { return l < 2; }

class Aig {
 public:
  Aig();

  Lit input();
  Lit land(Lit a, Lit b);
  Lit lor(Lit a, Lit b) { return neg(land(neg(a), neg(b))); }
  Lit lxor(Lit a, Lit b);
  Lit lxnor(Lit a, Lit b) { return neg(lxor(a, b)); }
  Lit ite(Lit c, Lit t, Lit e);
  Lit land_all(const std::vector<Lit>& v);
  Lit lor_all(const std::vector<Lit>& v);

  size_t num_nodes() const { return fan0_.size(); }
  bool is_input(uint32_t node) const { return node != 0 && fan0_[node] == kInputMark; }
  Lit fanin0(uint32_t node) const { return fan0_[node]; }
  Lit fanin1(uint32_t node) const { return fan1_[node]; }
  // Index of an input node in creation order.
  int input_index(uint32_t node) const { return input_idx_[node]; }
  size_t num_inputs() const { return inputs_.size(); }
  uint32_t input_node(size_t i) const { return inputs_[i]; }

  // Evaluates a literal under an input assignment indexed by input_index.
  bool eval(Lit l, const std::vector<bool>& inputs) const;

 private:
  static constexpr Lit kInputMark = 0xffffffffu;
  std::vector<Lit> fan0_, fan1_;
  std::vector<int> input_idx_;
  std::vector<uint32_t> inputs_;
  std::unordered_map<uint64_t, uint32_t> strash_;
};

// Little-endian bit vector over AIG literals.
using Bits = std::vector<Lit>;

Bits bv_const(uint32_t v, int w);
Bits bv_input(Aig& g, int w);
Bits bv_add(Aig& g, const Bits& a, const Bits& b);
Bits bv_sub(Aig& g, const Bits& a, const Bits& b);
Bits bv_mul(Aig& g, const Bits& a, const Bits& b);
Bits bv_xor(Aig& g, const Bits& a, const Bits& b);
Bits bv_ite(Aig& g, Lit c, const Bits& t, const Bits& e);
Lit bv_eq(Aig& g, const Bits& a, const Bits& b);
Lit bv_ult(Aig& g, const Bits& a, const Bits& b);
Lit bv_nonzero(Aig& g, const Bits& a);
Bits bv_resize(const Bits& a, int w);
Bits bv_slice(const Bits& a, int lo, int hi);
// Value of a constant vector; returns false if any bit is non-constant.
bool bv_is_const(const Bits& a, uint32_t* out);

}  // namespace sempat::sym
