#pragma once

#include <vector>

#include "sempat/aig.hpp"
#include "sempat/sat.hpp"

namespace sempat {

// Lazy Tseitin encoding of AIG cones into a solver. Nodes are encoded once, on first use.
class CnfBridge {
 public:
  CnfBridge(const sym::Aig& g, sat::Solver& s) : g_(g), s_(s) {}

  sat::SLit lit(sym::Lit l);
  // Model value of an AIG literal after a Sat answer; unencoded inputs read as false.
  bool value(sym::Lit l) const;
  uint32_t value(const sym::Bits& b) const;

 private:
  const sym::Aig& g_;
  sat::Solver& s_;
  std::vector<int> var_;
  int const_var_ = -1;
};

}  // namespace sempat
