#pragma once

#include "sempat/platform.hpp"

namespace sempat {

struct PlatCRParams {
  int reuse_buf_size = 2;
  SpecFeature spec_feature = SpecFeature::None;
  int spec_window = 4;
};

enum class StoreInvalidation { PerAddress, PerSetIndex };

struct PlatSSParams {
  int lsqc_entries = 2;
  int set_index_width = 1;
  StoreInvalidation store_invalidation = StoreInvalidation::PerAddress;
  SpecFeature spec_feature = SpecFeature::None;
  int spec_window = 4;
};

ModelPtr build_platcr(const MachineConfig& mc, const PlatCRParams& p);
ModelPtr build_platss(const MachineConfig& mc, const PlatSSParams& p);
// Buffers are word_width bits wide; registers and immediates are unused.
ModelPtr build_platsynth(int pdep, int word_width = 2);
ModelPtr attach_speculation(const ModelPtr& m, SpecFeature f, int window);

// Set index used by the per-set-index store invalidation and the diffindex predicate:
// address bits [set_index_width+1 : 2].
inline uint32_t set_index(uint32_t addr, int set_index_width) {
  return (addr >> 2) & MachineConfig::mask(set_index_width);
}

}  // namespace sempat
