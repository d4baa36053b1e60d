#pragma once

#include "mrafd/antenna.hpp"

namespace mrafd::test {

// Building the bank takes a moment; share one per test binary.
inline const antenna::PatternBank& default_bank() {
  static const antenna::PatternBank bank = antenna::build_pattern_bank(antenna::ArrayGeometry::defaults());
  return bank;
}

}  // namespace mrafd::test
