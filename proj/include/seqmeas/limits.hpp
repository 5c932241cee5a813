#pragma once

#include <cstdint>

namespace seqmeas {

// Resource caps shared by the evaluators. All defaults are desk-scale.
struct Limits {
  std::uint64_t max_prefix = 1ull << 20;
  unsigned max_dyadic_level = 22;
  unsigned max_density_depth = 64;
  std::uint64_t partition_check_prefix = 1ull << 12;
};

inline const Limits& default_limits() {
  static const Limits l{};
  return l;
}

}  // namespace seqmeas
