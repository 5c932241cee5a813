#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include <json.hpp>

#include "seqmeas/limits.hpp"
#include "seqmeas/rational.hpp"
#include "seqmeas/term.hpp"

namespace seqmeas {

// Eventually periodic sets: (residues mod 2^k) with a finite override map.
// This is the closed form for every term without block-type nodes.
struct PeriodicForm {
  unsigned k = 0;
  std::vector<std::uint64_t> bits;  // 2^k bits, word packed
  std::map<std::uint64_t, bool> overrides;

  bool periodic_bit(std::uint64_t r) const;
  bool contains(std::uint64_t x) const;
  std::uint64_t popcount() const;
  Rational density() const;
};

// Nullopt when the term has block-type nodes or the combined dyadic level
// exceeds limits.max_dyadic_level.
std::optional<PeriodicForm> periodic_form(const TermPtr& t,
                                          const Limits& limits = default_limits());

struct DensityReport {
  enum class Kind { Exact, Estimate, Unknown };
  Kind kind = Kind::Unknown;
  Rational value = 0;
  std::uint64_t prefix_length = 0;           // estimates only
  std::optional<Rational> error_bound;       // when derivable

  nlohmann::json to_json() const;
};

// Exact asymptotic density through the block-profile normal form; reports
// Unknown when a resource cap is hit (never an error).
DensityReport exact_density(const TermPtr& t,
                            const Limits& limits = default_limits());

// |t intersect [0,N)| / N with an error bound derived from the term's
// periodicity structure when the exact density is defined.
DensityReport cesaro_density(const TermPtr& t, std::uint64_t n,
                             const Limits& limits = default_limits());

// Bound on | |t intersect [0,m)| - d(t)*m |, valid whenever exact_density
// resolves. Conservative; used by the Cesaro/oracle agreement checks.
Rational count_error_bound(const TermPtr& t, std::uint64_t m,
                           const Limits& limits = default_limits());

}  // namespace seqmeas
