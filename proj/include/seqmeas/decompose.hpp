#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "seqmeas/measure.hpp"

namespace seqmeas {

enum class ComponentKind { Atomic, BlockSupported, NonAtomic };

struct Component {
  Rational weight;
  Measure measure;
  ComponentKind kind;
};

// Flattens a structured measure (formal positive combination of finitely
// supported pieces, block pushforwards, and level-measure parts) into its
// components. Throws UnstructuredInputError on anything else.
std::vector<Component> structure_of(const Measure& m);

// A finite partition of unity with all parts small under a target measure.
struct SmallPartition {
  Rational epsilon;
  unsigned k = 0;      // dyadic refinement level
  unsigned depth = 0;  // lift depth used for the refinement
  std::vector<TermPtr> parts;
  std::vector<Rational> values;

  nlohmann::json to_json() const;
  static SmallPartition from_json(const nlohmann::json& j);
};

struct NonAtomicityCertificate {
  std::vector<SmallPartition> partitions;

  nlohmann::json to_json() const;
  static NonAtomicityCertificate from_json(const nlohmann::json& j);
  // Re-checks the partition property (bounded extensional) and re-evaluates
  // every part against the target.
  bool verify(const Measure& target,
              const Limits& limits = default_limits()) const;
};

// The dyadic refinement partition at level k lifted to depth `depth`:
// every part has value at most 2^-k under each tower measure up to that
// depth. depth = 1 is the plain dyadic partition into residues mod 2^k.
std::vector<TermPtr> tower_partition(unsigned depth, unsigned k);

// Builds small partitions for the fixed schedule epsilon = 2^-j, j = 1..10.
NonAtomicityCertificate nonatomicity_certificate(
    const Measure& target, const Limits& limits = default_limits());

struct Decomposition {
  Measure part0, part1, part2;         // each may be the zero measure
  Rational mass0, mass1, mass2;        // input = sum of mass_i * part_i
  Rational tail_bound;                 // 0 for structured inputs
  std::optional<NonAtomicityCertificate> certificate;  // for part2
};

Decomposition decompose(const Measure& m,
                        const Limits& limits = default_limits());

}  // namespace seqmeas
