#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "seqmeas/decompose.hpp"
#include "seqmeas/measure.hpp"

namespace seqmeas {

using NamedTerm = std::pair<std::string, TermPtr>;

struct LevelBuild;
using LevelBuildPtr = std::shared_ptr<const LevelBuild>;

// One level of the tower: the measure, the generator family it is tested
// on, and the build it was lifted from.
struct LevelBuild {
  unsigned level = 1;
  std::vector<NamedTerm> generators;
  Measure measure;
  LevelBuildPtr base;  // null at level 1
};

// The measure-algebra embedding of the dyadic interval algebra: interval
// [j/2^k, (j+1)/2^k) maps to the residue class of bitrev_k(j) mod 2^k, so
// density equals Lebesgue measure exactly.
std::uint64_t bit_reverse(std::uint64_t j, unsigned k);
TermPtr phi_embed(unsigned k, const std::vector<std::uint64_t>& intervals);

// Dyadic singleton generator families; the default preset uses levels 2
// and 4 (20 generators).
std::vector<NamedTerm> dyadic_generator_family(
    const std::vector<unsigned>& levels);
std::vector<NamedTerm> default_generator_family();

LevelBuildPtr build_level1(const Limits& limits = default_limits());
// Successor step: identical copies of `base` on every block.
LevelBuildPtr canonical_pair(const LevelBuildPtr& base);
// Mixed successor step: bases per block, the last one repeating.
LevelBuildPtr canonical_pair(const std::vector<LevelBuildPtr>& bases);
LevelBuildPtr build_tower(unsigned level,
                          const Limits& limits = default_limits());

// Uniform average on {0..n}.
FinSuppMeasure witness_level1(std::uint64_t n);
// The block-m stage witness of a level >= 2 build: the recursive witness of
// the block's base at the given inner stage, pushed into block m.
FinSuppMeasure witness_next(const LevelBuild& build, std::uint64_t m,
                            std::uint64_t inner_depth);

class WitnessStream {
 public:
  enum class Kind { Generic, UniformPrefix };
  using StageFn = std::function<FinSuppMeasure(std::uint64_t)>;

  WitnessStream(unsigned target_level, std::string provenance, StageFn fn,
                Kind kind = Kind::Generic)
      : level_(target_level), provenance_(std::move(provenance)),
        fn_(std::move(fn)), kind_(kind) {}

  FinSuppMeasure at(std::uint64_t stage) const { return fn_(stage); }
  unsigned target_level() const { return level_; }
  const std::string& provenance() const { return provenance_; }
  Kind kind() const { return kind_; }

 private:
  unsigned level_;
  std::string provenance_;
  StageFn fn_;
  Kind kind_;
};

// Stage s: level 1 averages {0..s}; level a+1 takes block s's recursive
// witness at inner stage s (square diagonal).
WitnessStream diagonal_stream(LevelBuildPtr build);
WitnessStream constant_stream(FinSuppMeasure m);

struct ConvergenceRow {
  std::uint64_t stage;
  std::size_t generator;
  Rational witness, target, dist;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;   // full stage x generator table
  std::vector<Rational> stage_dist;   // max distance per stage
  std::vector<std::string> generator_names;
  Rational tol;
  std::uint64_t horizon = 0;
  bool pass = false;
  // First stage of the maximal suffix staying within tol.
  std::optional<std::uint64_t> settle_stage;

  std::string to_csv() const;
};

ConvergenceReport converge_check(const WitnessStream& stream,
                                 const Measure& target,
                                 const std::vector<NamedTerm>& generators,
                                 const Rational& tol, std::uint64_t horizon,
                                 bool record_rows = true);

// Restrict-and-rescale transport: stage s drops schedule term A (index
// min(s, len-1)) and rescales, after checking the decomposition bounds
// nu''(A_n) < 1/n and nu'(complement A_n) < 1/n against `target`.
WitnessStream nonatomic_witness_extract(const WitnessStream& stream,
                                        const std::vector<TermPtr>& schedule,
                                        const Measure& target,
                                        const Limits& limits = default_limits());

}  // namespace seqmeas
