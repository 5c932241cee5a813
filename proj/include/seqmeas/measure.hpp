#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "seqmeas/density.hpp"
#include "seqmeas/rational.hpp"
#include "seqmeas/term.hpp"

namespace seqmeas {

class MeasureImpl;

// Structural hints used when searching for small-part partitions of unity.
struct SmallnessInfo {
  bool non_atomic = false;
  unsigned max_level = 1;
  Rational coeff_bound = 1;
};

// Immutable finitely additive probability measure, represented as an
// evaluator on terms plus structure. eval returns nullopt ("unknown") when
// a limit is not resolvable in the normal form or a resource cap is hit.
class Measure {
 public:
  Measure() = default;
  explicit Measure(std::shared_ptr<const MeasureImpl> impl)
      : impl_(std::move(impl)) {}

  std::optional<Rational> eval(const TermPtr& t) const;
  Rational eval_or_throw(const TermPtr& t) const;  // UndefinedValueError
  nlohmann::json to_json() const;
  std::string describe() const;
  SmallnessInfo smallness() const;
  const std::shared_ptr<const MeasureImpl>& impl() const { return impl_; }
  explicit operator bool() const { return impl_ != nullptr; }

 private:
  std::shared_ptr<const MeasureImpl> impl_;
};

// Coarse structural classification used by decompose.
enum class StructureTag {
  Atomic,          // finitely supported
  BlockSupported,  // all mass inside a single block
  NonAtomic,       // level measure or a rescaling of one
  Combination,     // formal positive combination; see structure_parts
  Zero,
  Opaque,
};

class MeasureImpl {
 public:
  virtual ~MeasureImpl() = default;
  virtual std::optional<Rational> eval(const TermPtr& t) const = 0;
  virtual nlohmann::json to_json() const = 0;
  virtual std::string describe() const = 0;
  virtual SmallnessInfo smallness() const { return {}; }
  virtual StructureTag structure_tag() const { return StructureTag::Opaque; }
  virtual std::vector<std::pair<Rational, Measure>> structure_parts() const {
    return {};
  }
};

// Finitely supported probability measure.
struct FinSuppMeasure {
  std::vector<Integer> support;   // distinct, sorted
  std::vector<Rational> weights;  // positive, sum exactly 1

  FinSuppMeasure(std::vector<Integer> points, std::vector<Rational> weights);
  FinSuppMeasure(const std::vector<std::uint64_t>& points,
                 std::vector<Rational> weights);
  static FinSuppMeasure dirac(Integer x);
  static FinSuppMeasure uniform_prefix(std::uint64_t n);  // uniform on {0..n}

  Rational eval(const TermPtr& t) const;
  Measure as_measure() const;
  nlohmann::json to_json() const;
  static FinSuppMeasure from_json(const nlohmann::json& j);
};

Measure finsupp_measure(FinSuppMeasure m);
// Level measure of the tower; level 1 is asymptotic density, level a+1
// evaluates the eventual per-block limit against the level-a measure.
Measure level_measure(unsigned level, const Limits& limits = default_limits());
// Tower with explicit per-block bases; the last base repeats for all
// further blocks (uniform tower = a single base).
Measure level_measure_over(std::vector<Measure> bases,
                           const Limits& limits = default_limits());
Measure combination(std::vector<std::pair<Rational, Measure>> parts);
// Pushforward of `base` into block n via i -> x^n_i.
Measure block_push(std::uint64_t n, Measure base);
Measure zero_measure();

// m'(t) = m(t intersect Y) / m(Y). Zero or unknown mass is an error.
Measure restrict_rescale(const Measure& m, const TermPtr& y);
FinSuppMeasure restrict_rescale(const FinSuppMeasure& m, const TermPtr& y);

// nu(t) = sum_j c_j m(t intersect A_j) for a simple density over a
// partition. The finitely supported overload renormalizes (witness
// transfer); the general overload requires integral exactly 1.
Measure reweight(const Measure& m,
                 const std::vector<std::pair<TermPtr, Rational>>& parts,
                 const Limits& limits = default_limits());
FinSuppMeasure reweight(const FinSuppMeasure& m,
                        const std::vector<std::pair<TermPtr, Rational>>& parts,
                        const Limits& limits = default_limits());

// max over G of |m1 - m2|; throws UndefinedValueError on unknown.
Rational generator_distance(const Measure& m1, const Measure& m2,
                            const std::vector<TermPtr>& generators);

// Structure access for level measures.
bool is_level_measure(const Measure& m);
unsigned level_of(const Measure& m);
// mu'_n(t): the block-n base measure applied to the block trace.
std::optional<Rational> block_value(const Measure& level_m, const TermPtr& t,
                                    std::uint64_t n);
// The (lazily shared) measure carried by block n.
Measure block_measure(const Measure& level_m, std::uint64_t n);

Measure measure_from_json(const nlohmann::json& j);

}  // namespace seqmeas
