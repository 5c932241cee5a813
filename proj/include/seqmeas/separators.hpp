#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqmeas/measure.hpp"

namespace seqmeas {

enum class CertKind {
  Orthogonality,        // nu(F) > 1-delta and mu(F) < delta
  StrongOrthogonality,  // nu1(C) > nu1(full)-delta and nu2(C) = 0
  FMembership,          // per-block values of F tend to 1 with recorded rates
  NullUnion,            // union of null sets, tail-trimmed to stay null
};

enum class Relation { Eq, Lt, Le, Gt, Ge };

std::string relation_to_string(Relation r);
Relation relation_from_string(const std::string& s);
bool relation_holds(Relation r, const Rational& value, const Rational& bound);

// One re-checkable claim: measure(term) evaluates to exactly `value`, and
// `value rel bound` holds.
struct ValueRecord {
  std::string measure_id;
  Measure measure;
  TermPtr term;
  Rational value;
  Relation rel = Relation::Eq;
  Rational bound;
};

struct Certificate {
  CertKind kind = CertKind::Orthogonality;
  TermPtr witness;
  nlohmann::json schedule;  // operation-specific indices
  std::vector<ValueRecord> values;
  Rational delta;
  std::uint64_t truncation = 0;

  nlohmann::json to_json() const;
  static Certificate from_json(const nlohmann::json& j);
};

// Re-evaluates every recorded value and inequality from scratch; on failure
// fills `diagnostic` with the first failing entry.
bool verify(const Certificate& c, std::string* diagnostic = nullptr);

// A singleton term for one (possibly huge) natural, via nested lifts.
TermPtr point_term(const Integer& x);

// F with target(F) = 1 and nu(F) = 0: the complement of nu's support.
Certificate separate_finsupp(const Measure& target, const FinSuppMeasure& nu,
                             const Rational& delta);

// One adversarial stream entry for the Claim-3 construction: the caller
// asserts lambda(v) >= bound with bound > 1 - delta, and that the per-block
// values of v under the target tend to 0.
struct Claim3Input {
  Measure lambda;
  TermPtr v;
  Rational bound;
};

Certificate claim3_separator(const Measure& target,
                             const std::vector<Claim3Input>& stream,
                             const Rational& delta);

// On demand produces a term A with block-n value mu'_n(A /\ B_n) > 1 - eps
// and lambda_k(A /\ B_n) < eps_prime.
using Claim4Oracle = std::function<TermPtr(
    std::uint64_t n, std::size_t k, const Rational& eps,
    const Rational& eps_prime)>;

struct Claim4Output {
  Certificate certificate;
  std::vector<std::size_t> selected;  // the subsequence (k_n)
};

Claim4Output claim4_separator(const Measure& target,
                              const std::vector<Measure>& stream,
                              const Claim4Oracle& oracle,
                              const Rational& delta);

// A = union over i of (A_i minus the blocks below n_i), null under target,
// containing each A_i up to finitely many blocks.
Certificate null_union(const std::vector<TermPtr>& null_terms,
                       const Measure& target);

}  // namespace seqmeas
