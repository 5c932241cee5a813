#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqmeas/limits.hpp"
#include "seqmeas/rational.hpp"

namespace seqmeas {

// Symbolic computable subsets of the naturals. Terms are immutable and
// shared; membership of any natural is decidable by structural recursion.
//
// Generators:
//   Finite(E)        finite set E
//   Dyadic(k, S)     {x : x mod 2^k in S}
//   Block(n)         B_n = {x : x+1 = 2^n(2i+1)}   (blocks partition N)
//   Lift(n, A)       A^n = {x^n_i : i in A} subset of B_n
//   UnionLift(A)     union over n of Lift(n, A)
// with complement / union / intersection / difference as internal nodes.
enum class TermKind {
  Finite,
  Dyadic,
  Block,
  Lift,
  UnionLift,
  Compl,
  Union,
  Inter,
  Diff,
};

class Term;
using TermPtr = std::shared_ptr<const Term>;

class Term {
 public:
  TermKind kind;
  std::vector<std::uint64_t> elems;     // Finite (sorted, unique)
  unsigned dyadic_level = 0;            // Dyadic
  std::vector<std::uint64_t> residues;  // Dyadic (sorted, < 2^k)
  std::uint64_t block_index = 0;        // Block, Lift
  std::vector<TermPtr> args;            // Compl/Lift/UnionLift: args[0]
};

// Block encoding helpers: x lies in B_n with n = ctz(x+1), and
// x^n_i = 2^n(2i+1) - 1.
unsigned block_of(std::uint64_t x);
std::uint64_t index_in_block(std::uint64_t x);
std::uint64_t block_point(std::uint64_t n, std::uint64_t i);

// Constructors. The n-ary ones fold constants (empty/full, finite sets,
// small dyadics) so that derived traces stay small; folding is purely
// extensional and covered by the randomized Boolean-algebra tests.
TermPtr finite_set(std::vector<std::uint64_t> elems);
TermPtr dyadic(unsigned k, std::vector<std::uint64_t> residues);
TermPtr block(std::uint64_t n);
TermPtr lift(std::uint64_t n, TermPtr inner);
TermPtr union_lift(TermPtr inner);
TermPtr complement_of(TermPtr t);
TermPtr term_union(std::vector<TermPtr> args);
TermPtr term_union(TermPtr a, TermPtr b);
TermPtr term_inter(std::vector<TermPtr> args);
TermPtr term_inter(TermPtr a, TermPtr b);
TermPtr term_diff(TermPtr a, TermPtr b);

TermPtr empty_term();
TermPtr full_term();
bool is_empty_term(const TermPtr& t);
bool is_full_term(const TermPtr& t);

bool member(const Term& t, std::uint64_t x);
inline bool member(const TermPtr& t, std::uint64_t x) { return member(*t, x); }
// Membership for points beyond 64-bit range (deep-block witness points).
bool member(const Term& t, const Integer& x);
inline bool member(const TermPtr& t, const Integer& x) { return member(*t, x); }
// x^n_i as an exact integer; never overflows.
Integer block_point_big(std::uint64_t n, const Integer& i);

bool term_equal(const TermPtr& a, const TermPtr& b);
bool has_block_nodes(const Term& t);

// {i : x^n_i in t}. block_trace(lift(n, a), n) == a.
TermPtr block_trace(const TermPtr& t, std::uint64_t n);

// Trace shared by all sufficiently deep blocks.
TermPtr tail_trace(const TermPtr& t);

// Per-block normal form: trace_n = exceptional[n] when present, tail
// otherwise. Only finitely many blocks are exceptional for any term.
struct BlockProfile {
  std::map<std::uint64_t, TermPtr> exceptional;
  TermPtr tail;
};
BlockProfile block_profile(const TermPtr& t);

// Characteristic prefix: bit i = member(t, i). Throws ResourceLimitError
// when n exceeds limits.max_prefix.
std::vector<bool> prefix_bits(const TermPtr& t, std::uint64_t n,
                              const Limits& limits = default_limits());
std::uint64_t prefix_count(const TermPtr& t, std::uint64_t n,
                           const Limits& limits = default_limits());

nlohmann::json term_to_json(const TermPtr& t);
TermPtr term_from_json(const nlohmann::json& j);

// Compact printable form, used for generator ids and diagnostics.
std::string term_to_string(const TermPtr& t);

}  // namespace seqmeas
