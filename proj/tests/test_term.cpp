#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "seqmeas/density.hpp"
#include "seqmeas/errors.hpp"
#include "seqmeas/term.hpp"
#include "seqmeas/testing.hpp"

using namespace seqmeas;

TEST_CASE("dyadic membership is residue membership mod 2^k") {
  TermPtr evens = dyadic(1, {0});
  for (std::uint64_t x = 0; x < 1000; ++x)
    CHECK(member(evens, x) == (x % 2 == 0));
  TermPtr d = dyadic(3, {1, 5});
  for (std::uint64_t x = 0; x < 1000; ++x)
    CHECK(member(d, x) == (x % 8 == 1 || x % 8 == 5));
}

TEST_CASE("finite set membership") {
  TermPtr t = finite_set({0, 17, 42});
  CHECK(member(t, 0));
  CHECK(member(t, 17));
  CHECK(member(t, 42));
  CHECK_FALSE(member(t, 1));
  CHECK_FALSE(member(t, 43));
}

TEST_CASE("blocks partition the naturals") {
  // Every x with x + 1 < 2^16 lies in exactly one of blocks 0..15.
  for (std::uint64_t x = 0; x + 1 < (1u << 16); ++x) {
    int hits = 0;
    for (std::uint64_t n = 0; n < 16; ++n)
      if (member(block(n), x)) ++hits;
    CHECK(hits == 1);
  }
}

TEST_CASE("block points are enumerated by 2^n(2i+1)-1") {
  CHECK(block_point(0, 0) == 0);
  CHECK(block_point(0, 1) == 2);
  CHECK(block_point(1, 0) == 1);
  CHECK(block_point(2, 0) == 3);
  CHECK(block_point(2, 1) == 11);
  for (std::uint64_t n = 0; n < 10; ++n)
    for (std::uint64_t i = 0; i < 50; ++i) {
      std::uint64_t x = block_point(n, i);
      CHECK(x + 1 == (1ull << n) * (2 * i + 1));
      CHECK(member(block(n), x));
    }
}

TEST_CASE("lift copies the index set into block n") {
  TermPtr t = lift(3, finite_set({0, 2, 5}));
  for (std::uint64_t i : {0ull, 2ull, 5ull}) CHECK(member(t, block_point(3, i)));
  for (std::uint64_t i : {1ull, 3ull, 4ull, 6ull})
    CHECK_FALSE(member(t, block_point(3, i)));
  CHECK_FALSE(member(t, block_point(2, 0)));
}

TEST_CASE("union lift acts blockwise") {
  TermPtr t = union_lift(dyadic(1, {0}));  // even indices in every block
  for (std::uint64_t n = 0; n < 8; ++n)
    for (std::uint64_t i = 0; i < 20; ++i)
      CHECK(member(t, block_point(n, i)) == (i % 2 == 0));
}

TEST_CASE("membership for big integer points matches block structure") {
  Integer i = Integer(1) << 90;
  Integer x = block_point_big(100, i);
  CHECK(member(block(100), x));
  CHECK_FALSE(member(block(99), x));
  CHECK(member(lift(100, dyadic(1, {0})), x));
  CHECK_FALSE(member(lift(100, dyadic(1, {1})), x));
  // Small points agree between the 64-bit and big-integer paths.
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    TermPtr t = random_term(rng, 3);
    for (std::uint64_t p = 0; p < 512; ++p)
      CHECK(member(t, p) == member(t, Integer(p)));
  }
}

TEST_CASE("boolean operations agree with pointwise evaluation") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    TermPtr a = random_term(rng, 2);
    TermPtr b = random_term(rng, 2);
    for (std::uint64_t x = 0; x < 600; ++x) {
      CHECK(member(term_union({a, b}), x) == (member(a, x) || member(b, x)));
      CHECK(member(term_inter({a, b}), x) == (member(a, x) && member(b, x)));
      CHECK(member(term_diff(a, b), x) == (member(a, x) && !member(b, x)));
      CHECK(member(complement_of(a), x) == !member(a, x));
    }
  }
}

TEST_CASE("term JSON round-trip preserves membership") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 80; ++trial) {
    TermPtr t = random_term(rng, 3);
    TermPtr u = term_from_json(term_to_json(t));
    for (std::uint64_t x = 0; x < 512; ++x) CHECK(member(t, x) == member(u, x));
  }
}

TEST_CASE("malformed term JSON raises a parse error") {
  CHECK_THROWS_AS(term_from_json(nlohmann::json{{"gen", "nope"}}), ParseError);
  CHECK_THROWS_AS(term_from_json(nlohmann::json::array()), ParseError);
  CHECK_THROWS_AS(term_from_json(nlohmann::json{{"op", "union"}}), ParseError);
}

TEST_CASE("prefix_count matches naive membership counting") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    TermPtr t = random_term(rng, 2);
    std::uint64_t naive = 0;
    const std::uint64_t n = 2048;
    for (std::uint64_t x = 0; x < n; ++x)
      if (member(t, x)) ++naive;
    CHECK(prefix_count(t, n) == naive);
  }
}
