#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "seqmeas/decompose.hpp"
#include "seqmeas/errors.hpp"
#include "seqmeas/hierarchy.hpp"
#include "seqmeas/measure.hpp"
#include "seqmeas/term.hpp"
#include "seqmeas/testing.hpp"

using namespace seqmeas;

TEST_CASE("level-1 measure is exact density") {
  Measure mu = level_measure(1);
  CHECK(mu.eval_or_throw(dyadic(2, {0})) == Rational(1, 4));
  CHECK(mu.eval_or_throw(block(3)) == Rational(1, 16));
  CHECK(mu.eval_or_throw(finite_set({5, 6})) == 0);
  CHECK(mu.eval_or_throw(complement_of(finite_set({}))) == 1);
}

TEST_CASE("level-2 measure on lifted generators matches level 1") {
  Measure mu2 = level_measure(2);
  for (unsigned k = 1; k <= 4; ++k)
    for (std::uint64_t r = 0; r < (1ull << k); ++r) {
      TermPtr m = dyadic(k, {r});
      CHECK(mu2.eval_or_throw(union_lift(m)) == pow2_inv(k));
    }
  // Blocks and finite sets are null at level 2.
  for (std::uint64_t n = 0; n < 16; ++n)
    CHECK(mu2.eval_or_throw(block(n)) == 0);
  CHECK(mu2.eval_or_throw(finite_set({0, 100, 5000})) == 0);
}

TEST_CASE("level-3 measure sees doubly lifted dyadic sets") {
  Measure mu3 = level_measure(3);
  CHECK(mu3.eval_or_throw(union_lift(union_lift(dyadic(1, {0})))) ==
        Rational(1, 2));
  CHECK(mu3.eval_or_throw(union_lift(dyadic(2, {0}))) == 0);
}

TEST_CASE("finitely supported measures evaluate by membership") {
  FinSuppMeasure nu({Integer(3), Integer(10)},
                    {Rational(1, 3), Rational(2, 3)});
  Measure m = finsupp_measure(nu);
  CHECK(m.eval_or_throw(finite_set({3})) == Rational(1, 3));
  CHECK(m.eval_or_throw(finite_set({10})) == Rational(2, 3));
  CHECK(m.eval_or_throw(complement_of(finite_set({3, 10}))) == 0);
  CHECK(m.eval_or_throw(dyadic(1, {0})) == Rational(2, 3));  // 10 is even
}

TEST_CASE("combination is the weighted sum of its parts") {
  Measure m = combination({{Rational(1, 4), finsupp_measure(
                                                 FinSuppMeasure::dirac(7))},
                           {Rational(3, 4), level_measure(1)}});
  CHECK(m.eval_or_throw(finite_set({7})) == Rational(1, 4));
  CHECK(m.eval_or_throw(dyadic(1, {1})) ==
        Rational(1, 4) + Rational(3, 4) * Rational(1, 2));
  CHECK(m.eval_or_throw(complement_of(finite_set({}))) == 1);
}

TEST_CASE("restrict_rescale is conditional measure") {
  Measure m = restrict_rescale(level_measure(1), dyadic(2, {0}));
  CHECK(m.eval_or_throw(dyadic(2, {0})) == 1);
  CHECK(m.eval_or_throw(dyadic(2, {1})) == 0);
  CHECK(m.eval_or_throw(dyadic(3, {0})) == Rational(1, 2));
  CHECK_THROWS_AS(restrict_rescale(level_measure(1), finite_set({1})),
                  ZeroMassError);
}

TEST_CASE("reweight by a normalized indicator equals restrict_rescale") {
  Measure mu = level_measure(1);
  TermPtr y = dyadic(3, {0, 1, 2});
  Measure rw = reweight(mu, {{y, Rational(8, 3)},
                             {complement_of(y), Rational(0)}});
  Measure rr = restrict_rescale(mu, y);
  for (unsigned k = 1; k <= 4; ++k)
    for (std::uint64_t r = 0; r < (1ull << k); ++r)
      CHECK(rw.eval_or_throw(dyadic(k, {r})) ==
            rr.eval_or_throw(dyadic(k, {r})));
}

TEST_CASE("reweight rejects non-normalized densities") {
  Measure mu = level_measure(1);
  TermPtr y = dyadic(1, {0});
  CHECK_THROWS_AS(reweight(mu, {{y, Rational(3)},
                                {complement_of(y), Rational(0)}}),
                  NormalizationError);
  CHECK_THROWS_AS(reweight(mu, {{y, Rational(1)}}), PartitionError);
}

TEST_CASE("block_push plants a base measure inside one block") {
  Measure m = block_push(4, level_measure(1));
  CHECK(m.eval_or_throw(block(4)) == 1);
  CHECK(m.eval_or_throw(block(3)) == 0);
  CHECK(m.eval_or_throw(lift(4, dyadic(1, {0}))) == Rational(1, 2));
  CHECK(m.eval_or_throw(union_lift(dyadic(2, {3}))) == Rational(1, 4));
}

TEST_CASE("measures are finitely additive on random disjoint pairs") {
  std::mt19937_64 rng(61);
  std::vector<Measure> ms = {level_measure(1), level_measure(2),
                             block_push(2, level_measure(1)),
                             finsupp_measure(FinSuppMeasure::uniform_prefix(8))};
  for (int trial = 0; trial < 40; ++trial) {
    TermPtr a = random_term(rng, 2);
    TermPtr b = term_diff(random_term(rng, 2), a);
    for (const Measure& m : ms) {
      auto va = m.eval(a), vb = m.eval(b), vu = m.eval(term_union({a, b}));
      if (va && vb && vu) CHECK(*vu == *va + *vb);
    }
  }
}

TEST_CASE("measure JSON round-trip preserves values") {
  std::vector<Measure> ms = {
      level_measure(1), level_measure(3),
      finsupp_measure(FinSuppMeasure({Integer(1) << 80, Integer(5)},
                                     {Rational(1, 2), Rational(1, 2)})),
      block_push(3, level_measure(1)),
      combination({{Rational(1, 2), level_measure(2)},
                   {Rational(1, 2),
                    finsupp_measure(FinSuppMeasure::dirac(9))}}),
      restrict_rescale(level_measure(1), dyadic(2, {1})),
      zero_measure()};
  std::mt19937_64 rng(17);
  for (const Measure& m : ms) {
    Measure back = measure_from_json(m.to_json());
    for (int trial = 0; trial < 25; ++trial) {
      TermPtr t = random_term(rng, 2);
      CHECK(m.eval(t) == back.eval(t));
    }
  }
}

TEST_CASE("big-integer support points survive the JSON round-trip") {
  Integer big = (Integer(1) << 100) + 7;
  FinSuppMeasure nu({big}, {Rational(1)});
  FinSuppMeasure back = FinSuppMeasure::from_json(nu.to_json());
  REQUIRE(back.support.size() == 1);
  CHECK(back.support[0] == big);
}

TEST_CASE("generator_distance is the max deviation over a family") {
  std::vector<TermPtr> family;
  for (const auto& [name, g] : default_generator_family())
    family.push_back(g);
  Measure mu = level_measure(1);
  Measure nu = finsupp_measure(FinSuppMeasure::uniform_prefix(4));
  CHECK(generator_distance(mu, nu, family) > 0);
  CHECK(generator_distance(mu, mu, family) == 0);
}

TEST_CASE("decompose splits a mixture and re-sums exactly") {
  Measure m = combination(
      {{Rational(1, 3), finsupp_measure(FinSuppMeasure::dirac(12))},
       {Rational(1, 3), block_push(1, level_measure(1))},
       {Rational(1, 3), level_measure(2)}});
  Decomposition d = decompose(m);
  CHECK(d.mass0 + d.mass1 + d.mass2 == 1);
  CHECK(d.mass2 == Rational(1, 3));
  for (const auto& [name, g] : default_generator_family()) {
    Rational lhs = m.eval_or_throw(g);
    Rational rhs = d.mass0 * d.part0.eval_or_throw(g) +
                   d.mass1 * d.part1.eval_or_throw(g) +
                   d.mass2 * d.part2.eval_or_throw(g);
    CHECK(lhs == rhs);
  }
  REQUIRE(d.certificate.has_value());
  CHECK(d.certificate->verify(d.part2));
}

TEST_CASE("non-atomicity certificates are extensional and tamper-evident") {
  NonAtomicityCertificate cert = nonatomicity_certificate(level_measure(2));
  CHECK(cert.verify(level_measure(2)));
  // The same partitions do not certify a measure with an atom.
  Measure atomic = combination(
      {{Rational(1, 2), level_measure(2)},
       {Rational(1, 2), finsupp_measure(FinSuppMeasure::dirac(0))}});
  CHECK_FALSE(cert.verify(atomic));
}

TEST_CASE("decompose rejects opaque inputs") {
  // A raw finitely supported measure is structured; only measures without
  // structure metadata are rejected, so everything in the public surface
  // decomposes.  Zero measure decomposes to all-zero masses.
  Decomposition d = decompose(zero_measure());
  CHECK(d.mass0 + d.mass1 + d.mass2 == 0);
}
