#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "seqmeas/errors.hpp"
#include "seqmeas/hierarchy.hpp"
#include "seqmeas/separators.hpp"

using namespace seqmeas;

namespace {

// A packaged claim-3 stream: lambda_k is a Dirac at a deep block point and
// v is a union of lifted dyadic sets containing every such point.
std::vector<Claim3Input> make_claim3_stream(std::size_t len) {
  TermPtr v;
  {
    std::vector<TermPtr> parts;
    for (std::uint64_t n = 0; n < 14; ++n)
      parts.push_back(lift(n, dyadic(std::min<unsigned>(n + 2, 12), {0})));
    v = term_union(std::move(parts));
  }
  std::vector<Claim3Input> stream;
  for (std::size_t k = 0; k < len; ++k) {
    Integer pt = block_point_big(8 + k, 0);
    FinSuppMeasure lam({pt}, {Rational(1)});
    stream.push_back({finsupp_measure(lam), v, Rational(99, 100)});
  }
  return stream;
}

// A packaged claim-4 stream: lambda_k lives on block k+1 and concentrates
// on the dyadic residue class k; the oracle answers with the lifted
// complement of that class.
std::vector<Measure> make_claim4_stream(std::size_t len) {
  std::vector<Measure> stream;
  for (std::size_t k = 0; k < len; ++k)
    stream.push_back(block_push(
        k + 1, restrict_rescale(level_measure(1),
                                dyadic(12, {static_cast<std::uint64_t>(k)}))));
  return stream;
}

Claim4Oracle dyadic_complement_oracle() {
  return [](std::uint64_t, std::size_t k, const Rational&, const Rational&) {
    return union_lift(complement_of(dyadic(12, {k})));
  };
}

}  // namespace

TEST_CASE("point_term is a singleton even for huge points") {
  for (std::uint64_t x : {0ull, 1ull, 2ull, 17ull, 1023ull}) {
    TermPtr t = point_term(Integer(x));
    for (std::uint64_t y = 0; y < 2048; ++y)
      CHECK(member(t, y) == (y == x));
  }
  Integer big = (Integer(1) << 70) + 12345;
  TermPtr t = point_term(big);
  CHECK(member(t, big));
  CHECK_FALSE(member(t, Integer(big + 1)));
  CHECK_FALSE(member(t, Integer(3)));
  CHECK(level_measure(1).eval_or_throw(t) == 0);
}

TEST_CASE("separate_finsupp is exactly strong: target 1, nu 0") {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<std::uint64_t> pt(0, 1 << 20);
  for (unsigned level : {1u, 2u}) {
    Measure target = level_measure(level);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<Integer> pts;
      for (int j = 0; j < 5; ++j) pts.emplace_back(pt(rng));
      std::sort(pts.begin(), pts.end());
      pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
      std::vector<Rational> ws(pts.size(), Rational(1, Integer(pts.size())));
      FinSuppMeasure nu(pts, ws);
      Certificate c = separate_finsupp(target, nu, Rational(1, 10));
      CHECK(c.kind == CertKind::StrongOrthogonality);
      CHECK(target.eval_or_throw(c.witness) == 1);
      CHECK(finsupp_measure(nu).eval_or_throw(c.witness) == 0);
      CHECK(verify(c));
    }
  }
}

TEST_CASE("claim3 produces a verified F-membership certificate") {
  Measure target = level_measure(2);
  Certificate c = claim3_separator(target, make_claim3_stream(6),
                                   Rational(1, 20));
  CHECK(c.kind == CertKind::FMembership);
  std::string diag;
  CHECK(verify(c, &diag));
  INFO(diag);
  // Each adversary evaluates F1 itself below delta.
  for (const auto& rec : c.values)
    if (rec.measure_id.rfind("lambda", 0) == 0 && rec.rel == Relation::Lt) {
      CHECK(rec.value < Rational(1, 20));
      CHECK(rec.bound == Rational(1, 20));
    }
}

TEST_CASE("claim3 rejects bounds that are not above 1 - delta") {
  auto stream = make_claim3_stream(2);
  stream[0].bound = Rational(1, 2);
  CHECK_THROWS_AS(
      claim3_separator(level_measure(2), stream, Rational(1, 20)),
      CertificateInvalidError);
}

TEST_CASE("claim4 selects indices and bounds every selected lambda by delta") {
  Measure target = level_measure(2);
  auto stream = make_claim4_stream(6);
  Claim4Output out = claim4_separator(target, stream,
                                      dyadic_complement_oracle(),
                                      Rational(1, 8));
  CHECK_FALSE(out.selected.empty());
  CHECK(verify(out.certificate));
  for (std::size_t k : out.selected)
    CHECK(stream[k].eval_or_throw(out.certificate.witness) <= Rational(1, 8));
  // The schedule bound mu'_n(A_n) > 1 - 1/(n+1) is part of the certificate.
  bool found_mu_record = false;
  for (const auto& rec : out.certificate.values)
    if (rec.measure_id.rfind("mu'", 0) == 0) {
      found_mu_record = true;
      CHECK(rec.rel == Relation::Gt);
    }
  CHECK(found_mu_record);
}

TEST_CASE("claim4 with a useless oracle fails loudly") {
  auto bad_oracle = [](std::uint64_t, std::size_t, const Rational&,
                       const Rational&) { return finite_set({0}); };
  CHECK_THROWS_AS(
      claim4_separator(level_measure(2), make_claim4_stream(4), bad_oracle,
                       Rational(1, 8)),
      OracleFailureError);
}

TEST_CASE("null_union certifies unions of null sets") {
  Measure target = level_measure(2);
  std::vector<TermPtr> terms = {block(3), block(7),
                                lift(1, dyadic(2, {0})),
                                finite_set({4, 9})};
  Certificate c = null_union(terms, target);
  CHECK(c.kind == CertKind::NullUnion);
  CHECK(verify(c));
  CHECK_THROWS_AS(null_union({union_lift(dyadic(1, {0}))}, target),
                  NonNullInputError);
}

TEST_CASE("certificates survive the JSON round-trip") {
  Certificate c = separate_finsupp(
      level_measure(2),
      FinSuppMeasure({Integer(2), (Integer(1) << 77) + 3},
                     {Rational(1, 2), Rational(1, 2)}),
      Rational(1, 10));
  Certificate back = Certificate::from_json(c.to_json());
  CHECK(back.kind == c.kind);
  CHECK(back.delta == c.delta);
  CHECK(back.values.size() == c.values.size());
  CHECK(verify(back));
  // Byte-identical serialization: deterministic output.
  CHECK(back.to_json().dump() == c.to_json().dump());
}

TEST_CASE("verification is tamper-evident") {
  Certificate c = claim3_separator(level_measure(2), make_claim3_stream(4),
                                   Rational(1, 20));
  REQUIRE(verify(c));

  Certificate wrong_value = c;
  wrong_value.values[0].value += Rational(1, 9);
  std::string diag;
  CHECK_FALSE(verify(wrong_value, &diag));
  CHECK_FALSE(diag.empty());

  Certificate wrong_bound = c;
  // Flip an inequality so the recorded relation no longer holds.
  for (auto& rec : wrong_bound.values)
    if (rec.rel == Relation::Lt) {
      rec.rel = Relation::Gt;
      break;
    }
  CHECK_FALSE(verify(wrong_bound));

  Certificate wrong_term = c;
  wrong_term.values[0].term = complement_of(wrong_term.values[0].term);
  CHECK_FALSE(verify(wrong_term));
}
