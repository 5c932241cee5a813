#include "seqmeas/separators.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "seqmeas/errors.hpp"

namespace seqmeas {

using nlohmann::json;

std::string relation_to_string(Relation r) {
  switch (r) {
    case Relation::Eq: return "eq";
    case Relation::Lt: return "lt";
    case Relation::Le: return "le";
    case Relation::Gt: return "gt";
    case Relation::Ge: return "ge";
  }
  return "eq";
}

Relation relation_from_string(const std::string& s) {
  if (s == "eq") return Relation::Eq;
  if (s == "lt") return Relation::Lt;
  if (s == "le") return Relation::Le;
  if (s == "gt") return Relation::Gt;
  if (s == "ge") return Relation::Ge;
  throw ParseError("unknown relation: " + s);
}

bool relation_holds(Relation r, const Rational& value, const Rational& bound) {
  switch (r) {
    case Relation::Eq: return value == bound;
    case Relation::Lt: return value < bound;
    case Relation::Le: return value <= bound;
    case Relation::Gt: return value > bound;
    case Relation::Ge: return value >= bound;
  }
  return false;
}

namespace {

std::string cert_kind_to_string(CertKind k) {
  switch (k) {
    case CertKind::Orthogonality: return "orthogonality";
    case CertKind::StrongOrthogonality: return "strong-orthogonality";
    case CertKind::FMembership: return "f-membership";
    case CertKind::NullUnion: return "null-union";
  }
  return "orthogonality";
}

CertKind cert_kind_from_string(const std::string& s) {
  if (s == "orthogonality") return CertKind::Orthogonality;
  if (s == "strong-orthogonality") return CertKind::StrongOrthogonality;
  if (s == "f-membership") return CertKind::FMembership;
  if (s == "null-union") return CertKind::NullUnion;
  throw ParseError("unknown certificate kind: " + s);
}

// Union of the blocks 0..n-1 (empty for n = 0).
TermPtr blocks_below(std::uint64_t n) {
  std::vector<TermPtr> bs;
  for (std::uint64_t m = 0; m < n; ++m) bs.push_back(block(m));
  return term_union(std::move(bs));
}

}  // namespace

json Certificate::to_json() const {
  json vs = json::array();
  for (const auto& v : values) {
    vs.push_back(json{{"measure_id", v.measure_id},
                      {"measure", v.measure.to_json()},
                      {"term", term_to_json(v.term)},
                      {"value", rational_to_json(v.value)},
                      {"rel", relation_to_string(v.rel)},
                      {"bound", rational_to_json(v.bound)}});
  }
  return json{{"kind", cert_kind_to_string(kind)},
              {"witness", term_to_json(witness)},
              {"schedule", schedule},
              {"values", vs},
              {"delta", rational_to_json(delta)},
              {"truncation", truncation}};
}

Certificate Certificate::from_json(const json& j) {
  Certificate c;
  c.kind = cert_kind_from_string(j.at("kind").get<std::string>());
  c.witness = term_from_json(j.at("witness"));
  c.schedule = j.at("schedule");
  c.delta = rational_from_json(j.at("delta"));
  c.truncation = j.at("truncation").get<std::uint64_t>();
  for (const auto& v : j.at("values")) {
    ValueRecord r;
    r.measure_id = v.at("measure_id").get<std::string>();
    r.measure = measure_from_json(v.at("measure"));
    r.term = term_from_json(v.at("term"));
    r.value = rational_from_json(v.at("value"));
    r.rel = relation_from_string(v.at("rel").get<std::string>());
    r.bound = rational_from_json(v.at("bound"));
    c.values.push_back(std::move(r));
  }
  return c;
}

bool verify(const Certificate& c, std::string* diagnostic) {
  for (const auto& r : c.values) {
    try {
      auto v = r.measure.eval(r.term);
      if (!v) {
        if (diagnostic)
          *diagnostic = r.measure_id + " is unknown on " + term_to_string(r.term);
        return false;
      }
      if (*v != r.value) {
        if (diagnostic)
          *diagnostic = r.measure_id + "(" + term_to_string(r.term) +
                        ") re-evaluates to " + rational_to_string(*v) +
                        ", recorded " + rational_to_string(r.value);
        return false;
      }
      if (!relation_holds(r.rel, r.value, r.bound)) {
        if (diagnostic)
          *diagnostic = r.measure_id + "(" + term_to_string(r.term) + ") = " +
                        rational_to_string(r.value) + " violates " +
                        relation_to_string(r.rel) + " " +
                        rational_to_string(r.bound);
        return false;
      }
    } catch (const Error& e) {
      if (diagnostic) *diagnostic = e.what();
      return false;
    }
  }
  return true;
}

TermPtr point_term(const Integer& x) {
  if (x <= std::numeric_limits<std::int64_t>::max())
    return finite_set({static_cast<std::uint64_t>(x)});
  // Peel one block layer; the index is strictly smaller, so this bottoms
  // out in the plain finite case.
  Integer y = x + 1;
  std::uint64_t n = boost::multiprecision::lsb(y);
  Integer index = y >> (n + 1);
  return lift(n, point_term(index));
}

Certificate separate_finsupp(const Measure& target, const FinSuppMeasure& nu,
                             const Rational& delta) {
  if (delta <= 0) throw InvalidTermError("delta must be positive");
  std::vector<TermPtr> pts;
  for (const Integer& x : nu.support) pts.push_back(point_term(x));
  TermPtr f = complement_of(term_union(std::move(pts)));
  Certificate c;
  c.kind = CertKind::StrongOrthogonality;
  c.witness = f;
  c.delta = delta;
  c.truncation = nu.support.size();
  c.schedule = json::object();
  Rational tv = target.eval_or_throw(f);
  c.values.push_back(
      {"target", target, f, tv, Relation::Eq, Rational(1)});
  c.values.push_back(
      {"nu", nu.as_measure(), f, nu.eval(f), Relation::Eq, Rational(0)});
  if (tv != 1)
    throw CertificateInvalidError("target does not give the complement full mass");
  return c;
}

Certificate claim3_separator(const Measure& target,
                             const std::vector<Claim3Input>& stream,
                             const Rational& delta) {
  if (delta <= 0) throw InvalidTermError("delta must be positive");
  if (!is_level_measure(target) || level_of(target) < 2)
    throw LevelRangeError("claim3 needs a level >= 2 target");

  Certificate c;
  c.kind = CertKind::FMembership;
  c.delta = delta;
  c.truncation = stream.size();

  if (stream.empty()) {
    c.witness = full_term();
    c.schedule = json{{"n", json::array()}};
    return c;
  }

  // Re-check the provided orthogonality evidence.
  for (std::size_t k = 0; k < stream.size(); ++k) {
    const auto& in = stream[k];
    if (!(in.bound > 1 - delta))
      throw CertificateInvalidError("lambda_" + std::to_string(k) +
                                    " bound is not above 1 - delta");
    auto v = in.lambda.eval(in.v);
    if (!v || *v < in.bound)
      throw CertificateInvalidError("lambda_" + std::to_string(k) +
                                    "(V_" + std::to_string(k) +
                                    ") fails its recorded bound");
    c.values.push_back({"lambda_" + std::to_string(k), in.lambda, in.v, *v,
                        Relation::Ge, in.bound});
  }

  // Schedule: n_i past every block where the partial union still carries
  // at least 1/(i+1) of the block measure; the tail value must vanish.
  std::vector<std::uint64_t> schedule;
  std::vector<TermPtr> partial_unions;
  std::vector<TermPtr> vs;
  std::uint64_t prev = 0;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    vs.push_back(stream[i].v);
    TermPtr u = term_union(vs);
    partial_unions.push_back(u);
    BlockProfile prof = block_profile(u);
    std::uint64_t tail_probe =
        prof.exceptional.empty() ? 0 : prof.exceptional.rbegin()->first + 1;
    auto tail_v = block_measure(target, tail_probe).eval(prof.tail);
    if (!tail_v)
      throw DecayUnresolvableError("per-block limit of the partial union " +
                                   std::to_string(i) + " is unknown");
    Rational bound(1, Integer(i) + 1);
    if (*tail_v >= bound)
      throw DecayUnresolvableError(
          "per-block values of partial union " + std::to_string(i) +
          " do not decay below 1/" + std::to_string(i + 1));
    std::uint64_t n_i = i == 0 ? 0 : prev + 1;
    for (const auto& [n, trace] : prof.exceptional) {
      auto v = block_measure(target, n).eval(trace);
      if (!v)
        throw DecayUnresolvableError("block " + std::to_string(n) +
                                     " value of partial union is unknown");
      if (*v >= bound) n_i = std::max(n_i, n + 1);
    }
    prev = std::max(n_i, prev);
    schedule.push_back(prev);
  }

  // F1: between n_i and n_{i+1} keep B_n minus the i-th partial union; from
  // the last checkpoint on, keep everything off the final union.
  std::vector<TermPtr> segments;
  for (std::size_t i = 0; i + 1 < schedule.size(); ++i) {
    std::vector<TermPtr> bs;
    for (std::uint64_t n = schedule[i]; n < schedule[i + 1]; ++n)
      bs.push_back(block(n));
    if (bs.empty()) continue;
    segments.push_back(term_diff(term_union(std::move(bs)), partial_unions[i]));
  }
  segments.push_back(term_diff(complement_of(blocks_below(schedule.back())),
                               partial_unions.back()));
  TermPtr f1 = term_union(std::move(segments));
  c.witness = f1;
  c.schedule = json{{"n", schedule}};

  for (std::size_t i = 0; i < schedule.size(); ++i) {
    std::uint64_t n = schedule[i];
    Measure mu_n = block_push(n, block_measure(target, n));
    auto v = mu_n.eval(term_inter({f1, block(n)}));
    if (!v)
      throw DecayUnresolvableError("block " + std::to_string(n) +
                                   " value of F1 is unknown");
    Rational lower = 1 - Rational(1, Integer(i) + 1);
    if (!(*v > lower))
      throw CertificateInvalidError("F1 misses the block " +
                                    std::to_string(n) + " lower bound");
    c.values.push_back({"mu'_" + std::to_string(n), mu_n,
                        term_inter({f1, block(n)}), *v, Relation::Gt, lower});
  }
  for (std::size_t k = 0; k < stream.size(); ++k) {
    auto v = stream[k].lambda.eval(f1);
    if (!v)
      throw DecayUnresolvableError("lambda_" + std::to_string(k) +
                                   "(F1) is unknown");
    if (!(*v < delta))
      throw CertificateInvalidError("lambda_" + std::to_string(k) +
                                    "(F1) is not below delta");
    c.values.push_back({"lambda_" + std::to_string(k), stream[k].lambda, f1,
                        *v, Relation::Lt, delta});
  }
  return c;
}

Claim4Output claim4_separator(const Measure& target,
                              const std::vector<Measure>& stream,
                              const Claim4Oracle& oracle,
                              const Rational& delta) {
  if (delta <= 0) throw InvalidTermError("delta must be positive");
  if (!is_level_measure(target) || level_of(target) < 2)
    throw LevelRangeError("claim4 needs a level >= 2 target");
  if (stream.empty()) throw ExhaustedStreamError("claim4 needs a nonempty stream");

  Claim4Output out;
  Certificate& c = out.certificate;
  c.kind = CertKind::Orthogonality;
  c.delta = delta;
  c.truncation = stream.size();

  std::vector<TermPtr> as{block(0)};
  std::vector<std::size_t>& ks = out.selected;
  Rational half_delta = delta / 2;

  auto pick_k = [&](const TermPtr& u) {
    std::size_t from = ks.empty() ? 0 : ks.back() + 1;
    for (std::size_t k = from; k < stream.size(); ++k) {
      auto v = stream[k].eval(u);
      if (v && *v < half_delta) return std::optional<std::size_t>(k);
    }
    return std::optional<std::size_t>();
  };

  auto k0 = pick_k(as[0]);
  if (!k0)
    throw ExhaustedStreamError(
        "no stream index gives the first set mass below delta/2");
  ks.push_back(*k0);

  while (ks.back() + 1 < stream.size()) {
    std::uint64_t n = as.size();
    Rational eps(1, (Integer(n) + 1) * Integer(ks.size()));
    Rational eps_prime = delta * pow2_inv(static_cast<unsigned>(
        std::min<std::uint64_t>(n + 2, 1024)));
    std::vector<TermPtr> pieces{block(n)};
    for (std::size_t j = 0; j < ks.size(); ++j) {
      TermPtr a = oracle(n, ks[j], eps, eps_prime);
      if (!a) throw OracleFailureError("oracle returned nothing");
      TermPtr cut = term_inter({a, block(n)});
      Measure mu_n = block_push(n, block_measure(target, n));
      auto mv = mu_n.eval(cut);
      if (!mv || !(*mv > 1 - eps))
        throw OracleFailureError("oracle term for block " + std::to_string(n) +
                                 " misses the block-measure bound");
      auto lv = stream[ks[j]].eval(cut);
      if (!lv || !(*lv < eps_prime))
        throw OracleFailureError("oracle term for block " + std::to_string(n) +
                                 " is not small for lambda_" +
                                 std::to_string(ks[j]));
      c.values.push_back({"lambda_" + std::to_string(ks[j]), stream[ks[j]],
                          cut, *lv, Relation::Lt, eps_prime});
      pieces.push_back(a);
    }
    TermPtr a_n = term_inter(std::move(pieces));
    Measure mu_n = block_push(n, block_measure(target, n));
    auto mv = mu_n.eval(a_n);
    Rational lower = 1 - Rational(1, Integer(n) + 1);
    if (!mv || !(*mv > lower))
      throw OracleFailureError("intersection for block " + std::to_string(n) +
                               " lost too much mass");
    as.push_back(a_n);
    c.values.push_back({"mu'_" + std::to_string(n), mu_n, a_n, *mv,
                        Relation::Gt, lower});
    auto kn = pick_k(term_union(as));
    if (!kn)
      throw ExhaustedStreamError("no unused stream index keeps the union below "
                                 "delta/2 at step " + std::to_string(n));
    ks.push_back(*kn);
  }

  TermPtr f2 = term_union(as);
  c.witness = f2;
  c.schedule = json{{"k", ks}};
  for (std::size_t j = 0; j < ks.size(); ++j) {
    auto v = stream[ks[j]].eval(f2);
    if (!v)
      throw OracleFailureError("lambda_" + std::to_string(ks[j]) +
                               "(F2) is unknown");
    if (!(*v <= delta))
      throw CertificateInvalidError("lambda_" + std::to_string(ks[j]) +
                                    "(F2) exceeds delta");
    c.values.push_back({"lambda_" + std::to_string(ks[j]), stream[ks[j]], f2,
                        *v, Relation::Le, delta});
  }
  return out;
}

Certificate null_union(const std::vector<TermPtr>& null_terms,
                       const Measure& target) {
  if (!is_level_measure(target))
    throw InvalidTermError("null_union needs a level measure target");
  const unsigned level = level_of(target);

  Certificate c;
  c.kind = CertKind::NullUnion;
  c.delta = 0;
  c.truncation = null_terms.size();

  for (std::size_t i = 0; i < null_terms.size(); ++i) {
    auto v = target.eval(null_terms[i]);
    if (!v || *v != 0)
      throw NonNullInputError("input " + std::to_string(i) +
                              " is not null under the target");
    c.values.push_back({"target", target, null_terms[i], Rational(0),
                        Relation::Eq, Rational(0)});
  }

  std::vector<std::uint64_t> schedule;
  std::vector<TermPtr> pieces;
  if (level == 1) {
    // Level-1 blocks are the singletons {n}; a null input must be a plain
    // finite set for the tail-trim to make sense.
    std::uint64_t prev = 0;
    std::uint64_t max_elem = 0;
    for (std::size_t i = 0; i < null_terms.size(); ++i) {
      if (null_terms[i]->kind != TermKind::Finite)
        throw InvalidTermError(
            "level-1 null_union accepts finite terms only");
      for (std::uint64_t e : null_terms[i]->elems)
        max_elem = std::max(max_elem, e + 1);
      std::uint64_t n_i = std::max(i == 0 ? 0 : prev + 1, max_elem);
      prev = n_i;
      schedule.push_back(n_i);
      std::vector<std::uint64_t> below(n_i);
      for (std::uint64_t x = 0; x < n_i; ++x) below[x] = x;
      pieces.push_back(term_diff(null_terms[i], finite_set(below)));
    }
  } else {
    std::uint64_t prev = 0;
    std::vector<std::map<std::uint64_t, Rational>> block_values;
    for (std::size_t i = 0; i < null_terms.size(); ++i) {
      BlockProfile prof = block_profile(null_terms[i]);
      std::uint64_t tail_probe =
          prof.exceptional.empty() ? 0 : prof.exceptional.rbegin()->first + 1;
      auto tail_v = block_measure(target, tail_probe).eval(prof.tail);
      if (!tail_v || *tail_v != 0)
        throw NonNullInputError("input " + std::to_string(i) +
                                " keeps block mass in the tail");
      std::map<std::uint64_t, Rational> vals;
      for (const auto& [n, trace] : prof.exceptional) {
        auto v = block_measure(target, n).eval(trace);
        if (!v)
          throw NonNullInputError("block " + std::to_string(n) +
                                  " value of input " + std::to_string(i) +
                                  " is unknown");
        vals[n] = *v;
      }
      block_values.push_back(std::move(vals));
      Rational bound(1, Integer(i) + 1);
      std::uint64_t n_i = i == 0 ? 0 : prev + 1;
      // Partial sums over m <= i must stay below 1/(i+1) from n_i on.
      std::map<std::uint64_t, Rational> sums;
      for (std::size_t m = 0; m <= i; ++m)
        for (const auto& [n, v] : block_values[m]) sums[n] += v;
      for (const auto& [n, v] : sums)
        if (v >= bound) n_i = std::max(n_i, n + 1);
      prev = std::max(n_i, prev);
      schedule.push_back(prev);
      pieces.push_back(term_diff(null_terms[i], blocks_below(prev)));
    }
  }

  TermPtr a = term_union(pieces);
  c.witness = a;
  c.schedule = json{{"n", schedule}};
  auto total = target.eval(a);
  if (!total || *total != 0)
    throw CertificateInvalidError("trimmed union is not null");
  c.values.push_back({"target", target, a, Rational(0), Relation::Eq,
                      Rational(0)});
  if (level >= 2) {
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      std::uint64_t n = schedule[i];
      Measure mu_n = block_push(n, block_measure(target, n));
      auto v = mu_n.eval(term_inter({a, block(n)}));
      if (!v)
        throw NonNullInputError("block " + std::to_string(n) +
                                " value of the union is unknown");
      Rational bound(1, Integer(i) + 1);
      if (!(*v < bound))
        throw CertificateInvalidError("block " + std::to_string(n) +
                                      " keeps too much of the union");
      c.values.push_back({"mu'_" + std::to_string(n), mu_n,
                          term_inter({a, block(n)}), *v, Relation::Lt, bound});
    }
  } else {
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      std::uint64_t n = schedule[i];
      Measure mu_n = finsupp_measure(FinSuppMeasure::dirac(Integer(n)));
      TermPtr cell = term_inter({a, finite_set({n})});
      Rational v = member(a, n) ? Rational(1) : Rational(0);
      Rational bound(1, Integer(i) + 1);
      if (!(v < bound))
        throw CertificateInvalidError("point " + std::to_string(n) +
                                      " survives the trim");
      c.values.push_back({"mu_" + std::to_string(n), mu_n, cell, v,
                          Relation::Lt, bound});
    }
  }
  return c;
}

}  // namespace seqmeas
