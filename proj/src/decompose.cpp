#include "seqmeas/decompose.hpp"

#include <algorithm>

#include "seqmeas/errors.hpp"

namespace seqmeas {

using nlohmann::json;

namespace {

void collect(const Measure& m, const Rational& weight,
             std::vector<Component>& out) {
  if (weight == 0) return;
  switch (m.impl()->structure_tag()) {
    case StructureTag::Atomic:
      out.push_back({weight, m, ComponentKind::Atomic});
      return;
    case StructureTag::BlockSupported:
      out.push_back({weight, m, ComponentKind::BlockSupported});
      return;
    case StructureTag::NonAtomic:
      out.push_back({weight, m, ComponentKind::NonAtomic});
      return;
    case StructureTag::Combination:
      for (const auto& [w, sub] : m.impl()->structure_parts())
        collect(sub, weight * w, out);
      return;
    case StructureTag::Zero:
      return;
    case StructureTag::Opaque:
      throw UnstructuredInputError("cannot decompose " + m.describe());
  }
}

}  // namespace

std::vector<Component> structure_of(const Measure& m) {
  std::vector<Component> out;
  collect(m, 1, out);
  return out;
}

std::vector<TermPtr> tower_partition(unsigned depth, unsigned k) {
  if (depth < 1 || k < 1)
    throw InvalidTermError("tower_partition needs depth >= 1, k >= 1");
  const std::uint64_t full_res = (std::uint64_t{1} << k) - 1;
  std::vector<TermPtr> parts;
  if (depth == 1) {
    for (std::uint64_t r = 0; r <= full_res; ++r)
      parts.push_back(dyadic(k, {r}));
    return parts;
  }
  // X_l = intersection over j < l of UL^j(D_{full_res}); the parts
  // X_l /\ UL^l(D_r), r != full_res, together with the final X_depth,
  // partition the space and are small under every tower measure up to
  // the given depth.
  TermPtr hot = dyadic(k, {full_res});
  std::vector<TermPtr> lifted_hot;  // UL^j(hot)
  for (unsigned j = 0; j < depth; ++j) {
    TermPtr cell_base = hot;
    for (unsigned l = 0; l < j; ++l) cell_base = union_lift(cell_base);
    lifted_hot.push_back(cell_base);
  }
  for (unsigned l = 0; l < depth; ++l) {
    std::vector<TermPtr> prefix(lifted_hot.begin(), lifted_hot.begin() + l);
    for (std::uint64_t r = 0; r < full_res; ++r) {
      TermPtr cell = dyadic(k, {r});
      for (unsigned j = 0; j < l; ++j) cell = union_lift(cell);
      std::vector<TermPtr> factors = prefix;
      factors.push_back(cell);
      parts.push_back(factors.size() == 1 ? factors[0]
                                          : term_inter(factors));
    }
  }
  parts.push_back(depth == 1 ? lifted_hot[0] : term_inter(lifted_hot));
  return parts;
}

json SmallPartition::to_json() const {
  json ps = json::array();
  json vs = json::array();
  for (const auto& p : parts) ps.push_back(term_to_json(p));
  for (const auto& v : values) vs.push_back(rational_to_json(v));
  return json{{"epsilon", rational_to_json(epsilon)},
              {"k", k},
              {"depth", depth},
              {"parts", ps},
              {"values", vs}};
}

SmallPartition SmallPartition::from_json(const json& j) {
  SmallPartition sp;
  sp.epsilon = rational_from_json(j.at("epsilon"));
  sp.k = j.at("k").get<unsigned>();
  sp.depth = j.at("depth").get<unsigned>();
  for (const auto& p : j.at("parts")) sp.parts.push_back(term_from_json(p));
  for (const auto& v : j.at("values")) sp.values.push_back(rational_from_json(v));
  return sp;
}

json NonAtomicityCertificate::to_json() const {
  json ps = json::array();
  for (const auto& p : partitions) ps.push_back(p.to_json());
  return json{{"partitions", ps}};
}

NonAtomicityCertificate NonAtomicityCertificate::from_json(const json& j) {
  NonAtomicityCertificate c;
  for (const auto& p : j.at("partitions"))
    c.partitions.push_back(SmallPartition::from_json(p));
  return c;
}

bool NonAtomicityCertificate::verify(const Measure& target,
                                     const Limits& limits) const {
  if (partitions.empty()) return false;
  for (const auto& sp : partitions) {
    if (sp.parts.empty() || sp.parts.size() != sp.values.size()) return false;
    for (std::uint64_t x = 0; x < limits.partition_check_prefix; ++x) {
      int hits = 0;
      for (const auto& p : sp.parts)
        if (member(p, x)) ++hits;
      if (hits != 1) return false;
    }
    Rational total = 0;
    for (std::size_t i = 0; i < sp.parts.size(); ++i) {
      auto v = target.eval(sp.parts[i]);
      if (!v || *v != sp.values[i]) return false;
      if (*v >= sp.epsilon) return false;
      total += *v;
    }
    if (total != 1) return false;
  }
  return true;
}

NonAtomicityCertificate nonatomicity_certificate(const Measure& target,
                                                 const Limits& limits) {
  SmallnessInfo info = target.smallness();
  if (!info.non_atomic)
    throw UnstructuredInputError(
        "no non-atomicity certificate for " + target.describe());
  NonAtomicityCertificate cert;
  for (unsigned j = 1; j <= 10; ++j) {
    Rational eps = pow2_inv(j);
    bool done = false;
    for (unsigned k = j + 1; !done && k + 1 < limits.max_dyadic_level; ++k) {
      // Skip levels that cannot beat epsilon even with exact 2^-k parts.
      if (info.coeff_bound * pow2_inv(k) >= eps) continue;
      SmallPartition sp;
      sp.epsilon = eps;
      sp.k = k;
      sp.depth = std::max(1u, info.max_level);
      sp.parts = tower_partition(sp.depth, k);
      bool ok = true;
      for (const auto& p : sp.parts) {
        auto v = target.eval(p);
        if (!v || *v >= eps) {
          ok = false;
          break;
        }
        sp.values.push_back(*v);
      }
      if (ok) {
        cert.partitions.push_back(std::move(sp));
        done = true;
      }
    }
    if (!done)
      throw ResourceLimitError("small partition for epsilon = " +
                               rational_to_string(eps) + " not found");
  }
  return cert;
}

Decomposition decompose(const Measure& m, const Limits& limits) {
  std::vector<Component> comps = structure_of(m);
  Decomposition d;
  d.mass0 = d.mass1 = d.mass2 = 0;
  d.tail_bound = 0;
  for (const auto& c : comps) {
    switch (c.kind) {
      case ComponentKind::Atomic:
      case ComponentKind::BlockSupported:
        d.mass0 += c.weight;
        break;
      case ComponentKind::NonAtomic:
        d.mass2 += c.weight;
        break;
    }
  }
  auto group = [&](auto pred, const Rational& mass) {
    if (mass == 0) return zero_measure();
    std::vector<Component> sel;
    for (const auto& c : comps)
      if (pred(c.kind)) sel.push_back(c);
    std::vector<std::pair<Rational, Measure>> parts;
    for (const auto& c : sel) parts.emplace_back(c.weight / mass, c.measure);
    if (parts.size() == 1 && parts[0].first == 1) return parts[0].second;
    return combination(std::move(parts));
  };
  d.part0 = group([](ComponentKind k) { return k != ComponentKind::NonAtomic; },
                  d.mass0);
  d.part1 = zero_measure();
  d.part2 = group([](ComponentKind k) { return k == ComponentKind::NonAtomic; },
                  d.mass2);
  if (d.mass2 > 0)
    d.certificate = nonatomicity_certificate(d.part2, limits);
  return d;
}

}  // namespace seqmeas
