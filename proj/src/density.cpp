#include "seqmeas/density.hpp"

#include <bit>

#include "seqmeas/errors.hpp"

namespace seqmeas {

bool PeriodicForm::periodic_bit(std::uint64_t r) const {
  return (bits[r >> 6] >> (r & 63)) & 1;
}

bool PeriodicForm::contains(std::uint64_t x) const {
  auto it = overrides.find(x);
  if (it != overrides.end()) return it->second;
  return periodic_bit(x & ((1ull << k) - 1));
}

std::uint64_t PeriodicForm::popcount() const {
  std::uint64_t c = 0;
  for (auto w : bits) c += std::popcount(w);
  return c;
}

Rational PeriodicForm::density() const {
  return Rational(Integer(popcount()), pow2(k));
}

namespace {

PeriodicForm make_periodic(unsigned k) {
  PeriodicForm f;
  f.k = k;
  f.bits.assign(std::max<std::size_t>(1, (1ull << k) >> 6), 0);
  return f;
}

void set_bit(PeriodicForm& f, std::uint64_t r, bool v) {
  if (v)
    f.bits[r >> 6] |= 1ull << (r & 63);
  else
    f.bits[r >> 6] &= ~(1ull << (r & 63));
}

PeriodicForm to_level(const PeriodicForm& f, unsigned k) {
  if (f.k == k) return f;
  PeriodicForm g = make_periodic(k);
  g.overrides = f.overrides;
  for (std::uint64_t r = 0; r < (1ull << k); ++r)
    set_bit(g, r, f.periodic_bit(r & ((1ull << f.k) - 1)));
  return g;
}

void prune_overrides(PeriodicForm& f) {
  for (auto it = f.overrides.begin(); it != f.overrides.end();) {
    if (it->second == f.periodic_bit(it->first & ((1ull << f.k) - 1)))
      it = f.overrides.erase(it);
    else
      ++it;
  }
}

// Bits at positions >= 2^k in the first word are kept zero so that
// popcount stays exact.
void mask_tail(PeriodicForm& f) {
  if (f.k < 6) f.bits[0] &= (1ull << (1ull << f.k)) - 1;
}

template <typename Op>
PeriodicForm combine(const PeriodicForm& a, const PeriodicForm& b, Op op) {
  unsigned k = std::max(a.k, b.k);
  PeriodicForm fa = to_level(a, k);
  PeriodicForm fb = to_level(b, k);
  PeriodicForm out = make_periodic(k);
  for (std::size_t w = 0; w < out.bits.size(); ++w)
    out.bits[w] = op(fa.bits[w], fb.bits[w]);
  mask_tail(out);
  for (const auto& [x, v] : a.overrides) (void)v, out.overrides[x] = false;
  for (const auto& [x, v] : b.overrides) (void)v, out.overrides[x] = false;
  for (auto& [x, v] : out.overrides) {
    std::uint64_t wa = a.contains(x) ? ~0ull : 0ull;
    std::uint64_t wb = b.contains(x) ? ~0ull : 0ull;
    v = op(wa, wb) & 1;
  }
  prune_overrides(out);
  return out;
}

PeriodicForm complement_form(PeriodicForm f) {
  for (auto& w : f.bits) w = ~w;
  mask_tail(f);
  for (auto& [x, v] : f.overrides) v = !v;
  return f;
}

std::optional<PeriodicForm> periodic_form_impl(const TermPtr& t,
                                               const Limits& limits) {
  switch (t->kind) {
    case TermKind::Finite: {
      PeriodicForm f = make_periodic(0);
      for (auto e : t->elems) f.overrides[e] = true;
      return f;
    }
    case TermKind::Dyadic: {
      if (t->dyadic_level > limits.max_dyadic_level) return std::nullopt;
      PeriodicForm f = make_periodic(t->dyadic_level);
      for (auto r : t->residues) set_bit(f, r, true);
      return f;
    }
    case TermKind::Block:
    case TermKind::Lift:
    case TermKind::UnionLift:
      return std::nullopt;
    case TermKind::Compl: {
      auto f = periodic_form_impl(t->args[0], limits);
      if (!f) return std::nullopt;
      return complement_form(std::move(*f));
    }
    case TermKind::Union:
    case TermKind::Inter: {
      std::optional<PeriodicForm> acc;
      for (const auto& a : t->args) {
        auto f = periodic_form_impl(a, limits);
        if (!f) return std::nullopt;
        if (!acc) {
          acc = std::move(f);
          continue;
        }
        if (std::max(acc->k, f->k) > limits.max_dyadic_level)
          return std::nullopt;
        acc = t->kind == TermKind::Union
                  ? combine(*acc, *f,
                            [](std::uint64_t x, std::uint64_t y) { return x | y; })
                  : combine(*acc, *f, [](std::uint64_t x, std::uint64_t y) {
                      return x & y;
                    });
      }
      return acc;
    }
    case TermKind::Diff: {
      auto fa = periodic_form_impl(t->args[0], limits);
      auto fb = periodic_form_impl(t->args[1], limits);
      if (!fa || !fb) return std::nullopt;
      if (std::max(fa->k, fb->k) > limits.max_dyadic_level) return std::nullopt;
      return combine(*fa, *fb,
                     [](std::uint64_t x, std::uint64_t y) { return x & ~y; });
    }
  }
  return std::nullopt;
}

std::optional<Rational> exact_density_impl(const TermPtr& t,
                                           const Limits& limits,
                                           unsigned depth) {
  if (depth > limits.max_density_depth) return std::nullopt;
  if (!has_block_nodes(*t)) {
    auto f = periodic_form_impl(t, limits);
    if (!f) return std::nullopt;
    return f->density();
  }
  BlockProfile prof;
  try {
    prof = block_profile(t);
  } catch (const Error&) {
    return std::nullopt;
  }
  Rational total = 0;
  Rational covered = 0;
  for (const auto& [n, trace] : prof.exceptional) {
    if (n + 1 > 62) return std::nullopt;
    auto d = exact_density_impl(trace, limits, depth + 1);
    if (!d) return std::nullopt;
    Rational w = pow2_inv(static_cast<unsigned>(n) + 1);
    total += *d * w;
    covered += w;
  }
  auto dt = exact_density_impl(prof.tail, limits, depth + 1);
  if (!dt) return std::nullopt;
  total += *dt * (Rational(1) - covered);
  return total;
}

}  // namespace

std::optional<PeriodicForm> periodic_form(const TermPtr& t,
                                          const Limits& limits) {
  return periodic_form_impl(t, limits);
}

nlohmann::json DensityReport::to_json() const {
  nlohmann::json j;
  j["kind"] = kind == Kind::Exact      ? "exact"
              : kind == Kind::Estimate ? "estimate"
                                       : "unknown";
  if (kind != Kind::Unknown) {
    j["num"] = rational_to_json(value)[0];
    j["den"] = rational_to_json(value)[1];
  }
  if (kind == Kind::Estimate) {
    j["prefix"] = prefix_length;
    if (error_bound) j["errorBound"] = rational_to_json(*error_bound);
  }
  return j;
}

DensityReport exact_density(const TermPtr& t, const Limits& limits) {
  DensityReport r;
  auto d = exact_density_impl(t, limits, 0);
  if (!d) {
    r.kind = DensityReport::Kind::Unknown;
    return r;
  }
  r.kind = DensityReport::Kind::Exact;
  r.value = *d;
  return r;
}

Rational count_error_bound(const TermPtr& t, std::uint64_t m,
                           const Limits& limits) {
  if (m == 0) return 0;
  if (!has_block_nodes(*t)) {
    auto f = periodic_form_impl(t, limits);
    if (!f) return Rational(Integer(m));
    return Rational(pow2(f->k) + Integer(f->overrides.size()));
  }
  Rational s = 2;
  for (std::uint64_t n = 0; (m >> n) != 0; ++n) {
    std::uint64_t mn = ((m >> n) + 1) >> 1;  // |{i : x^n_i < m}|
    if (mn == 0) break;
    s += count_error_bound(block_trace(t, n), mn, limits) + 1;
  }
  return s;
}

DensityReport cesaro_density(const TermPtr& t, std::uint64_t n,
                             const Limits& limits) {
  if (n == 0) throw InvalidTermError("prefix length must be positive");
  std::uint64_t c = prefix_count(t, n, limits);
  DensityReport r;
  r.kind = DensityReport::Kind::Estimate;
  r.value = Rational(Integer(c), Integer(n));
  r.prefix_length = n;
  if (exact_density(t, limits).kind == DensityReport::Kind::Exact) {
    try {
      r.error_bound = count_error_bound(t, n, limits) / Rational(Integer(n));
    } catch (const ResourceLimitError&) {
    }
  }
  return r;
}

}  // namespace seqmeas
