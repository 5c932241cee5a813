#include "seqmeas/hierarchy.hpp"

#include <algorithm>
#include <sstream>

#include "seqmeas/errors.hpp"

namespace seqmeas {

std::uint64_t bit_reverse(std::uint64_t j, unsigned k) {
  std::uint64_t r = 0;
  for (unsigned b = 0; b < k; ++b) {
    r = (r << 1) | (j & 1);
    j >>= 1;
  }
  return r;
}

TermPtr phi_embed(unsigned k, const std::vector<std::uint64_t>& intervals) {
  std::vector<std::uint64_t> residues;
  for (std::uint64_t j : intervals) residues.push_back(bit_reverse(j, k));
  return dyadic(k, std::move(residues));
}

std::vector<NamedTerm> dyadic_generator_family(
    const std::vector<unsigned>& levels) {
  std::vector<NamedTerm> out;
  for (unsigned k : levels) {
    for (std::uint64_t r = 0; r < (std::uint64_t{1} << k); ++r) {
      out.emplace_back("D" + std::to_string(k) + "_" + std::to_string(r),
                       dyadic(k, {r}));
    }
  }
  return out;
}

std::vector<NamedTerm> default_generator_family() {
  return dyadic_generator_family({2, 4});
}

LevelBuildPtr build_level1(const Limits& limits) {
  auto b = std::make_shared<LevelBuild>();
  b->level = 1;
  b->generators = default_generator_family();
  b->measure = level_measure(1, limits);
  return b;
}

namespace {

LevelBuildPtr lift_build(std::vector<LevelBuildPtr> bases) {
  if (bases.empty())
    throw InvalidTermError("canonical_pair needs at least one base");
  for (const auto& b : bases)
    if (!b || !b->measure) throw InvalidTermError("canonical_pair: empty base");
  std::vector<Measure> base_measures;
  for (const auto& b : bases) base_measures.push_back(b->measure);
  auto out = std::make_shared<LevelBuild>();
  out->level = 0;
  for (const auto& b : bases) out->level = std::max(out->level, b->level);
  ++out->level;
  out->base = bases.front();
  out->measure = level_measure_over(std::move(base_measures));
  for (const auto& [name, g] : bases.front()->generators) {
    // Exactness of the base on its family is a build invariant.
    for (const auto& b : bases) {
      if (!b->measure.eval(g))
        throw InexactBaseError("base value unknown on generator " + name);
    }
    TermPtr lifted = union_lift(g);
    auto v = out->measure.eval(lifted);
    if (!v) throw InexactBaseError("lifted generator " + name + " is unknown");
    // Metric isomorphism on uniform towers: the lifted copy keeps the value.
    if (bases.size() == 1 && *v != *bases.front()->measure.eval(g))
      throw InexactBaseError("lifted generator " + name +
                             " breaks the embedding identity");
    out->generators.emplace_back("UL_" + name, lifted);
  }
  return out;
}

}  // namespace

LevelBuildPtr canonical_pair(const LevelBuildPtr& base) {
  return lift_build({base});
}

LevelBuildPtr canonical_pair(const std::vector<LevelBuildPtr>& bases) {
  return lift_build(bases);
}

LevelBuildPtr build_tower(unsigned level, const Limits& limits) {
  if (level < 1) throw LevelRangeError("tower level must be >= 1");
  LevelBuildPtr b = build_level1(limits);
  for (unsigned a = 2; a <= level; ++a) b = canonical_pair(b);
  return b;
}

FinSuppMeasure witness_level1(std::uint64_t n) {
  return FinSuppMeasure::uniform_prefix(n);
}

namespace {

FinSuppMeasure diagonal_stage(const LevelBuild& build, std::uint64_t s) {
  if (build.level == 1) return witness_level1(s);
  return witness_next(build, s, s);
}

}  // namespace

FinSuppMeasure witness_next(const LevelBuild& build, std::uint64_t m,
                            std::uint64_t inner_depth) {
  if (build.level < 2 || !build.base)
    throw LevelRangeError("witness_next requires a lifted build");
  FinSuppMeasure inner = diagonal_stage(*build.base, inner_depth);
  std::vector<Integer> pts;
  pts.reserve(inner.support.size());
  for (const Integer& i : inner.support) pts.push_back(block_point_big(m, i));
  return FinSuppMeasure(std::move(pts), inner.weights);
}

WitnessStream diagonal_stream(LevelBuildPtr build) {
  if (!build) throw InvalidTermError("diagonal_stream: empty build");
  auto kind = build->level == 1 ? WitnessStream::Kind::UniformPrefix
                                : WitnessStream::Kind::Generic;
  unsigned level = build->level;
  return WitnessStream(
      level, "diagonal(level " + std::to_string(level) + ")",
      [build](std::uint64_t s) { return diagonal_stage(*build, s); }, kind);
}

WitnessStream constant_stream(FinSuppMeasure m) {
  return WitnessStream(1, "constant",
                       [m](std::uint64_t) { return m; });
}

std::string ConvergenceReport::to_csv() const {
  std::ostringstream os;
  os << "stage,generator_id,witness_num,witness_den,target_num,target_den,"
        "dist_num,dist_den\n";
  for (const auto& r : rows) {
    os << r.stage << ',' << generator_names[r.generator] << ','
       << numerator(r.witness) << ',' << denominator(r.witness) << ','
       << numerator(r.target) << ',' << denominator(r.target) << ','
       << numerator(r.dist) << ',' << denominator(r.dist) << '\n';
  }
  return os.str();
}

ConvergenceReport converge_check(const WitnessStream& stream,
                                 const Measure& target,
                                 const std::vector<NamedTerm>& generators,
                                 const Rational& tol, std::uint64_t horizon,
                                 bool record_rows) {
  if (horizon == 0) throw InvalidTermError("horizon must be positive");
  ConvergenceReport rep;
  rep.tol = tol;
  rep.horizon = horizon;
  for (const auto& [name, g] : generators) rep.generator_names.push_back(name);

  std::vector<Rational> targets;
  for (const auto& [name, g] : generators)
    targets.push_back(target.eval_or_throw(g));

  rep.stage_dist.reserve(horizon);
  if (stream.kind() == WitnessStream::Kind::UniformPrefix) {
    // Uniform prefix averages admit cumulative membership counters.
    std::vector<std::uint64_t> counts(generators.size(), 0);
    for (std::uint64_t s = 0; s < horizon; ++s) {
      Rational worst = 0;
      for (std::size_t i = 0; i < generators.size(); ++i) {
        if (member(generators[i].second, s)) ++counts[i];
        Rational w(Integer(counts[i]), Integer(s) + 1);
        Rational d = w - targets[i];
        if (d < 0) d = -d;
        worst = std::max(worst, d);
        if (record_rows)
          rep.rows.push_back({s, i, std::move(w), targets[i], std::move(d)});
      }
      rep.stage_dist.push_back(std::move(worst));
    }
  } else {
    for (std::uint64_t s = 0; s < horizon; ++s) {
      FinSuppMeasure stage = stream.at(s);
      Rational worst = 0;
      for (std::size_t i = 0; i < generators.size(); ++i) {
        Rational w = stage.eval(generators[i].second);
        Rational d = w - targets[i];
        if (d < 0) d = -d;
        worst = std::max(worst, d);
        if (record_rows)
          rep.rows.push_back({s, i, std::move(w), targets[i], std::move(d)});
      }
      rep.stage_dist.push_back(std::move(worst));
    }
  }

  // Verdict: the maximal suffix staying within tol must be nonempty.
  std::optional<std::uint64_t> settle;
  for (std::uint64_t s = horizon; s-- > 0;) {
    if (rep.stage_dist[s] > tol) break;
    settle = s;
  }
  rep.settle_stage = settle;
  rep.pass = settle.has_value();
  return rep;
}

WitnessStream nonatomic_witness_extract(const WitnessStream& stream,
                                        const std::vector<TermPtr>& schedule,
                                        const Measure& target,
                                        const Limits& limits) {
  if (schedule.empty()) return stream;
  Decomposition d = decompose(target, limits);
  for (std::size_t n = 1; n <= schedule.size(); ++n) {
    const TermPtr& a = schedule[n - 1];
    Rational bound(1, Integer(n));
    Rational atom_out = d.mass0 == 0
                            ? Rational(0)
                            : d.mass0 * d.part0.eval_or_throw(complement_of(a));
    Rational nonatomic_in =
        d.mass2 == 0 ? Rational(0) : d.mass2 * d.part2.eval_or_throw(a);
    if (nonatomic_in >= bound)
      throw ScheduleViolationError("nu''(A_" + std::to_string(n) +
                                   ") is not below 1/" + std::to_string(n));
    if (atom_out >= bound)
      throw ScheduleViolationError("nu'(complement of A_" + std::to_string(n) +
                                   ") is not below 1/" + std::to_string(n));
  }
  auto base_fn = stream;
  return WitnessStream(
      stream.target_level(), stream.provenance() + " | extracted",
      [base_fn, schedule](std::uint64_t s) {
        std::size_t idx = std::min<std::uint64_t>(s, schedule.size() - 1);
        TermPtr keep = complement_of(schedule[idx]);
        // Early stages may put all their mass in the dropped set; advance
        // to the first stage where something survives.
        for (std::uint64_t t = s;; ++t) {
          FinSuppMeasure stage = base_fn.at(t);
          bool alive = false;
          for (const Integer& x : stage.support)
            if (member(keep, x)) {
              alive = true;
              break;
            }
          if (alive) return restrict_rescale(stage, keep);
          if (t > s + 4096)
            throw ZeroMassError("extracted stream never leaves the schedule set");
        }
      });
}

}  // namespace seqmeas
