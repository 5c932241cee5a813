#include "seqmeas/measure.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

#include "seqmeas/errors.hpp"

namespace seqmeas {

using nlohmann::json;

std::optional<Rational> Measure::eval(const TermPtr& t) const {
  if (!impl_) throw InvalidTermError("measure is empty");
  return impl_->eval(t);
}

Rational Measure::eval_or_throw(const TermPtr& t) const {
  auto v = eval(t);
  if (!v)
    throw UndefinedValueError("measure value unknown on " + term_to_string(t));
  return *v;
}

json Measure::to_json() const {
  if (!impl_) throw InvalidTermError("measure is empty");
  return impl_->to_json();
}

std::string Measure::describe() const {
  if (!impl_) return "<empty>";
  return impl_->describe();
}

SmallnessInfo Measure::smallness() const {
  if (!impl_) return {};
  return impl_->smallness();
}

// ---------------------------------------------------------------------------
// Finitely supported measures

FinSuppMeasure::FinSuppMeasure(const std::vector<std::uint64_t>& points,
                               std::vector<Rational> ws)
    : FinSuppMeasure(std::vector<Integer>(points.begin(), points.end()),
                     std::move(ws)) {}

FinSuppMeasure::FinSuppMeasure(std::vector<Integer> points,
                               std::vector<Rational> ws) {
  if (points.size() != ws.size() || points.empty())
    throw NormalizationError("finsupp: points/weights mismatch or empty");
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
  Rational total = 0;
  for (std::size_t idx : order) {
    if (ws[idx] <= 0)
      throw NormalizationError("finsupp: weights must be positive");
    if (!support.empty() && support.back() == points[idx])
      throw NormalizationError("finsupp: duplicate support point");
    support.push_back(points[idx]);
    weights.push_back(ws[idx]);
    total += ws[idx];
  }
  if (total != 1)
    throw NormalizationError("finsupp: weights must sum to 1, got " +
                             rational_to_string(total));
}

FinSuppMeasure FinSuppMeasure::dirac(Integer x) {
  return FinSuppMeasure(std::vector<Integer>{std::move(x)},
                        {Rational(1)});
}

FinSuppMeasure FinSuppMeasure::uniform_prefix(std::uint64_t n) {
  std::vector<Integer> pts;
  for (std::uint64_t i = 0; i <= n; ++i) pts.emplace_back(i);
  std::vector<Rational> ws(n + 1, Rational(1, Integer(n) + 1));
  return FinSuppMeasure(std::move(pts), std::move(ws));
}

Rational FinSuppMeasure::eval(const TermPtr& t) const {
  Rational v = 0;
  for (std::size_t i = 0; i < support.size(); ++i)
    if (member(t, support[i])) v += weights[i];
  return v;
}

json FinSuppMeasure::to_json() const {
  json pts = json::array();
  json ws = json::array();
  for (std::size_t i = 0; i < support.size(); ++i) {
    pts.push_back(integer_to_json(support[i]));
    ws.push_back(rational_to_json(weights[i]));
  }
  return json{{"points", pts}, {"weights", ws}};
}

FinSuppMeasure FinSuppMeasure::from_json(const json& j) {
  if (!j.is_object() || !j.contains("points") || !j.contains("weights"))
    throw ParseError("finsupp measure: expected {points, weights}");
  std::vector<Integer> pts;
  std::vector<Rational> ws;
  for (const auto& p : j.at("points")) pts.push_back(integer_from_json(p));
  for (const auto& w : j.at("weights")) ws.push_back(rational_from_json(w));
  return FinSuppMeasure(std::move(pts), std::move(ws));
}

namespace {

class FinSuppImpl final : public MeasureImpl {
 public:
  explicit FinSuppImpl(FinSuppMeasure m) : m_(std::move(m)) {}
  std::optional<Rational> eval(const TermPtr& t) const override {
    return m_.eval(t);
  }
  json to_json() const override {
    json j = m_.to_json();
    j["kind"] = "finsupp";
    return j;
  }
  std::string describe() const override {
    return "finsupp(" + std::to_string(m_.support.size()) + " pts)";
  }
  StructureTag structure_tag() const override { return StructureTag::Atomic; }
  const FinSuppMeasure& data() const { return m_; }

 private:
  FinSuppMeasure m_;
};

class LevelImpl final : public MeasureImpl {
 public:
  LevelImpl(unsigned level, std::vector<Measure> bases, Limits limits)
      : level_(level), bases_(std::move(bases)), limits_(limits) {
    if (level_ < 1) throw LevelRangeError("level must be >= 1");
    if (level_ >= 2 && bases_.empty())
      throw InvalidTermError("level measure above 1 needs a base");
  }

  std::optional<Rational> eval(const TermPtr& t) const override {
    if (level_ == 1) {
      DensityReport r = exact_density(t, limits_);
      if (r.kind != DensityReport::Kind::Exact) return std::nullopt;
      return r.value;
    }
    return bases_.back().eval(tail_trace(t));
  }

  std::optional<Rational> block_val(const TermPtr& t, std::uint64_t n) const {
    if (level_ == 1) return std::nullopt;
    return base_at(n).eval(block_trace(t, n));
  }

  const Measure& base_at(std::uint64_t n) const {
    std::size_t i = std::min<std::uint64_t>(n, bases_.size() - 1);
    return bases_[static_cast<std::size_t>(i)];
  }

  json to_json() const override {
    json j{{"kind", "level"}, {"level", level_}};
    if (level_ >= 2 && !uniform_tower()) {
      json bs = json::array();
      for (const auto& b : bases_) bs.push_back(b.to_json());
      j["bases"] = bs;
    }
    return j;
  }

  std::string describe() const override {
    return "level" + std::to_string(level_);
  }

  SmallnessInfo smallness() const override { return {true, level_, 1}; }
  StructureTag structure_tag() const override {
    return StructureTag::NonAtomic;
  }

  unsigned level() const { return level_; }
  bool uniform_tower() const {
    if (level_ == 1) return true;
    if (bases_.size() != 1) return false;
    auto* b = dynamic_cast<const LevelImpl*>(bases_[0].impl().get());
    return b != nullptr && b->level() == level_ - 1 && b->uniform_tower();
  }

 private:
  unsigned level_;
  std::vector<Measure> bases_;
  Limits limits_;
};

class RestrictImpl final : public MeasureImpl {
 public:
  RestrictImpl(Measure base, TermPtr set, Rational mass)
      : base_(std::move(base)), set_(std::move(set)), mass_(std::move(mass)) {}

  std::optional<Rational> eval(const TermPtr& t) const override {
    auto v = base_.eval(term_inter({t, set_}));
    if (!v) return std::nullopt;
    return *v / mass_;
  }

  json to_json() const override {
    return json{{"kind", "restrict"},
                {"base", base_.to_json()},
                {"set", term_to_json(set_)}};
  }

  std::string describe() const override {
    return "restrict(" + base_.describe() + " | " + term_to_string(set_) + ")";
  }

  SmallnessInfo smallness() const override {
    SmallnessInfo s = base_.smallness();
    s.coeff_bound /= mass_;
    return s;
  }

  StructureTag structure_tag() const override {
    return base_.smallness().non_atomic ? StructureTag::NonAtomic
                                        : StructureTag::Opaque;
  }

 private:
  Measure base_;
  TermPtr set_;
  Rational mass_;
};

class ReweightImpl final : public MeasureImpl {
 public:
  ReweightImpl(Measure base, std::vector<std::pair<TermPtr, Rational>> parts)
      : base_(std::move(base)), parts_(std::move(parts)) {}

  std::optional<Rational> eval(const TermPtr& t) const override {
    Rational v = 0;
    for (const auto& [set, coeff] : parts_) {
      if (coeff == 0) continue;
      auto piece = base_.eval(term_inter({t, set}));
      if (!piece) return std::nullopt;
      v += coeff * *piece;
    }
    return v;
  }

  json to_json() const override {
    json ps = json::array();
    for (const auto& [set, coeff] : parts_)
      ps.push_back(json{{"set", term_to_json(set)},
                        {"coeff", rational_to_json(coeff)}});
    return json{{"kind", "reweight"}, {"base", base_.to_json()},
                {"parts", ps}};
  }

  std::string describe() const override {
    return "reweight(" + base_.describe() + ", " +
           std::to_string(parts_.size()) + " parts)";
  }

  SmallnessInfo smallness() const override {
    SmallnessInfo s = base_.smallness();
    Rational m = 0;
    for (const auto& [set, coeff] : parts_) m = std::max(m, coeff);
    s.coeff_bound *= m;
    return s;
  }

  StructureTag structure_tag() const override {
    return base_.smallness().non_atomic ? StructureTag::NonAtomic
                                        : StructureTag::Opaque;
  }

 private:
  Measure base_;
  std::vector<std::pair<TermPtr, Rational>> parts_;
};

class ComboImpl final : public MeasureImpl {
 public:
  explicit ComboImpl(std::vector<std::pair<Rational, Measure>> parts)
      : parts_(std::move(parts)) {}

  std::optional<Rational> eval(const TermPtr& t) const override {
    Rational v = 0;
    for (const auto& [w, m] : parts_) {
      if (w == 0) continue;
      auto piece = m.eval(t);
      if (!piece) return std::nullopt;
      v += w * *piece;
    }
    return v;
  }

  json to_json() const override {
    json ps = json::array();
    for (const auto& [w, m] : parts_)
      ps.push_back(json{{"weight", rational_to_json(w)},
                        {"measure", m.to_json()}});
    return json{{"kind", "combo"}, {"parts", ps}};
  }

  std::string describe() const override {
    std::ostringstream os;
    os << "combo(";
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      if (i) os << " + ";
      os << rational_to_string(parts_[i].first) << "*"
         << parts_[i].second.describe();
    }
    os << ")";
    return os.str();
  }

  SmallnessInfo smallness() const override {
    SmallnessInfo s{true, 1, 0};
    for (const auto& [w, m] : parts_) {
      if (w == 0) continue;
      SmallnessInfo p = m.smallness();
      s.non_atomic = s.non_atomic && p.non_atomic;
      s.max_level = std::max(s.max_level, p.max_level);
      s.coeff_bound += w * p.coeff_bound;
    }
    return s;
  }

  StructureTag structure_tag() const override {
    return StructureTag::Combination;
  }
  std::vector<std::pair<Rational, Measure>> structure_parts() const override {
    return parts_;
  }

 private:
  std::vector<std::pair<Rational, Measure>> parts_;
};

class BlockPushImpl final : public MeasureImpl {
 public:
  BlockPushImpl(std::uint64_t n, Measure base)
      : block_(n), base_(std::move(base)) {}

  std::optional<Rational> eval(const TermPtr& t) const override {
    return base_.eval(block_trace(t, block_));
  }

  json to_json() const override {
    return json{{"kind", "blockpush"}, {"block", block_},
                {"base", base_.to_json()}};
  }

  std::string describe() const override {
    return "push@B" + std::to_string(block_) + "(" + base_.describe() + ")";
  }

  SmallnessInfo smallness() const override {
    SmallnessInfo s = base_.smallness();
    s.coeff_bound *= pow2(static_cast<unsigned>(block_) + 1);
    return s;
  }

  StructureTag structure_tag() const override {
    return StructureTag::BlockSupported;
  }

 private:
  std::uint64_t block_;
  Measure base_;
};

class ZeroImpl final : public MeasureImpl {
 public:
  std::optional<Rational> eval(const TermPtr&) const override {
    return Rational(0);
  }
  json to_json() const override { return json{{"kind", "zero"}}; }
  std::string describe() const override { return "zero"; }
  SmallnessInfo smallness() const override { return {true, 1, 0}; }
  StructureTag structure_tag() const override { return StructureTag::Zero; }
};

}  // namespace

Measure finsupp_measure(FinSuppMeasure m) {
  return Measure(std::make_shared<FinSuppImpl>(std::move(m)));
}

Measure FinSuppMeasure::as_measure() const { return finsupp_measure(*this); }

Measure level_measure(unsigned level, const Limits& limits) {
  if (level < 1) throw LevelRangeError("level must be >= 1");
  Measure m(std::make_shared<LevelImpl>(1, std::vector<Measure>{}, limits));
  for (unsigned a = 2; a <= level; ++a)
    m = Measure(std::make_shared<LevelImpl>(a, std::vector<Measure>{m},
                                            limits));
  return m;
}

Measure level_measure_over(std::vector<Measure> bases, const Limits& limits) {
  if (bases.empty()) throw InvalidTermError("level measure needs bases");
  unsigned lvl = 0;
  for (const auto& b : bases) {
    if (!is_level_measure(b))
      throw InvalidTermError("tower bases must be level measures");
    lvl = std::max(lvl, level_of(b));
  }
  return Measure(std::make_shared<LevelImpl>(lvl + 1, std::move(bases),
                                             limits));
}

Measure combination(std::vector<std::pair<Rational, Measure>> parts) {
  Rational total = 0;
  for (const auto& [w, m] : parts) {
    if (w < 0) throw NormalizationError("combination weights must be >= 0");
    total += w;
  }
  if (total != 1)
    throw NormalizationError("combination weights must sum to 1, got " +
                             rational_to_string(total));
  return Measure(std::make_shared<ComboImpl>(std::move(parts)));
}

Measure block_push(std::uint64_t n, Measure base) {
  return Measure(std::make_shared<BlockPushImpl>(n, std::move(base)));
}

Measure zero_measure() { return Measure(std::make_shared<ZeroImpl>()); }

Measure restrict_rescale(const Measure& m, const TermPtr& y) {
  auto mass = m.eval(y);
  if (!mass)
    throw UndefinedValueError("restriction set has unknown mass");
  if (*mass == 0) throw ZeroMassError("restriction set has zero mass");
  return Measure(std::make_shared<RestrictImpl>(m, y, *mass));
}

FinSuppMeasure restrict_rescale(const FinSuppMeasure& m, const TermPtr& y) {
  std::vector<Integer> pts;
  std::vector<Rational> ws;
  Rational mass = 0;
  for (std::size_t i = 0; i < m.support.size(); ++i) {
    if (!member(y, m.support[i])) continue;
    pts.push_back(m.support[i]);
    ws.push_back(m.weights[i]);
    mass += m.weights[i];
  }
  if (mass == 0) throw ZeroMassError("restriction set has zero mass");
  for (auto& w : ws) w /= mass;
  return FinSuppMeasure(std::move(pts), std::move(ws));
}

namespace {

// Bounded extensional partition check: every x below the cap must lie in
// exactly one part.
void check_partition_prefix(const std::vector<std::pair<TermPtr, Rational>>& parts,
                            const Limits& limits) {
  for (const auto& [set, coeff] : parts)
    if (coeff < 0) throw NormalizationError("reweight coefficients must be >= 0");
  for (std::uint64_t x = 0; x < limits.partition_check_prefix; ++x) {
    int hits = 0;
    for (const auto& [set, coeff] : parts)
      if (member(set, x)) ++hits;
    if (hits != 1)
      throw PartitionError("parts do not partition the space at point " +
                           std::to_string(x));
  }
}

}  // namespace

Measure reweight(const Measure& m,
                 const std::vector<std::pair<TermPtr, Rational>>& parts,
                 const Limits& limits) {
  check_partition_prefix(parts, limits);
  Rational mass_total = 0;
  Rational integral = 0;
  for (const auto& [set, coeff] : parts) {
    auto v = m.eval(set);
    if (!v) throw UndefinedValueError("reweight part has unknown mass");
    mass_total += *v;
    integral += coeff * *v;
  }
  if (mass_total != 1)
    throw PartitionError("part masses sum to " + rational_to_string(mass_total) +
                         ", expected 1");
  if (integral != 1)
    throw NormalizationError("reweight integral is " +
                             rational_to_string(integral) + ", expected 1");
  return Measure(std::make_shared<ReweightImpl>(m, parts));
}

FinSuppMeasure reweight(const FinSuppMeasure& m,
                        const std::vector<std::pair<TermPtr, Rational>>& parts,
                        const Limits& limits) {
  check_partition_prefix(parts, limits);
  std::vector<Integer> pts;
  std::vector<Rational> ws;
  Rational total = 0;
  for (std::size_t i = 0; i < m.support.size(); ++i) {
    Rational coeff = 0;
    for (const auto& [set, c] : parts)
      if (member(set, m.support[i])) {
        coeff = c;
        break;
      }
    if (coeff == 0) continue;
    pts.push_back(m.support[i]);
    ws.push_back(coeff * m.weights[i]);
    total += ws.back();
  }
  if (total == 0)
    throw NormalizationError("reweighted measure has zero total mass");
  for (auto& w : ws) w /= total;
  return FinSuppMeasure(std::move(pts), std::move(ws));
}

Rational generator_distance(const Measure& m1, const Measure& m2,
                            const std::vector<TermPtr>& generators) {
  Rational d = 0;
  for (const auto& g : generators) {
    Rational diff = m1.eval_or_throw(g) - m2.eval_or_throw(g);
    if (diff < 0) diff = -diff;
    d = std::max(d, diff);
  }
  return d;
}

bool is_level_measure(const Measure& m) {
  return dynamic_cast<const LevelImpl*>(m.impl().get()) != nullptr;
}

unsigned level_of(const Measure& m) {
  auto* li = dynamic_cast<const LevelImpl*>(m.impl().get());
  if (!li) throw InvalidTermError("not a level measure: " + m.describe());
  return li->level();
}

std::optional<Rational> block_value(const Measure& level_m, const TermPtr& t,
                                    std::uint64_t n) {
  auto* li = dynamic_cast<const LevelImpl*>(level_m.impl().get());
  if (!li) throw InvalidTermError("not a level measure: " + level_m.describe());
  if (li->level() == 1)
    throw LevelRangeError("block values require level >= 2");
  return li->block_val(t, n);
}

Measure block_measure(const Measure& level_m, std::uint64_t n) {
  auto* li = dynamic_cast<const LevelImpl*>(level_m.impl().get());
  if (!li) throw InvalidTermError("not a level measure: " + level_m.describe());
  if (li->level() == 1)
    throw LevelRangeError("block measures require level >= 2");
  return li->base_at(n);
}

Measure measure_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw ParseError("measure: expected object with \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "finsupp") return finsupp_measure(FinSuppMeasure::from_json(j));
  if (kind == "zero") return zero_measure();
  if (kind == "level") {
    unsigned lvl = j.at("level").get<unsigned>();
    if (!j.contains("bases")) return level_measure(lvl);
    std::vector<Measure> bases;
    for (const auto& b : j.at("bases")) bases.push_back(measure_from_json(b));
    return level_measure_over(std::move(bases));
  }
  if (kind == "combo") {
    std::vector<std::pair<Rational, Measure>> parts;
    for (const auto& p : j.at("parts"))
      parts.emplace_back(rational_from_json(p.at("weight")),
                         measure_from_json(p.at("measure")));
    return combination(std::move(parts));
  }
  if (kind == "restrict")
    return restrict_rescale(measure_from_json(j.at("base")),
                            term_from_json(j.at("set")));
  if (kind == "reweight") {
    Measure base = measure_from_json(j.at("base"));
    std::vector<std::pair<TermPtr, Rational>> parts;
    for (const auto& p : j.at("parts"))
      parts.emplace_back(term_from_json(p.at("set")),
                         rational_from_json(p.at("coeff")));
    return reweight(base, parts);
  }
  if (kind == "blockpush")
    return block_push(j.at("block").get<std::uint64_t>(),
                      measure_from_json(j.at("base")));
  throw ParseError("measure: unknown kind \"" + kind + "\"");
}

}  // namespace seqmeas
