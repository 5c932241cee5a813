#include "seqmeas/term.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <sstream>

#include "seqmeas/errors.hpp"

namespace seqmeas {

namespace {

// 64-bit block points x^n_i only exist below this; terms themselves may
// reference far deeper blocks (membership then needs the Integer overload).
constexpr unsigned kMaxSmallBlockIndex = 62;
constexpr std::uint64_t kMaxBlockIndex = 1u << 20;
constexpr unsigned kMaxDyadicK = 62;
// Dyadic pairs up to this level are folded eagerly by the constructors.
constexpr unsigned kFoldDyadicK = 12;

TermPtr make(Term t) { return std::make_shared<const Term>(std::move(t)); }

std::vector<std::uint64_t> sorted_unique(std::vector<std::uint64_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

unsigned block_of(std::uint64_t x) {
  return static_cast<unsigned>(std::countr_zero(x + 1));
}

std::uint64_t index_in_block(std::uint64_t x) {
  return (x + 1) >> (block_of(x) + 1);
}

std::uint64_t block_point(std::uint64_t n, std::uint64_t i) {
  if (n > kMaxSmallBlockIndex || (i >> (kMaxSmallBlockIndex - n)) != 0)
    throw ResourceLimitError("block point 2^n(2i+1)-1 exceeds 64-bit range");
  return ((2 * i + 1) << n) - 1;
}

TermPtr finite_set(std::vector<std::uint64_t> elems) {
  Term t;
  t.kind = TermKind::Finite;
  t.elems = sorted_unique(std::move(elems));
  return make(std::move(t));
}

TermPtr empty_term() {
  static const TermPtr e = finite_set({});
  return e;
}

TermPtr full_term() {
  static const TermPtr f = [] {
    Term t;
    t.kind = TermKind::Compl;
    t.args = {empty_term()};
    return make(std::move(t));
  }();
  return f;
}

bool is_empty_term(const TermPtr& t) {
  return t->kind == TermKind::Finite && t->elems.empty();
}

bool is_full_term(const TermPtr& t) {
  return t->kind == TermKind::Compl && is_empty_term(t->args[0]);
}

TermPtr dyadic(unsigned k, std::vector<std::uint64_t> residues) {
  if (k > kMaxDyadicK) throw InvalidTermError("dyadic level too large");
  auto rs = sorted_unique(std::move(residues));
  for (auto r : rs)
    if (k < 64 && (r >> k) != 0)
      throw InvalidTermError("dyadic residue out of range");
  if (rs.empty()) return empty_term();
  if (k < 63 && rs.size() == (1ull << k)) return full_term();
  Term t;
  t.kind = TermKind::Dyadic;
  t.dyadic_level = k;
  t.residues = std::move(rs);
  return make(std::move(t));
}

TermPtr block(std::uint64_t n) {
  if (n > kMaxBlockIndex) throw InvalidTermError("block index too large");
  Term t;
  t.kind = TermKind::Block;
  t.block_index = n;
  return make(std::move(t));
}

TermPtr lift(std::uint64_t n, TermPtr inner) {
  if (n > kMaxBlockIndex) throw InvalidTermError("block index too large");
  if (is_empty_term(inner)) return empty_term();
  if (is_full_term(inner)) return block(n);
  Term t;
  t.kind = TermKind::Lift;
  t.block_index = n;
  t.args = {std::move(inner)};
  return make(std::move(t));
}

TermPtr union_lift(TermPtr inner) {
  if (is_empty_term(inner)) return empty_term();
  if (is_full_term(inner)) return full_term();
  Term t;
  t.kind = TermKind::UnionLift;
  t.args = {std::move(inner)};
  return make(std::move(t));
}

TermPtr complement_of(TermPtr t) {
  if (t->kind == TermKind::Compl) return t->args[0];
  Term c;
  c.kind = TermKind::Compl;
  c.args = {std::move(t)};
  return make(std::move(c));
}

namespace {

bool both_small_dyadic(const TermPtr& a, const TermPtr& b) {
  return a->kind == TermKind::Dyadic && b->kind == TermKind::Dyadic &&
         a->dyadic_level <= kFoldDyadicK && b->dyadic_level <= kFoldDyadicK;
}

template <typename Op>
TermPtr fold_dyadic(const TermPtr& a, const TermPtr& b, Op op) {
  unsigned k = std::max(a->dyadic_level, b->dyadic_level);
  std::vector<std::uint64_t> rs;
  for (std::uint64_t r = 0; r < (1ull << k); ++r) {
    bool in_a = std::binary_search(a->residues.begin(), a->residues.end(),
                                   r & ((1ull << a->dyadic_level) - 1));
    bool in_b = std::binary_search(b->residues.begin(), b->residues.end(),
                                   r & ((1ull << b->dyadic_level) - 1));
    if (op(in_a, in_b)) rs.push_back(r);
  }
  return dyadic(k, std::move(rs));
}

enum class FiniteFilter { KeepIfInAll, KeepIfInNone };

TermPtr filter_finite(const TermPtr& fin, const std::vector<TermPtr>& others,
                      FiniteFilter mode) {
  std::vector<std::uint64_t> out;
  for (auto e : fin->elems) {
    bool in_any = false;
    bool in_all = true;
    for (const auto& o : others) {
      if (member(*o, e)) {
        in_any = true;
      } else {
        in_all = false;
      }
    }
    if (mode == FiniteFilter::KeepIfInAll ? in_all : !in_any) out.push_back(e);
  }
  return finite_set(std::move(out));
}

}  // namespace

TermPtr term_union(std::vector<TermPtr> args) {
  std::vector<TermPtr> flat;
  for (auto& a : args) {
    if (is_empty_term(a)) continue;
    if (is_full_term(a)) return full_term();
    if (a->kind == TermKind::Union) {
      for (const auto& sub : a->args) flat.push_back(sub);
    } else {
      flat.push_back(std::move(a));
    }
  }
  // Merge finite leaves and fold small dyadic pairs.
  std::vector<TermPtr> out;
  TermPtr fin;
  for (auto& a : flat) {
    if (a->kind == TermKind::Finite) {
      fin = fin ? finite_set([&] {
        auto v = fin->elems;
        v.insert(v.end(), a->elems.begin(), a->elems.end());
        return v;
      }()) : a;
      continue;
    }
    bool folded = false;
    for (auto& o : out) {
      if (both_small_dyadic(o, a)) {
        o = fold_dyadic(o, a, [](bool x, bool y) { return x || y; });
        folded = true;
        break;
      }
      if (term_equal(o, a)) {
        folded = true;
        break;
      }
    }
    if (!folded) out.push_back(std::move(a));
  }
  if (fin && !fin->elems.empty()) {
    // Drop finite points already covered by another argument.
    fin = filter_finite(fin, out, FiniteFilter::KeepIfInNone);
    if (!fin->elems.empty()) out.push_back(fin);
  }
  if (out.empty()) return empty_term();
  if (out.size() == 1) return out[0];
  Term t;
  t.kind = TermKind::Union;
  t.args = std::move(out);
  return make(std::move(t));
}

TermPtr term_union(TermPtr a, TermPtr b) {
  return term_union(std::vector<TermPtr>{std::move(a), std::move(b)});
}

TermPtr term_inter(std::vector<TermPtr> args) {
  std::vector<TermPtr> flat;
  for (auto& a : args) {
    if (is_empty_term(a)) return empty_term();
    if (is_full_term(a)) continue;
    if (a->kind == TermKind::Inter) {
      for (const auto& sub : a->args) flat.push_back(sub);
    } else {
      flat.push_back(std::move(a));
    }
  }
  // A finite argument decides everything by direct membership.
  for (std::size_t i = 0; i < flat.size(); ++i) {
    if (flat[i]->kind == TermKind::Finite) {
      std::vector<TermPtr> others;
      for (std::size_t j = 0; j < flat.size(); ++j)
        if (j != i) others.push_back(flat[j]);
      return filter_finite(flat[i], others, FiniteFilter::KeepIfInAll);
    }
  }
  std::vector<TermPtr> out;
  for (auto& a : flat) {
    bool folded = false;
    for (auto& o : out) {
      if (both_small_dyadic(o, a)) {
        o = fold_dyadic(o, a, [](bool x, bool y) { return x && y; });
        folded = true;
        break;
      }
      if (term_equal(o, a)) {
        folded = true;
        break;
      }
    }
    if (!folded) out.push_back(std::move(a));
  }
  if (out.empty()) return full_term();
  if (out.size() == 1) return out[0];
  Term t;
  t.kind = TermKind::Inter;
  t.args = std::move(out);
  return make(std::move(t));
}

TermPtr term_inter(TermPtr a, TermPtr b) {
  return term_inter(std::vector<TermPtr>{std::move(a), std::move(b)});
}

TermPtr term_diff(TermPtr a, TermPtr b) {
  if (is_empty_term(a) || is_full_term(b)) return empty_term();
  if (is_empty_term(b)) return a;
  if (is_full_term(a)) return complement_of(std::move(b));
  if (term_equal(a, b)) return empty_term();
  if (a->kind == TermKind::Finite) return filter_finite(a, {complement_of(b)}, FiniteFilter::KeepIfInAll);
  if (both_small_dyadic(a, b))
    return fold_dyadic(a, b, [](bool x, bool y) { return x && !y; });
  Term t;
  t.kind = TermKind::Diff;
  t.args = {std::move(a), std::move(b)};
  return make(std::move(t));
}

bool member(const Term& t, std::uint64_t x) {
  switch (t.kind) {
    case TermKind::Finite:
      return std::binary_search(t.elems.begin(), t.elems.end(), x);
    case TermKind::Dyadic: {
      std::uint64_t r =
          t.dyadic_level >= 64 ? x : (x & ((1ull << t.dyadic_level) - 1));
      return std::binary_search(t.residues.begin(), t.residues.end(), r);
    }
    case TermKind::Block:
      return block_of(x) == t.block_index;
    case TermKind::Lift:
      return block_of(x) == t.block_index &&
             member(*t.args[0], index_in_block(x));
    case TermKind::UnionLift:
      return member(*t.args[0], index_in_block(x));
    case TermKind::Compl:
      return !member(*t.args[0], x);
    case TermKind::Union:
      for (const auto& a : t.args)
        if (member(*a, x)) return true;
      return false;
    case TermKind::Inter:
      for (const auto& a : t.args)
        if (!member(*a, x)) return false;
      return true;
    case TermKind::Diff:
      return member(*t.args[0], x) && !member(*t.args[1], x);
  }
  return false;
}

Integer block_point_big(std::uint64_t n, const Integer& i) {
  return ((2 * i + 1) << n) - 1;
}

namespace {

std::uint64_t block_of_big(const Integer& x) {
  return boost::multiprecision::lsb(Integer(x + 1));
}

Integer index_in_block_big(const Integer& x) {
  return (x + 1) >> (block_of_big(x) + 1);
}

}  // namespace

bool member(const Term& t, const Integer& x) {
  if (x <= std::numeric_limits<std::int64_t>::max())
    return member(t, static_cast<std::uint64_t>(x));
  switch (t.kind) {
    case TermKind::Finite:
      return false;
    case TermKind::Dyadic: {
      std::uint64_t r = static_cast<std::uint64_t>(
          x % (Integer(1) << t.dyadic_level));
      return std::binary_search(t.residues.begin(), t.residues.end(), r);
    }
    case TermKind::Block:
      return block_of_big(x) == t.block_index;
    case TermKind::Lift:
      return block_of_big(x) == t.block_index &&
             member(*t.args[0], index_in_block_big(x));
    case TermKind::UnionLift:
      return member(*t.args[0], index_in_block_big(x));
    case TermKind::Compl:
      return !member(*t.args[0], x);
    case TermKind::Union:
      for (const auto& a : t.args)
        if (member(*a, x)) return true;
      return false;
    case TermKind::Inter:
      for (const auto& a : t.args)
        if (!member(*a, x)) return false;
      return true;
    case TermKind::Diff:
      return member(*t.args[0], x) && !member(*t.args[1], x);
  }
  return false;
}

bool term_equal(const TermPtr& a, const TermPtr& b) {
  if (a == b) return true;
  if (a->kind != b->kind) return false;
  if (a->elems != b->elems || a->dyadic_level != b->dyadic_level ||
      a->residues != b->residues || a->block_index != b->block_index)
    return false;
  if (a->args.size() != b->args.size()) return false;
  for (std::size_t i = 0; i < a->args.size(); ++i)
    if (!term_equal(a->args[i], b->args[i])) return false;
  return true;
}

bool has_block_nodes(const Term& t) {
  switch (t.kind) {
    case TermKind::Block:
    case TermKind::Lift:
    case TermKind::UnionLift:
      return true;
    case TermKind::Finite:
    case TermKind::Dyadic:
      return false;
    default:
      for (const auto& a : t.args)
        if (has_block_nodes(*a)) return true;
      return false;
  }
}

TermPtr block_trace(const TermPtr& t, std::uint64_t n) {
  switch (t->kind) {
    case TermKind::Finite: {
      std::vector<std::uint64_t> idx;
      for (auto e : t->elems)
        if (block_of(e) == n) idx.push_back(index_in_block(e));
      return finite_set(std::move(idx));
    }
    case TermKind::Dyadic: {
      unsigned k = t->dyadic_level;
      if (k == 0) return t->residues.empty() ? empty_term() : full_term();
      if (n >= k) {
        bool in = std::binary_search(t->residues.begin(), t->residues.end(),
                                     (1ull << k) - 1);
        return in ? full_term() : empty_term();
      }
      unsigned r = k - static_cast<unsigned>(n) - 1;
      if (r > 26)
        throw ResourceLimitError("dyadic trace enumeration too large");
      std::vector<std::uint64_t> rs;
      for (std::uint64_t j = 0; j < (1ull << r); ++j) {
        std::uint64_t x = (((2 * j + 1) << n) - 1) & ((1ull << k) - 1);
        if (std::binary_search(t->residues.begin(), t->residues.end(), x))
          rs.push_back(j);
      }
      return dyadic(r, std::move(rs));
    }
    case TermKind::Block:
      return t->block_index == n ? full_term() : empty_term();
    case TermKind::Lift:
      return t->block_index == n ? t->args[0] : empty_term();
    case TermKind::UnionLift:
      return t->args[0];
    case TermKind::Compl:
      return complement_of(block_trace(t->args[0], n));
    case TermKind::Union: {
      std::vector<TermPtr> traces;
      for (const auto& a : t->args) traces.push_back(block_trace(a, n));
      return term_union(std::move(traces));
    }
    case TermKind::Inter: {
      std::vector<TermPtr> traces;
      for (const auto& a : t->args) traces.push_back(block_trace(a, n));
      return term_inter(std::move(traces));
    }
    case TermKind::Diff:
      return term_diff(block_trace(t->args[0], n), block_trace(t->args[1], n));
  }
  return empty_term();
}

TermPtr tail_trace(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Finite:
    case TermKind::Block:
    case TermKind::Lift:
      return empty_term();
    case TermKind::Dyadic: {
      unsigned k = t->dyadic_level;
      bool in = std::binary_search(t->residues.begin(), t->residues.end(),
                                   k >= 64 ? ~0ull : (1ull << k) - 1);
      return in ? full_term() : empty_term();
    }
    case TermKind::UnionLift:
      return t->args[0];
    case TermKind::Compl:
      return complement_of(tail_trace(t->args[0]));
    case TermKind::Union: {
      std::vector<TermPtr> traces;
      for (const auto& a : t->args) traces.push_back(tail_trace(a));
      return term_union(std::move(traces));
    }
    case TermKind::Inter: {
      std::vector<TermPtr> traces;
      for (const auto& a : t->args) traces.push_back(tail_trace(a));
      return term_inter(std::move(traces));
    }
    case TermKind::Diff:
      return term_diff(tail_trace(t->args[0]), tail_trace(t->args[1]));
  }
  return empty_term();
}

namespace {

void exceptional_candidates(const Term& t, std::set<std::uint64_t>& out) {
  switch (t.kind) {
    case TermKind::Finite:
      for (auto e : t.elems) out.insert(block_of(e));
      break;
    case TermKind::Dyadic:
      for (unsigned n = 0; n < t.dyadic_level; ++n) out.insert(n);
      break;
    case TermKind::Block:
    case TermKind::Lift:
      out.insert(t.block_index);
      break;
    case TermKind::UnionLift:
      break;
    default:
      for (const auto& a : t.args) exceptional_candidates(*a, out);
      break;
  }
}

}  // namespace

BlockProfile block_profile(const TermPtr& t) {
  BlockProfile p;
  p.tail = tail_trace(t);
  std::set<std::uint64_t> candidates;
  exceptional_candidates(*t, candidates);
  for (auto n : candidates) {
    TermPtr tr = block_trace(t, n);
    if (!term_equal(tr, p.tail)) p.exceptional[n] = tr;
  }
  return p;
}

std::vector<bool> prefix_bits(const TermPtr& t, std::uint64_t n,
                              const Limits& limits) {
  if (n > limits.max_prefix)
    throw ResourceLimitError("prefix length exceeds configured maximum");
  std::vector<bool> bits(n);
  for (std::uint64_t i = 0; i < n; ++i) bits[i] = member(*t, i);
  return bits;
}

std::uint64_t prefix_count(const TermPtr& t, std::uint64_t n,
                           const Limits& limits) {
  if (n > limits.max_prefix)
    throw ResourceLimitError("prefix length exceeds configured maximum");
  std::uint64_t c = 0;
  for (std::uint64_t i = 0; i < n; ++i) c += member(*t, i) ? 1 : 0;
  return c;
}

nlohmann::json term_to_json(const TermPtr& t) {
  using nlohmann::json;
  switch (t->kind) {
    case TermKind::Finite:
      return json{{"gen", "finite"}, {"elems", t->elems}};
    case TermKind::Dyadic:
      return json{{"gen", "dyadic"},
                  {"k", t->dyadic_level},
                  {"residues", t->residues}};
    case TermKind::Block:
      return json{{"gen", "block"}, {"n", t->block_index}};
    case TermKind::Lift:
      return json{{"gen", "lift"},
                  {"n", t->block_index},
                  {"inner", term_to_json(t->args[0])}};
    case TermKind::UnionLift:
      return json{{"gen", "unionlift"}, {"inner", term_to_json(t->args[0])}};
    case TermKind::Compl:
      return json{{"op", "compl"}, {"arg", term_to_json(t->args[0])}};
    case TermKind::Union:
    case TermKind::Inter:
    case TermKind::Diff: {
      const char* op = t->kind == TermKind::Union   ? "union"
                       : t->kind == TermKind::Inter ? "inter"
                                                    : "diff";
      json args = json::array();
      for (const auto& a : t->args) args.push_back(term_to_json(a));
      return json{{"op", op}, {"args", args}};
    }
  }
  return {};
}

namespace {

std::vector<std::uint64_t> u64_list(const nlohmann::json& j,
                                    const char* what) {
  if (!j.is_array()) throw ParseError(std::string("expected array for ") + what);
  std::vector<std::uint64_t> out;
  for (const auto& v : j) {
    if (!v.is_number_unsigned() && !v.is_number_integer())
      throw ParseError(std::string("expected naturals in ") + what);
    auto x = v.get<std::int64_t>();
    if (x < 0) throw ParseError(std::string("negative value in ") + what);
    out.push_back(static_cast<std::uint64_t>(x));
  }
  return out;
}

}  // namespace

TermPtr term_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("term must be a JSON object");
  try {
    if (j.contains("gen")) {
      const std::string gen = j.at("gen").get<std::string>();
      if (gen == "finite") return finite_set(u64_list(j.at("elems"), "elems"));
      if (gen == "dyadic")
        return dyadic(j.at("k").get<unsigned>(),
                      u64_list(j.at("residues"), "residues"));
      if (gen == "block") return block(j.at("n").get<std::uint64_t>());
      if (gen == "lift")
        return lift(j.at("n").get<std::uint64_t>(),
                    term_from_json(j.at("inner")));
      if (gen == "unionlift") return union_lift(term_from_json(j.at("inner")));
      throw ParseError("unknown generator: " + gen);
    }
    if (j.contains("op")) {
      const std::string op = j.at("op").get<std::string>();
      if (op == "compl") return complement_of(term_from_json(j.at("arg")));
      const auto& args = j.at("args");
      if (!args.is_array() || args.empty())
        throw ParseError("op needs a non-empty args array");
      std::vector<TermPtr> parsed;
      for (const auto& a : args) parsed.push_back(term_from_json(a));
      if (op == "union") return term_union(std::move(parsed));
      if (op == "inter") return term_inter(std::move(parsed));
      if (op == "diff") {
        TermPtr acc = parsed[0];
        for (std::size_t i = 1; i < parsed.size(); ++i)
          acc = term_diff(acc, parsed[i]);
        return acc;
      }
      throw ParseError("unknown op: " + op);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad term JSON: ") + e.what());
  } catch (const InvalidTermError& e) {
    throw ParseError(std::string("bad term: ") + e.what());
  }
  throw ParseError("term object needs 'gen' or 'op'");
}

std::string term_to_string(const TermPtr& t) {
  std::ostringstream os;
  switch (t->kind) {
    case TermKind::Finite: {
      os << "F{";
      for (std::size_t i = 0; i < t->elems.size(); ++i)
        os << (i ? "," : "") << t->elems[i];
      os << "}";
      break;
    }
    case TermKind::Dyadic: {
      os << "D(" << t->dyadic_level << ";";
      for (std::size_t i = 0; i < t->residues.size(); ++i)
        os << (i ? "," : "") << t->residues[i];
      os << ")";
      break;
    }
    case TermKind::Block:
      os << "B" << t->block_index;
      break;
    case TermKind::Lift:
      os << "L" << t->block_index << "(" << term_to_string(t->args[0]) << ")";
      break;
    case TermKind::UnionLift:
      os << "UL(" << term_to_string(t->args[0]) << ")";
      break;
    case TermKind::Compl:
      if (is_full_term(t)) {
        os << "N";
      } else {
        os << "~" << term_to_string(t->args[0]);
      }
      break;
    case TermKind::Union:
    case TermKind::Inter:
    case TermKind::Diff: {
      const char* sep = t->kind == TermKind::Union   ? "|"
                        : t->kind == TermKind::Inter ? "&"
                                                     : "\\";
      os << "(";
      for (std::size_t i = 0; i < t->args.size(); ++i)
        os << (i ? sep : "") << term_to_string(t->args[i]);
      os << ")";
      break;
    }
  }
  return os.str();
}

}  // namespace seqmeas
