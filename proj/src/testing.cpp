#include "seqmeas/testing.hpp"

namespace seqmeas {

namespace {

TermPtr random_leaf(std::mt19937_64& rng, bool allow_blocks) {
  std::uniform_int_distribution<int> pick(0, allow_blocks ? 3 : 1);
  switch (pick(rng)) {
    case 0: {  // finite
      std::uniform_int_distribution<int> cnt(0, 6);
      std::uniform_int_distribution<std::uint64_t> elem(0, 4095);
      std::vector<std::uint64_t> elems;
      for (int i = cnt(rng); i > 0; --i) elems.push_back(elem(rng));
      return finite_set(std::move(elems));
    }
    case 1: {  // dyadic
      std::uniform_int_distribution<unsigned> lvl(1, 8);
      unsigned k = lvl(rng);
      std::uniform_int_distribution<std::uint64_t> res(0,
                                                       (1ull << k) - 1);
      std::uniform_int_distribution<int> cnt(1, 1 << std::min(k, 3u));
      std::vector<std::uint64_t> rs;
      for (int i = cnt(rng); i > 0; --i) rs.push_back(res(rng));
      return dyadic(k, std::move(rs));
    }
    case 2: {  // block
      std::uniform_int_distribution<std::uint64_t> b(0, 12);
      return block(b(rng));
    }
    default: {  // lift of a shallow inner term
      std::uniform_int_distribution<std::uint64_t> b(0, 12);
      return lift(b(rng), random_leaf(rng, false));
    }
  }
}

TermPtr random_node(std::mt19937_64& rng, int depth, bool allow_blocks) {
  if (depth <= 0) return random_leaf(rng, allow_blocks);
  std::uniform_int_distribution<int> pick(0, 5);
  switch (pick(rng)) {
    case 0:
      return complement_of(random_node(rng, depth - 1, allow_blocks));
    case 1:
      return term_union({random_node(rng, depth - 1, allow_blocks),
                         random_node(rng, depth - 1, allow_blocks)});
    case 2:
      return term_inter({random_node(rng, depth - 1, allow_blocks),
                         random_node(rng, depth - 1, allow_blocks)});
    case 3:
      return term_diff(random_node(rng, depth - 1, allow_blocks),
                       random_node(rng, depth - 1, allow_blocks));
    case 4:
      if (allow_blocks) {
        std::uniform_int_distribution<std::uint64_t> b(0, 10);
        return lift(b(rng), random_node(rng, depth - 1, false));
      }
      return random_leaf(rng, allow_blocks);
    default:
      return random_leaf(rng, allow_blocks);
  }
}

}  // namespace

TermPtr random_term(std::mt19937_64& rng, int depth) {
  return random_node(rng, depth, true);
}

TermPtr random_periodic_term(std::mt19937_64& rng, int depth) {
  return random_node(rng, depth, false);
}

}  // namespace seqmeas
