#pragma once

#include <random>

#include "seqmeas/term.hpp"

namespace seqmeas {

// Seeded random terms for property suites. depth bounds the operator
// nesting; generated terms stay within the resource limits of the density
// evaluator (dyadic level <= 8, block index <= 12).
TermPtr random_term(std::mt19937_64& rng, int depth);

// Random term without block/lift nodes (density always exact and periodic).
TermPtr random_periodic_term(std::mt19937_64& rng, int depth);

}  // namespace seqmeas
