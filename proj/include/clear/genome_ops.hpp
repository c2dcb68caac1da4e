#pragma once

#include "clear/rng.hpp"
#include "clear/schema.hpp"

namespace clear {

/// Keeps the first occurrence of every label, preserving order.
Chromosome dedup(const Chromosome& chromosome);

/// Uniform crossover over single-cue chromosomes.
Genotype crossover_fixed(const Genotype& p1, const Genotype& p2, Rng& rng);

/// Replaces the cue of one random chromosome with a different cue of the same
/// category. Size-1 categories leave the genotype unchanged.
Genotype mutate_fixed(const Genotype& g, const CueSchema& schema, Rng& rng);

/// Positional crossover: shared positions pick either parent's cue, positions
/// only the longer parent has are inherited with probability 0.5, then dedup.
Genotype crossover_variable(const Genotype& p1, const Genotype& p2, Rng& rng);

enum class MutationOp { swap, remove, add };

/// Chooses a chromosome and one of swap/remove/add uniformly, applies it, dedups.
Genotype mutate_variable(const Genotype& g, const CueSchema& schema, Rng& rng);

/// Applies a specific variable-length mutation to chromosome `index`.
/// Swap on an empty chromosome adds instead; remove on an empty one is a no-op.
Genotype apply_mutation(const Genotype& g, const CueSchema& schema, std::size_t index,
                        MutationOp op, Rng& rng);

inline Genotype crossover(GenomeMode mode, const Genotype& p1, const Genotype& p2, Rng& rng) {
  return mode == GenomeMode::fixed ? crossover_fixed(p1, p2, rng) : crossover_variable(p1, p2, rng);
}

inline Genotype mutate(GenomeMode mode, const Genotype& g, const CueSchema& schema, Rng& rng) {
  return mode == GenomeMode::fixed ? mutate_fixed(g, schema, rng) : mutate_variable(g, schema, rng);
}

}  // namespace clear
