#include "clear/genome_ops.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

#include "clear/errors.hpp"

namespace clear {

namespace {

void require_same_shape(const Genotype& p1, const Genotype& p2) {
  if (p1.chromosomes.size() != p2.chromosomes.size())
    throw ContractViolation("parents have " + std::to_string(p1.chromosomes.size()) + " and " +
                            std::to_string(p2.chromosomes.size()) + " chromosomes");
}

}  // namespace

Chromosome dedup(const Chromosome& chromosome) {
  Chromosome out;
  out.reserve(chromosome.size());
  std::unordered_set<std::string> seen;
  for (const auto& cue : chromosome)
    if (seen.insert(cue.label()).second) out.push_back(cue);
  return out;
}

Genotype crossover_fixed(const Genotype& p1, const Genotype& p2, Rng& rng) {
  require_same_shape(p1, p2);
  Genotype child;
  child.chromosomes.reserve(p1.chromosomes.size());
  for (std::size_t x = 0; x < p1.chromosomes.size(); ++x) {
    if (p1.chromosomes[x].size() != 1 || p2.chromosomes[x].size() != 1)
      throw ContractViolation("fixed-length crossover needs one cue per chromosome");
    child.chromosomes.push_back(rng.coin() ? p1.chromosomes[x] : p2.chromosomes[x]);
  }
  return child;
}

Genotype mutate_fixed(const Genotype& g, const CueSchema& schema, Rng& rng) {
  if (g.chromosomes.size() != schema.size())
    throw ContractViolation("genotype does not match schema");
  Genotype out = g;
  const std::size_t x = rng.index(out.chromosomes.size());
  const auto& allowed = schema.categories[x].allowed_cues;
  if (allowed.size() < 2) return out;
  Cue& slot = out.chromosomes[x].front();
  // Draw among the other m-1 cues by skipping the current one.
  const auto current = std::find(allowed.begin(), allowed.end(), slot);
  std::size_t pick = rng.index(allowed.size() - 1);
  if (current != allowed.end() && pick >= static_cast<std::size_t>(current - allowed.begin())) ++pick;
  slot = allowed[pick];
  return out;
}

Genotype crossover_variable(const Genotype& p1, const Genotype& p2, Rng& rng) {
  require_same_shape(p1, p2);
  Genotype child;
  child.chromosomes.reserve(p1.chromosomes.size());
  for (std::size_t x = 0; x < p1.chromosomes.size(); ++x) {
    const auto& a = p1.chromosomes[x];
    const auto& b = p2.chromosomes[x];
    const auto& longer = a.size() >= b.size() ? a : b;
    const std::size_t shared = std::min(a.size(), b.size());
    Chromosome ch;
    ch.reserve(longer.size());
    for (std::size_t i = 0; i < shared; ++i) ch.push_back(rng.coin() ? a[i] : b[i]);
    for (std::size_t i = shared; i < longer.size(); ++i)
      if (rng.coin()) ch.push_back(longer[i]);
    child.chromosomes.push_back(dedup(ch));
  }
  return child;
}

Genotype apply_mutation(const Genotype& g, const CueSchema& schema, std::size_t index,
                        MutationOp op, Rng& rng) {
  if (g.chromosomes.size() != schema.size() || index >= g.chromosomes.size())
    throw ContractViolation("mutation target outside genotype");
  Genotype out = g;
  Chromosome& ch = out.chromosomes[index];
  const auto& allowed = schema.categories[index].allowed_cues;
  if (op == MutationOp::swap && ch.empty()) op = MutationOp::add;
  switch (op) {
    case MutationOp::swap:
      ch[rng.index(ch.size())] = allowed[rng.index(allowed.size())];
      break;
    case MutationOp::remove:
      if (!ch.empty()) ch.erase(ch.begin() + static_cast<std::ptrdiff_t>(rng.index(ch.size())));
      break;
    case MutationOp::add:
      ch.push_back(allowed[rng.index(allowed.size())]);
      break;
  }
  ch = dedup(ch);
  return out;
}

Genotype mutate_variable(const Genotype& g, const CueSchema& schema, Rng& rng) {
  if (g.chromosomes.size() != schema.size())
    throw ContractViolation("genotype does not match schema");
  const std::size_t index = rng.index(g.chromosomes.size());
  const auto op = static_cast<MutationOp>(rng.index(3));
  return apply_mutation(g, schema, index, op, rng);
}

}  // namespace clear
