#pragma once

#include <cstdint>
#include <string>

#include "clear/dataset.hpp"
#include "clear/fitness.hpp"
#include "clear/schema.hpp"

namespace clear {

struct EvaluationRequest {
  const Genotype& genotype;
  const std::string& key;  // canonical_key(genotype)
  const BuildingRecord& building;
  DataItem item;
  /// How many times this key was evaluated before (per building); drives
  /// reproducible noise in deterministic backends.
  std::uint64_t eval_counter = 0;
  int attempt = 0;
};

/// Produces one building's estimate for a cue set.
///
/// Implementations must be callable concurrently. Throw PermanentFailure when
/// an estimate cannot be produced for this building and BackendUnavailable
/// when no further evaluation is possible.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual DataEstimate evaluate(const EvaluationRequest& request) = 0;
};

}  // namespace clear
