#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "clear/evaluator.hpp"

namespace clear {

struct PlantedCue {
  std::size_t category = 0;
  std::string label;
  double benefit = 0;
};

/// Synthetic stand-in for the vision model with a known optimum.
///
/// latent = base_error - sum(benefit of planted cues present)
///        + distractor_penalty * (non-planted cues present) + noise,
/// clamped at 0. Noise is Gaussian with standard deviation `noise_scale`,
/// drawn from a stream keyed by (seed, genotype key, building id, counter).
struct PlantedLandscape {
  std::vector<PlantedCue> planted;
  double distractor_penalty = 1.0;
  /// Negative means "sum of planted benefits", which puts the optimum at 0.
  double base_error = -1.0;
  double noise_scale = 0.0;
  std::uint64_t seed = 0;

  double effective_base() const;
  double total_benefit() const;
  /// Throws ValidationError on negative weights, penalty >= some benefit,
  /// duplicate planted cues, or cues outside `schema`.
  void validate(const CueSchema& schema) const;
  /// The genotype holding exactly the planted cues.
  Genotype optimum(const CueSchema& schema) const;
};

double landscape_noise(const PlantedLandscape& landscape, const std::string& key,
                       const std::string& building_id, std::uint64_t eval_counter);

/// Clamped latent error of `g` for one building.
double oracle_score(const PlantedLandscape& landscape, const Genotype& g, const std::string& key,
                    const std::string& building_id, std::uint64_t eval_counter);

/// Turns a latent error into an estimate whose building_error against `truth`
/// equals the score where the item's scale allows it. Categorical items use
/// thresholds: < 1 exact, < 2 neighbouring class, otherwise the farthest class.
DataEstimate estimate_from_score(DataItem item, double score, const GroundTruth& truth);

DataEstimate oracle_evaluate(const Genotype& g, const BuildingRecord& building, DataItem item,
                             const PlantedLandscape& landscape, std::uint64_t eval_counter);

class OracleEvaluator final : public Evaluator {
 public:
  explicit OracleEvaluator(PlantedLandscape landscape) : landscape_(std::move(landscape)) {}
  DataEstimate evaluate(const EvaluationRequest& request) override;
  const PlantedLandscape& landscape() const { return landscape_; }

 private:
  PlantedLandscape landscape_;
};

/// Plants `count` cues at random categories/cues of `schema` with benefits in
/// [min_benefit, max_benefit] (whole numbers).
PlantedLandscape random_landscape(const CueSchema& schema, std::size_t count, Rng& rng,
                                  double min_benefit = 2, double max_benefit = 6);

std::string dump_landscape(const PlantedLandscape& landscape);
PlantedLandscape load_landscape(std::string_view document);

}  // namespace clear
