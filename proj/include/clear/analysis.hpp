#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clear/dataset.hpp"
#include "clear/engine.hpp"
#include "clear/evaluator.hpp"
#include "clear/schema.hpp"

namespace clear {

struct AblationRow {
  Cue removed;
  std::size_t category = 0;
  std::string category_name;
  double new_error = 0;
  double delta = 0;  // new_error - base_error
  bool failed = false;
};

struct AblationReport {
  double base_error = 0;
  std::vector<AblationRow> rows;
  double mean_new_error = 0;
  double stddev = 0;  // population standard deviation of new_error
  std::size_t failed_rows = 0;
};

/// Removes each cue of `g` in turn and re-scores on `split` (summed error,
/// first evaluation of every key). Rows whose evaluation hit a permanent
/// failure are kept but left out of the summary.
AblationReport ablate(const Genotype& g, const CueSchema& schema, Evaluator& evaluator,
                      const std::vector<BuildingRecord>& split, DataItem item);

std::string ablation_csv(const AblationReport& report);
std::string ablation_text(const AblationReport& report);

/// Population standard deviation over mean; empty when the mean is 0.
/// Throws ContractViolation on an empty input.
std::optional<double> cv(std::span<const double> values);

/// Fraction of samples that differ from the modal one. Ties between modes go
/// to the value observed first.
double disagreement_rate(std::span<const std::string> samples);

/// Number a response is coded as for cv: categorical items use their error
/// against the truth, numeric items their value (range midpoints).
double code_response(DataItem item, const DataEstimate& estimate, const GroundTruth& truth);

struct ConsistencyReport {
  Cue cue;
  std::size_t samples = 0;  // successful evaluations
  std::size_t failures = 0;
  double disagreement_rate = 0;
  std::optional<double> cv;
  std::vector<std::string> responses;
  std::vector<double> coded;
};

/// Evaluates the genotype holding only `cue` (in `category`) `n` times on one
/// building, with eval counters 0..n-1. Throws PermanentFailure when every
/// sample fails.
ConsistencyReport consistency_probe(const Cue& cue, std::size_t category, const CueSchema& schema,
                                    const BuildingRecord& building, Evaluator& evaluator,
                                    DataItem item, std::size_t n);

std::string consistency_text(const ConsistencyReport& report);

struct RunLog {
  std::string label;
  std::string header;  // raw config line, empty when absent
  std::vector<GenerationLog> generations;
};

/// Parses a run log (JSON lines). Throws ParseError naming the line.
RunLog parse_run_log(std::string_view text, std::string label = {});
RunLog load_run_log(const std::filesystem::path& path);

struct RunReport {
  std::string table_csv;       // one row per generation and run
  std::string comparison_csv;  // side by side, only for two runs
  std::string summary;
};

RunReport report(const std::vector<RunLog>& logs);

}  // namespace clear
