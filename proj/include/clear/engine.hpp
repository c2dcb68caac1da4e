#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clear/dataset.hpp"
#include "clear/evaluator.hpp"
#include "clear/rng.hpp"
#include "clear/schema.hpp"

namespace clear {

inline constexpr int kDefaultCurrentYear = 2025;

struct RunConfig {
  int population_size = 15;
  int generations = 20;
  double parent_fraction = 0.33;
  int elites = 2;
  GenomeMode mode = GenomeMode::variable;
  DataItem data_item = DataItem::building_age;
  std::uint64_t seed = 0;
  int mutation_ops_per_child = 1;
  int evaluation_concurrency = 1;
  int retry_limit = 2;
  int current_year = kDefaultCurrentYear;
  std::string backend = "llm";  // "llm" or "oracle"

  std::filesystem::path schema_path;
  std::filesystem::path dataset_path;
  std::filesystem::path checkpoint_path;
  std::filesystem::path log_path;
  std::filesystem::path landscape_path;  // oracle backend only

  /// Throws ValidationError when a field is out of range.
  void validate() const;
};

std::string dump_config(const RunConfig& config);  // single-line JSON
RunConfig parse_config(std::string_view document);

/// Hash over every field that changes the trajectory of a run, plus the
/// schema. Concurrency and file paths are excluded.
std::string config_digest(const RunConfig& config, const CueSchema& schema);

struct LedgerEntry {
  double worst_error = 0;
  std::uint64_t evaluations = 0;
  int first_seen_generation = 0;
  Genotype genotype;  // representative with this key

  friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

/// Worst-observed error per canonical genotype key. Merges are commutative:
/// any order of the same records yields the same ledger.
class FitnessLedger {
 public:
  const LedgerEntry& record(const std::string& key, double error, int generation = 0,
                            const Genotype& genotype = {});

  const LedgerEntry* find(const std::string& key) const;
  std::uint64_t evaluations(const std::string& key) const;
  const std::map<std::string, LedgerEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  /// Lowest worst_error; ties go to the earliest-seen, then smallest key.
  const std::pair<const std::string, LedgerEntry>* best() const;

  friend bool operator==(const FitnessLedger&, const FitnessLedger&) = default;

 private:
  friend struct EngineCodec;
  std::map<std::string, LedgerEntry> entries_;
};

struct Member {
  Genotype genotype;
  std::string key;
  std::optional<double> recorded_error;
};

struct Population {
  std::vector<Member> members;
  int generation = 0;

  /// Member indices by ascending recorded error, ties in population order.
  std::vector<std::size_t> ranking() const;
};

struct GenerationLog {
  int generation = 0;
  std::vector<double> errors;
  double best_error = 0;
  double best_ever_error = 0;
  double mean_cue_count = 0;
  std::vector<double> category_cue_counts;  // mean cues per chromosome index
  std::size_t failed_evaluations = 0;

  friend bool operator==(const GenerationLog&, const GenerationLog&) = default;
};

/// First line of a run log: the effective configuration and its digest.
std::string run_log_header(const RunConfig& config, const CueSchema& schema);
std::string dump_generation_log(const GenerationLog& entry);  // single-line JSON
GenerationLog parse_generation_log(std::string_view line);

struct RunResult {
  Genotype best_genotype;
  double best_recorded_error = 0;
  std::vector<GenerationLog> per_generation_log;
  bool finished = false;

  friend bool operator==(const RunResult&, const RunResult&) = default;
};

/// Indices of the best ceil(fraction * N) members.
struct ParentPool {
  std::vector<std::size_t> members;
};

ParentPool select_parents(const Population& population, double parent_fraction);
std::size_t parent_pool_size(std::size_t population_size, double parent_fraction);

/// Two parents drawn uniformly from the pool, distinct when it holds >= 2.
std::pair<std::size_t, std::size_t> draw_parents(const ParentPool& pool, Rng& rng);

/// Elites copied verbatim, the rest bred by crossover then mutation.
Population next_generation(const Population& population, const CueSchema& schema,
                           const RunConfig& config, Rng& rng);

/// Generational loop over one evaluation backend and the training split.
class Engine {
 public:
  /// Called after every evaluated generation; return false to stop early
  /// (the state stays resumable).
  using Observer = std::function<bool(const Engine&, const GenerationLog&)>;

  Engine(RunConfig config, CueSchema schema, Evaluator& evaluator,
         std::vector<BuildingRecord> training);

  /// Creates generation 0 (one random cue per chromosome).
  void initialize();
  /// Evaluates every member on every training building and merges into the
  /// ledger. On BackendUnavailable the population and ledger are untouched.
  void evaluate_population();
  bool should_stop() const;
  /// Replaces the evaluated population with the next generation.
  void advance();

  /// Runs until termination or until the observer asks to stop.
  RunResult run(const Observer& observer = {});
  RunResult result() const;

  const RunConfig& config() const { return config_; }
  const CueSchema& schema() const { return schema_; }
  const Population& population() const { return population_; }
  const FitnessLedger& ledger() const { return ledger_; }
  const std::vector<GenerationLog>& log() const { return log_; }
  bool initialized() const { return initialized_; }
  bool evaluated() const { return evaluated_; }
  bool finished() const { return finished_; }
  const Rng& rng() const { return rng_; }

  /// Snapshot of the quiescent state as a JSON document.
  std::string checkpoint() const;
  /// Restores a snapshot; throws DigestMismatch when it was written under a
  /// different configuration or schema, ParseError when it is corrupt.
  void resume(std::string_view document);

 private:
  friend struct EngineCodec;
  GenerationLog make_log_entry(std::size_t failures) const;

  RunConfig config_;
  CueSchema schema_;
  Evaluator& evaluator_;
  std::vector<BuildingRecord> training_;
  Rng rng_;
  Population population_;
  FitnessLedger ledger_;
  std::vector<GenerationLog> log_;
  bool initialized_ = false;
  bool evaluated_ = false;
  bool finished_ = false;
};

RunResult evolve(const RunConfig& config, const CueSchema& schema, Evaluator& evaluator,
                 const std::vector<BuildingRecord>& training);

/// Writes to a temporary sibling and renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace clear
