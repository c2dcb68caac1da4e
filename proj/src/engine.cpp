#include "clear/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "clear/errors.hpp"
#include "clear/fitness.hpp"
#include "clear/genome_ops.hpp"

namespace clear {

using json = nlohmann::json;

namespace {

json genotype_json(const Genotype& g) {
  json out = json::array();
  for (const auto& ch : g.chromosomes) {
    json labels = json::array();
    for (const auto& cue : ch) labels.push_back(cue.label());
    out.push_back(labels);
  }
  return out;
}

Genotype genotype_from_json(const json& node) {
  Genotype g;
  for (const auto& ch : node) {
    Chromosome c;
    for (const auto& label : ch) c.emplace_back(label.get<std::string>());
    g.chromosomes.push_back(std::move(c));
  }
  return g;
}

json config_json(const RunConfig& c) {
  return json{{"population_size", c.population_size},
              {"generations", c.generations},
              {"parent_fraction", c.parent_fraction},
              {"elites", c.elites},
              {"mode", to_string(c.mode)},
              {"data_item", to_string(c.data_item)},
              {"seed", c.seed},
              {"mutation_ops_per_child", c.mutation_ops_per_child},
              {"evaluation_concurrency", c.evaluation_concurrency},
              {"retry_limit", c.retry_limit},
              {"current_year", c.current_year},
              {"backend", c.backend},
              {"schema_path", c.schema_path.string()},
              {"dataset_path", c.dataset_path.string()},
              {"checkpoint_path", c.checkpoint_path.string()},
              {"log_path", c.log_path.string()},
              {"landscape_path", c.landscape_path.string()}};
}

}  // namespace

void RunConfig::validate() const {
  if (population_size < 2) throw ValidationError("population_size must be at least 2");
  if (!(parent_fraction > 0 && parent_fraction <= 1))
    throw ValidationError("parent_fraction must lie in (0, 1]");
  if (elites < 0 || elites >= population_size)
    throw ValidationError("elites must be in [0, population_size)");
  if (generations < 0) throw ValidationError("generations must be non-negative");
  if (mutation_ops_per_child < 0) throw ValidationError("mutation_ops_per_child must be non-negative");
  if (evaluation_concurrency < 1) throw ValidationError("evaluation_concurrency must be at least 1");
  if (retry_limit < 0) throw ValidationError("retry_limit must be non-negative");
  if (backend != "llm" && backend != "oracle") throw ValidationError("backend must be llm or oracle");
}

std::string dump_config(const RunConfig& config) { return config_json(config).dump(); }

RunConfig parse_config(std::string_view document) {
  RunConfig c;
  try {
    const json doc = json::parse(document);
    c.population_size = doc.value("population_size", c.population_size);
    c.generations = doc.value("generations", c.generations);
    c.parent_fraction = doc.value("parent_fraction", c.parent_fraction);
    c.elites = doc.value("elites", c.elites);
    c.mode = parse_genome_mode(doc.value("mode", std::string(to_string(c.mode))));
    c.data_item = parse_data_item(doc.value("data_item", std::string(to_string(c.data_item))));
    c.seed = doc.value("seed", c.seed);
    c.mutation_ops_per_child = doc.value("mutation_ops_per_child", c.mutation_ops_per_child);
    c.evaluation_concurrency = doc.value("evaluation_concurrency", c.evaluation_concurrency);
    c.retry_limit = doc.value("retry_limit", c.retry_limit);
    c.current_year = doc.value("current_year", c.current_year);
    c.schema_path = doc.value("schema_path", std::string());
    c.dataset_path = doc.value("dataset_path", std::string());
    c.checkpoint_path = doc.value("checkpoint_path", std::string());
    c.log_path = doc.value("log_path", std::string());
    c.backend = doc.value("backend", c.backend);
    c.landscape_path = doc.value("landscape_path", std::string());
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return c;
}

std::string config_digest(const RunConfig& config, const CueSchema& schema) {
  json j = config_json(config);
  for (const char* field : {"evaluation_concurrency", "schema_path", "dataset_path",
                            "checkpoint_path", "log_path", "landscape_path"})
    j.erase(field);
  const std::uint64_t h = fnv1a(dump_schema(schema), fnv1a(j.dump()));
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

// ---------------------------------------------------------------------------
// Ledger

const LedgerEntry& FitnessLedger::record(const std::string& key, double error, int generation,
                                         const Genotype& genotype) {
  if (!(error >= 0)) throw ContractViolation("recorded error must be non-negative");
  auto [it, inserted] = entries_.try_emplace(key);
  LedgerEntry& e = it->second;
  if (inserted) {
    e.worst_error = error;
    e.evaluations = 1;
    e.first_seen_generation = generation;
    e.genotype = genotype;
    return e;
  }
  e.worst_error = std::max(e.worst_error, error);
  e.evaluations += 1;
  e.first_seen_generation = std::min(e.first_seen_generation, generation);
  // Same key may arrive with a different within-chromosome order; keep the
  // smaller rendering so the stored representative is order-independent.
  if (!genotype.chromosomes.empty() &&
      (e.genotype.chromosomes.empty() || render_cue_list(genotype) < render_cue_list(e.genotype)))
    e.genotype = genotype;
  return e;
}

const LedgerEntry* FitnessLedger::find(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::uint64_t FitnessLedger::evaluations(const std::string& key) const {
  const auto* e = find(key);
  return e ? e->evaluations : 0;
}

const std::pair<const std::string, LedgerEntry>* FitnessLedger::best() const {
  const std::pair<const std::string, LedgerEntry>* best = nullptr;
  for (const auto& kv : entries_) {
    if (!best || kv.second.worst_error < best->second.worst_error ||
        (kv.second.worst_error == best->second.worst_error &&
         kv.second.first_seen_generation < best->second.first_seen_generation))
      best = &kv;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Selection and reproduction

std::vector<std::size_t> Population::ranking() const {
  std::vector<std::size_t> order(members.size());
  std::iota(order.begin(), order.end(), 0);
  for (const auto& m : members)
    if (!m.recorded_error) throw ContractViolation("population has unevaluated members");
  std::stable_sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
    return *members[a].recorded_error < *members[b].recorded_error;
  });
  return order;
}

std::size_t parent_pool_size(std::size_t population_size, double parent_fraction) {
  // Tolerance keeps exact products such as 0.2 * 15 from rounding up.
  const double raw = parent_fraction * static_cast<double>(population_size);
  const auto n = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  return std::clamp<std::size_t>(n, 1, population_size);
}

ParentPool select_parents(const Population& population, double parent_fraction) {
  if (population.members.empty()) throw ContractViolation("parent pool would be empty");
  const auto order = population.ranking();
  ParentPool pool;
  pool.members.assign(order.begin(),
                      order.begin() + static_cast<std::ptrdiff_t>(
                                          parent_pool_size(order.size(), parent_fraction)));
  return pool;
}

std::pair<std::size_t, std::size_t> draw_parents(const ParentPool& pool, Rng& rng) {
  if (pool.members.empty()) throw ContractViolation("parent pool is empty");
  const std::size_t a = rng.index(pool.members.size());
  if (pool.members.size() == 1) return {pool.members[a], pool.members[a]};
  std::size_t b = rng.index(pool.members.size());
  while (b == a) b = rng.index(pool.members.size());
  return {pool.members[a], pool.members[b]};
}

Population next_generation(const Population& population, const CueSchema& schema,
                           const RunConfig& config, Rng& rng) {
  const auto order = population.ranking();
  const ParentPool pool = select_parents(population, config.parent_fraction);
  Population next;
  next.generation = population.generation + 1;
  const auto n = static_cast<std::size_t>(config.population_size);
  next.members.reserve(n);
  for (std::size_t i = 0; i < static_cast<std::size_t>(config.elites) && i < order.size(); ++i) {
    const Member& elite = population.members[order[i]];
    next.members.push_back({elite.genotype, elite.key, std::nullopt});
  }
  while (next.members.size() < n) {
    const auto [a, b] = draw_parents(pool, rng);
    Genotype child = crossover(config.mode, population.members[a].genotype,
                               population.members[b].genotype, rng);
    for (int k = 0; k < config.mutation_ops_per_child; ++k)
      child = mutate(config.mode, child, schema, rng);
    std::string key = canonical_key(child);
    next.members.push_back({std::move(child), std::move(key), std::nullopt});
  }
  return next;
}

// ---------------------------------------------------------------------------
// Engine

Engine::Engine(RunConfig config, CueSchema schema, Evaluator& evaluator,
               std::vector<BuildingRecord> training)
    : config_(std::move(config)),
      schema_(std::move(schema)),
      evaluator_(evaluator),
      training_(std::move(training)),
      rng_(config_.seed) {
  config_.validate();
  schema_.validate();
  if (training_.empty()) throw ContractViolation("training split is empty");
  if (!schema_serves(schema_.data_item, config_.data_item))
    throw ValidationError("schema was built for " + std::string(to_string(schema_.data_item)) +
                          ", run targets " + std::string(to_string(config_.data_item)));
  for (const auto& b : training_)
    if (!b.truth.has(config_.data_item))
      throw ValidationError("building " + b.id + " has no ground truth for " +
                            std::string(to_string(config_.data_item)));
}

void Engine::initialize() {
  population_ = {};
  population_.generation = 0;
  for (int i = 0; i < config_.population_size; ++i) {
    Genotype g = random_genotype(schema_, rng_);
    std::string key = canonical_key(g);
    population_.members.push_back({std::move(g), std::move(key), std::nullopt});
  }
  initialized_ = true;
  evaluated_ = false;
  finished_ = false;
}

void Engine::evaluate_population() {
  if (!initialized_) throw ContractViolation("engine not initialized");
  auto& members = population_.members;
  const std::size_t n = members.size();
  const std::size_t m = training_.size();

  // Counters are fixed before dispatch so completion order cannot matter.
  std::vector<std::uint64_t> counters(n);
  std::map<std::string, std::uint64_t> pending;
  for (std::size_t i = 0; i < n; ++i)
    counters[i] = ledger_.evaluations(members[i].key) + pending[members[i].key]++;

  std::vector<double> errors(n * m, 0.0);
  std::vector<char> failed(n * m, 0);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr abort_reason;
  std::mutex abort_mutex;

  auto work = [&] {
    for (std::size_t t = next++; t < n * m && !abort; t = next++) {
      const std::size_t i = t / m;
      const BuildingRecord& b = training_[t % m];
      try {
        const EvaluationRequest req{members[i].genotype, members[i].key, b, config_.data_item,
                                    counters[i], 0};
        errors[t] = building_error(config_.data_item, evaluator_.evaluate(req), b.truth);
      } catch (const PermanentFailure&) {
        errors[t] = failure_penalty(config_.data_item);
        failed[t] = 1;
      } catch (...) {
        std::lock_guard lock(abort_mutex);
        if (!abort_reason) abort_reason = std::current_exception();
        abort = true;
      }
    }
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config_.evaluation_concurrency), n * m);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (abort_reason) std::rethrow_exception(abort_reason);

  for (std::size_t i = 0; i < n; ++i) {
    const double total = aggregate_fitness(std::span<const double>(errors).subspan(i * m, m));
    ledger_.record(members[i].key, total, population_.generation, members[i].genotype);
  }
  for (auto& member : members) member.recorded_error = ledger_.find(member.key)->worst_error;
  evaluated_ = true;
  log_.push_back(make_log_entry(static_cast<std::size_t>(std::count(failed.begin(), failed.end(), 1))));
}

GenerationLog Engine::make_log_entry(std::size_t failures) const {
  GenerationLog entry;
  entry.generation = population_.generation;
  entry.failed_evaluations = failures;
  entry.category_cue_counts.assign(schema_.size(), 0.0);
  double cues = 0;
  for (const auto& m : population_.members) {
    entry.errors.push_back(*m.recorded_error);
    cues += static_cast<double>(m.genotype.cue_count());
    for (std::size_t x = 0; x < m.genotype.chromosomes.size(); ++x)
      entry.category_cue_counts[x] += static_cast<double>(m.genotype.chromosomes[x].size());
  }
  const auto count = static_cast<double>(population_.members.size());
  entry.mean_cue_count = cues / count;
  for (auto& c : entry.category_cue_counts) c /= count;
  entry.best_error = *std::min_element(entry.errors.begin(), entry.errors.end());
  entry.best_ever_error = ledger_.best()->second.worst_error;
  return entry;
}

bool Engine::should_stop() const {
  if (!evaluated_) return false;
  if (population_.generation >= config_.generations) return true;
  return std::any_of(population_.members.begin(), population_.members.end(),
                     [](const Member& m) { return *m.recorded_error == 0.0; });
}

void Engine::advance() {
  if (!evaluated_) throw ContractViolation("advance() before evaluation");
  population_ = next_generation(population_, schema_, config_, rng_);
  evaluated_ = false;
}

RunResult Engine::run(const Observer& observer) {
  if (!initialized_) initialize();
  while (!finished_) {
    if (!evaluated_) {
      evaluate_population();
      if (should_stop()) finished_ = true;
      if (observer && !observer(*this, log_.back())) break;
    }
    if (finished_ || should_stop()) {
      finished_ = true;
      break;
    }
    advance();
  }
  return result();
}

RunResult Engine::result() const {
  RunResult r;
  r.per_generation_log = log_;
  r.finished = finished_;
  if (const auto* best = ledger_.best()) {
    r.best_genotype = best->second.genotype;
    r.best_recorded_error = best->second.worst_error;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Serialization

std::string run_log_header(const RunConfig& config, const CueSchema& schema) {
  json j{{"kind", "config"}, {"config", config_json(config)}, {"config_digest", config_digest(config, schema)}};
  // No sampling parameters are sent, so the provider's defaults apply.
  if (config.backend == "llm") j["sampling"] = "provider defaults";
  return j.dump();
}

std::string dump_generation_log(const GenerationLog& e) {
  json j{{"kind", "generation"},
         {"generation", e.generation},
         {"errors", e.errors},
         {"best_error", e.best_error},
         {"best_ever_error", e.best_ever_error},
         {"mean_cue_count", e.mean_cue_count},
         {"category_cue_counts", e.category_cue_counts},
         {"failed_evaluations", e.failed_evaluations}};
  return j.dump();
}

GenerationLog parse_generation_log(std::string_view line) {
  try {
    const json j = json::parse(line);
    GenerationLog e;
    e.generation = j.at("generation").get<int>();
    e.errors = j.at("errors").get<std::vector<double>>();
    e.best_error = j.at("best_error").get<double>();
    e.best_ever_error = j.at("best_ever_error").get<double>();
    e.mean_cue_count = j.at("mean_cue_count").get<double>();
    e.category_cue_counts = j.at("category_cue_counts").get<std::vector<double>>();
    e.failed_evaluations = j.value("failed_evaluations", std::size_t{0});
    return e;
  } catch (const json::exception& ex) {
    throw ParseError(ex.what());
  }
}

struct EngineCodec {
  static json encode(const Engine& e) {
    json members = json::array();
    for (const auto& m : e.population_.members) {
      json node{{"chromosomes", genotype_json(m.genotype)}};
      node["recorded_error"] = m.recorded_error ? json(*m.recorded_error) : json(nullptr);
      members.push_back(node);
    }
    json ledger = json::array();
    for (const auto& [key, entry] : e.ledger_.entries_)
      ledger.push_back({{"key", key},
                        {"worst_error", entry.worst_error},
                        {"evaluations", entry.evaluations},
                        {"first_seen_generation", entry.first_seen_generation},
                        {"genotype", genotype_json(entry.genotype)}});
    json log = json::array();
    for (const auto& entry : e.log_) log.push_back(json::parse(dump_generation_log(entry)));
    return json{{"format", "clear-checkpoint/1"},
                {"config_digest", config_digest(e.config_, e.schema_)},
                {"config", config_json(e.config_)},
                {"initialized", e.initialized_},
                {"evaluated", e.evaluated_},
                {"finished", e.finished_},
                {"generation", e.population_.generation},
                {"population", members},
                {"ledger", ledger},
                {"rng", e.rng_.state()},
                {"log", log}};
  }

  static void decode(Engine& e, const json& doc) {
    if (doc.value("format", "") != "clear-checkpoint/1")
      throw ParseError("checkpoint: unknown format");
    const std::string expected = config_digest(e.config_, e.schema_);
    if (doc.at("config_digest").get<std::string>() != expected)
      throw DigestMismatch("checkpoint was written under a different configuration or schema");
    Population pop;
    pop.generation = doc.at("generation").get<int>();
    for (const auto& node : doc.at("population")) {
      Member m;
      m.genotype = genotype_from_json(node.at("chromosomes"));
      validate_genotype(m.genotype, e.schema_, e.config_.mode);
      m.key = canonical_key(m.genotype);
      if (!node.at("recorded_error").is_null()) m.recorded_error = node.at("recorded_error").get<double>();
      pop.members.push_back(std::move(m));
    }
    FitnessLedger ledger;
    for (const auto& node : doc.at("ledger")) {
      LedgerEntry entry;
      entry.worst_error = node.at("worst_error").get<double>();
      entry.evaluations = node.at("evaluations").get<std::uint64_t>();
      entry.first_seen_generation = node.at("first_seen_generation").get<int>();
      entry.genotype = genotype_from_json(node.at("genotype"));
      ledger.entries_.emplace(node.at("key").get<std::string>(), std::move(entry));
    }
    std::vector<GenerationLog> log;
    for (const auto& node : doc.at("log")) log.push_back(parse_generation_log(node.dump()));
    Rng rng;
    rng.restore(doc.at("rng").get<std::string>());

    e.population_ = std::move(pop);
    e.ledger_ = std::move(ledger);
    e.log_ = std::move(log);
    e.rng_ = rng;
    e.initialized_ = doc.at("initialized").get<bool>();
    e.evaluated_ = doc.at("evaluated").get<bool>();
    e.finished_ = doc.at("finished").get<bool>();
  }
};

std::string Engine::checkpoint() const { return EngineCodec::encode(*this).dump(1) + "\n"; }

void Engine::resume(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  try {
    EngineCodec::decode(*this, doc);
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  } catch (const ValidationError& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
}

RunResult evolve(const RunConfig& config, const CueSchema& schema, Evaluator& evaluator,
                 const std::vector<BuildingRecord>& training) {
  Engine engine(config, schema, evaluator, training);
  return engine.run();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace clear
