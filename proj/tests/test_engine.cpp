#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "clear/engine.hpp"
#include "clear/errors.hpp"
#include "clear/oracle.hpp"
#include "support.hpp"

using namespace clear;
using testing::G;

namespace {

RunConfig oracle_config(std::uint64_t seed, DataItem item = DataItem::energy) {
  RunConfig c;
  c.seed = seed;
  c.data_item = item;
  c.backend = "oracle";
  return c;
}

PlantedLandscape landscape_for(const CueSchema& s, std::uint64_t seed, double noise) {
  Rng rng(seed);
  PlantedLandscape land = random_landscape(s, 5, rng);
  land.noise_scale = noise;
  return land;
}

Population evaluated_population(const std::vector<double>& errors) {
  Population p;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    Genotype g = G({{"c0_" + std::to_string(i % 20)}});
    p.members.push_back({g, canonical_key(g), errors[i]});
  }
  return p;
}

/// Fails with PermanentFailure for one building, answers the truth otherwise.
class FlakyEvaluator : public testing::TruthEvaluator {
 public:
  DataEstimate evaluate(const EvaluationRequest& r) override {
    if (r.building.id == "b1") throw PermanentFailure("unreadable");
    return TruthEvaluator::evaluate(r);
  }
};

/// Goes down after `budget` evaluations.
class DyingEvaluator : public Evaluator {
 public:
  DyingEvaluator(Evaluator& inner, int budget) : inner_(inner), budget_(budget) {}
  DataEstimate evaluate(const EvaluationRequest& r) override {
    if (budget_-- <= 0) throw BackendUnavailable("quota exhausted");
    return inner_.evaluate(r);
  }

 private:
  Evaluator& inner_;
  std::atomic<int> budget_;
};

std::vector<std::string> log_lines(const std::vector<GenerationLog>& log) {
  std::vector<std::string> out;
  for (const auto& e : log) out.push_back(dump_generation_log(e));
  return out;
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("ledger keeps the worst score") {
  FitnessLedger ledger;
  CHECK(ledger.record("k", 5).worst_error == 5);
  CHECK(ledger.find("k")->evaluations == 1);
  CHECK(ledger.record("k", 3).worst_error == 5);
  CHECK(ledger.record("k", 9).worst_error == 9);
  CHECK(ledger.evaluations("k") == 3);
  CHECK(ledger.evaluations("missing") == 0);
  CHECK_THROWS_AS(ledger.record("k", -1), ContractViolation);
}

TEST_CASE("ledger merges are order-free") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::tuple<std::string, double, int>> records;
    for (int i = 0; i < 40; ++i)
      records.emplace_back("k" + std::to_string(rng.index(8)), static_cast<double>(rng.index(20)),
                           static_cast<int>(rng.index(5)));
    FitnessLedger reference;
    for (const auto& [k, e, gen] : records) reference.record(k, e, gen);
    for (int p = 0; p < 5; ++p) {
      for (std::size_t i = records.size(); i > 1; --i) std::swap(records[i - 1], records[rng.index(i)]);
      FitnessLedger other;
      for (const auto& [k, e, gen] : records) other.record(k, e, gen);
      CHECK(other == reference);
    }
  }
}

TEST_CASE("ledger best prefers lowest error then earliest generation") {
  FitnessLedger ledger;
  ledger.record("b", 4, 2);
  ledger.record("a", 4, 3);
  ledger.record("c", 6, 0);
  CHECK(ledger.best()->first == "b");
}

TEST_CASE("parent pool sizes") {
  CHECK(parent_pool_size(15, 0.33) == 5);
  CHECK(parent_pool_size(2, 0.33) == 1);
  CHECK(parent_pool_size(10, 1.0) == 10);
  CHECK(parent_pool_size(15, 0.2) == 3);
}

TEST_CASE("select_parents ranks stably") {
  const Population p = evaluated_population(std::vector<double>(15, 7.0));
  const ParentPool pool = select_parents(p, 0.33);
  CHECK(pool.members == std::vector<std::size_t>{0, 1, 2, 3, 4});
  const Population q = evaluated_population({9, 1, 5, 1, 3});
  CHECK(select_parents(q, 0.6).members == std::vector<std::size_t>{1, 3, 4});
  CHECK_THROWS_AS(select_parents(Population{}, 0.33), ContractViolation);
}

TEST_CASE("draw_parents picks distinct members when it can") {
  Rng rng(4);
  const ParentPool pool{{3, 7, 9}};
  std::map<std::size_t, int> hits;
  for (int i = 0; i < 3000; ++i) {
    const auto [a, b] = draw_parents(pool, rng);
    CHECK(a != b);
    ++hits[a];
  }
  CHECK(hits.size() == 3);
  for (const auto& [m, n] : hits) CHECK(std::abs(n - 1000) < 120);
  const ParentPool single{{5}};
  const auto [a, b] = draw_parents(single, rng);
  CHECK(a == 5);
  CHECK(b == 5);
}

TEST_CASE("next_generation copies elites and keeps shape") {
  const CueSchema s = testing::grid_schema(3, 5);
  for (GenomeMode mode : {GenomeMode::fixed, GenomeMode::variable}) {
    RunConfig c;
    c.mode = mode;
    Rng rng(9);
    Population p;
    for (int i = 0; i < 15; ++i) {
      Genotype g = random_genotype(s, rng);
      p.members.push_back({g, canonical_key(g), static_cast<double>(15 - i)});
    }
    const Population next = next_generation(p, s, c, rng);
    CHECK(next.generation == 1);
    REQUIRE(next.members.size() == 15);
    CHECK(next.members[0].genotype == p.members[14].genotype);
    CHECK(next.members[1].genotype == p.members[13].genotype);
    for (const auto& m : next.members) {
      CHECK_FALSE(m.recorded_error.has_value());
      CHECK(m.key == canonical_key(m.genotype));
      CHECK_NOTHROW(validate_genotype(m.genotype, s, mode));
    }
  }
}

TEST_CASE("elites=0 breeds every member") {
  const CueSchema s = testing::grid_schema(2, 30);
  RunConfig c;
  c.elites = 0;
  Rng rng(10);
  Population p;
  for (int i = 0; i < 15; ++i) {
    Genotype g = random_genotype(s, rng);
    p.members.push_back({g, canonical_key(g), 1.0 * i});
  }
  const Population next = next_generation(p, s, c, rng);
  CHECK(next.members.size() == 15);
}

TEST_CASE("config validation") {
  RunConfig c;
  CHECK_NOTHROW(c.validate());
  c.population_size = 1;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = RunConfig{};
  c.elites = 15;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = RunConfig{};
  c.parent_fraction = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = RunConfig{};
  c.parent_fraction = 1.5;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("defaults") {
  const RunConfig c;
  CHECK(c.population_size == 15);
  CHECK(c.generations == 20);
  CHECK(c.parent_fraction == 0.33);
  CHECK(c.elites == 2);
  CHECK(c.mutation_ops_per_child == 1);
}

TEST_CASE("config round-trips and the digest ignores paths and concurrency") {
  const CueSchema s = testing::grid_schema(2, 3);
  RunConfig c = oracle_config(77);
  c.mode = GenomeMode::fixed;
  c.log_path = "/tmp/x.log";
  const RunConfig back = parse_config(dump_config(c));
  CHECK(dump_config(back) == dump_config(c));
  RunConfig d = c;
  d.evaluation_concurrency = 8;
  d.log_path = "elsewhere.log";
  CHECK(config_digest(d, s) == config_digest(c, s));
  d.population_size = 16;
  CHECK(config_digest(d, s) != config_digest(c, s));
  CHECK(config_digest(c, testing::grid_schema(2, 4)) != config_digest(c, s));
}

TEST_CASE("a perfect evaluator stops after generation 0") {
  const CueSchema s = testing::grid_schema(3, 4);
  testing::TruthEvaluator eval;
  const RunResult r = evolve(oracle_config(1), s, eval, testing::buildings(4));
  CHECK(r.finished);
  CHECK(r.best_recorded_error == 0);
  CHECK(r.per_generation_log.size() == 1);
  CHECK(eval.calls == 15 * 4);
}

TEST_CASE("a noisy run logs at most generations + 1 entries") {
  const CueSchema s = testing::grid_schema(8, 20);
  OracleEvaluator eval(landscape_for(s, 2, 1.0));
  const RunResult r = evolve(oracle_config(3), s, eval, testing::buildings(3));
  CHECK(r.per_generation_log.size() <= 21);
  CHECK(r.finished);
  for (const auto& e : r.per_generation_log) CHECK(e.errors.size() == 15);
}

TEST_CASE("run invariants across generations") {
  const CueSchema s = testing::grid_schema(6, 10);
  OracleEvaluator eval(landscape_for(s, 5, 0.8));
  Engine engine(oracle_config(8), s, eval, testing::buildings(3));
  std::map<std::string, double> last_recorded;
  std::map<std::string, std::uint64_t> last_evals;
  std::vector<std::string> prev_elites;
  engine.run([&](const Engine& e, const GenerationLog& entry) {
    const auto& pop = e.population();
    CHECK(pop.members.size() == 15);
    for (std::size_t i = 0; i < pop.members.size(); ++i) {
      const auto& m = pop.members[i];
      CHECK(m.genotype.chromosomes.size() == 6);
      CHECK(*m.recorded_error == e.ledger().find(m.key)->worst_error);
      CHECK(entry.errors[i] == *m.recorded_error);
    }
    for (const auto& [key, entry_] : e.ledger().entries()) {
      if (last_recorded.count(key)) CHECK(entry_.worst_error >= last_recorded[key]);
      last_recorded[key] = entry_.worst_error;
    }
    // Elites of the previous generation were re-evaluated.
    for (const auto& k : prev_elites) {
      CHECK(e.ledger().evaluations(k) > last_evals[k]);
    }
    for (const auto& [key, entry_] : e.ledger().entries()) last_evals[key] = entry_.evaluations;
    const auto rank = pop.ranking();
    prev_elites = {pop.members[rank[0]].key, pop.members[rank[1]].key};
    double best_ever = std::numeric_limits<double>::infinity();
    for (const auto& [key, entry_] : e.ledger().entries()) best_ever = std::min(best_ever, entry_.worst_error);
    CHECK(entry.best_ever_error == best_ever);
    return true;
  });
}

TEST_CASE("same seed, same result") {
  const CueSchema s = testing::grid_schema(8, 20);
  OracleEvaluator eval(landscape_for(s, 6, 0.5));
  const auto train = testing::buildings(3);
  CHECK(evolve(oracle_config(11), s, eval, train) == evolve(oracle_config(11), s, eval, train));
  CHECK_FALSE(evolve(oracle_config(11), s, eval, train) == evolve(oracle_config(12), s, eval, train));
}

TEST_CASE("concurrency does not change the result") {
  const CueSchema s = testing::grid_schema(8, 20);
  OracleEvaluator eval(landscape_for(s, 7, 0.5));
  const auto train = testing::buildings(4);
  RunConfig par = oracle_config(13);
  par.evaluation_concurrency = 8;
  CHECK(evolve(oracle_config(13), s, eval, train) == evolve(par, s, eval, train));
}

TEST_CASE("permanent failures are charged the penalty") {
  const CueSchema s = testing::grid_schema(2, 3);
  FlakyEvaluator eval;
  Engine engine(oracle_config(1), s, eval, testing::buildings(3));
  engine.initialize();
  engine.evaluate_population();
  CHECK(engine.log().back().failed_evaluations == 15);
  for (const auto& m : engine.population().members) CHECK(*m.recorded_error == failure_penalty(DataItem::energy));
}

TEST_CASE("an unavailable backend leaves the state untouched") {
  const CueSchema s = testing::grid_schema(4, 6);
  OracleEvaluator oracle(landscape_for(s, 8, 0.5));
  DyingEvaluator eval(oracle, 15 * 3 * 2 + 10);
  Engine engine(oracle_config(2), s, eval, testing::buildings(3));
  CHECK_THROWS_AS(engine.run(), BackendUnavailable);
  CHECK(engine.log().size() == 2);
  CHECK_FALSE(engine.evaluated());
  CHECK(engine.population().generation == 2);
  for (const auto& m : engine.population().members) CHECK_FALSE(m.recorded_error.has_value());
}

TEST_CASE("resume after an abort matches the uninterrupted run") {
  const CueSchema s = testing::grid_schema(8, 20);
  OracleEvaluator eval(landscape_for(s, 9, 0.5));
  const auto train = testing::buildings(3);
  const RunResult full = evolve(oracle_config(21), s, eval, train);

  Engine first(oracle_config(21), s, eval, train);
  first.run([](const Engine&, const GenerationLog& e) { return e.generation < 7; });
  CHECK_FALSE(first.finished());
  const std::string snapshot = first.checkpoint();

  Engine second(oracle_config(21), s, eval, train);
  second.resume(snapshot);
  CHECK(second.checkpoint() == snapshot);
  const RunResult resumed = second.run();
  CHECK(resumed == full);
  CHECK(log_lines(resumed.per_generation_log) == log_lines(full.per_generation_log));
}

TEST_CASE("resume from a fresh state replays generation 0") {
  const CueSchema s = testing::grid_schema(5, 5);
  OracleEvaluator eval(landscape_for(s, 10, 0.5));
  const auto train = testing::buildings(2);
  Engine a(oracle_config(4), s, eval, train);
  a.initialize();
  const std::string fresh = a.checkpoint();
  a.evaluate_population();
  Engine b(oracle_config(4), s, eval, train);
  b.resume(fresh);
  b.evaluate_population();
  CHECK(log_lines(a.log()) == log_lines(b.log()));
  CHECK(a.ledger() == b.ledger());
}

TEST_CASE("resume refuses a different configuration and corrupt input") {
  const CueSchema s = testing::grid_schema(3, 3);
  OracleEvaluator eval(landscape_for(s, 11, 0.0));
  Engine a(oracle_config(4), s, eval, testing::buildings(2));
  a.initialize();
  a.evaluate_population();
  const std::string doc = a.checkpoint();

  RunConfig other = oracle_config(4);
  other.population_size = 16;
  Engine b(other, s, eval, testing::buildings(2));
  CHECK_THROWS_AS(b.resume(doc), DigestMismatch);
  Engine c(oracle_config(4), s, eval, testing::buildings(2));
  CHECK_THROWS_AS(c.resume("{\"format\": 3"), ParseError);
  CHECK_THROWS_AS(c.resume("{}"), ParseError);
  std::string broken = doc;
  broken.replace(broken.find("\"population\""), 12, "\"populatiox\"");
  CHECK_THROWS_AS(c.resume(broken), ParseError);
}

TEST_CASE("schema must fit the data item") {
  const CueSchema windows = testing::grid_schema(2, 2, DataItem::windows);
  testing::TruthEvaluator eval;
  CHECK_THROWS_AS(Engine(oracle_config(1, DataItem::energy), windows, eval, testing::buildings(2)), ValidationError);
  CHECK_NOTHROW(Engine(oracle_config(1, DataItem::windows_uvalue), windows, eval, testing::buildings(2)));
  CHECK_THROWS_AS(Engine(oracle_config(1, DataItem::windows), windows, eval, {}), ContractViolation);
}

TEST_CASE("generation log lines round-trip") {
  GenerationLog e;
  e.generation = 3;
  e.errors = {1.5, 2, 0.25};
  e.best_error = 0.25;
  e.best_ever_error = 0.25;
  e.mean_cue_count = 2.5;
  e.category_cue_counts = {1, 1.5};
  e.failed_evaluations = 2;
  CHECK(parse_generation_log(dump_generation_log(e)) == e);
  CHECK_THROWS_AS(parse_generation_log("{\"generation\": 1}"), ParseError);
}

TEST_CASE("write_file_atomic replaces the target") {
  const auto path = std::filesystem::temp_directory_path() / "clear_atomic_test.txt";
  write_file_atomic(path, "one");
  write_file_atomic(path, "two");
  std::ifstream in(path);
  std::string text;
  std::getline(in, text);
  CHECK(text == "two");
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove(path);
}

}
