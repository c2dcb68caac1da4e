// clear: command-line driver for schema generation, runs, and analyses.
//
// Exit status: 0 success, 1 usage, 2 I/O or configuration, 3 backend failure.

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clear/analysis.hpp"
#include "clear/dataset.hpp"
#include "clear/engine.hpp"
#include "clear/errors.hpp"
#include "clear/llm.hpp"
#include "clear/oracle.hpp"
#include "clear/schema.hpp"
#include "clear/schema_gen.hpp"

namespace fs = std::filesystem;
using namespace clear;

namespace {

enum Exit { kOk = 0, kUsage = 1, kIo = 2, kBackend = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file_atomic(path, text);
}

std::vector<std::string> item_names() {
  std::vector<std::string> out;
  for (DataItem item : all_data_items()) out.emplace_back(to_string(item));
  return out;
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) throw UsageError("--seeds expects a..b");
  std::uint64_t a = 0, b = 0;
  const auto* first = text.data();
  const auto r1 = std::from_chars(first, first + dots, a);
  const auto r2 = std::from_chars(first + dots + 2, first + text.size(), b);
  if (r1.ec != std::errc() || r1.ptr != first + dots || r2.ec != std::errc() ||
      r2.ptr != first + text.size() || a > b)
    throw UsageError("--seeds expects a..b with a <= b, got '" + text + "'");
  return {a, b};
}

/// Evaluator plus whatever keeps it alive.
struct Backend {
  std::unique_ptr<Evaluator> evaluator;
  LlmEvaluator* llm = nullptr;
};

Backend make_backend(const std::string& kind, const fs::path& landscape_path,
                     const CueSchema& schema, int retry_limit, int current_year) {
  Backend b;
  if (kind == "oracle") {
    if (landscape_path.empty()) throw UsageError("the oracle backend needs a landscape file");
    PlantedLandscape land = load_landscape(read_file(landscape_path));
    land.validate(schema);
    b.evaluator = std::make_unique<OracleEvaluator>(std::move(land));
  } else {
    auto transport = std::make_shared<HttpTransport>(http_options_from_env());
    auto llm = std::make_unique<LlmEvaluator>(transport, schema.region, retry_limit, current_year);
    b.llm = llm.get();
    b.evaluator = std::move(llm);
  }
  return b;
}

std::vector<BuildingRecord> load_records(const fs::path& manifest, int current_year,
                                         const std::string& backend) {
  return load_manifest_file(manifest, current_year, backend == "llm");
}

// ---------------------------------------------------------------------------
// run / resume

struct RunOptions {
  RunConfig config;
  std::string item;
  std::string mode = "variable";
  std::optional<std::uint64_t> seed;
  std::string seeds;
  fs::path out_dir = "run";
  std::size_t planted = 5;
  double noise = 0.5;
  int stop_after = -1;
};

/// Appends each generation to the log, then checkpoints.
Engine::Observer persisting_observer(int stop_after) {
  return [stop_after](const Engine& engine, const GenerationLog& entry) {
    const auto& cfg = engine.config();
    {
      std::ofstream log(cfg.log_path, std::ios::app | std::ios::binary);
      if (!log) throw std::runtime_error("cannot append to " + cfg.log_path.string());
      log << dump_generation_log(entry) << "\n";
    }
    write_file_atomic(cfg.checkpoint_path, engine.checkpoint());
    std::cerr << "generation " << entry.generation << ": best " << entry.best_error
              << ", best ever " << entry.best_ever_error << ", mean cues " << entry.mean_cue_count
              << "\n";
    return stop_after < 0 || entry.generation < stop_after;
  };
}

int drive(Engine& engine, const fs::path& best_path, const Backend& backend, int stop_after) {
  try {
    const RunResult result = engine.run(persisting_observer(stop_after));
    if (backend.llm) std::cerr << "requests sent: " << backend.llm->requests_sent() << "\n";
    if (!result.finished) {
      std::cerr << "stopped after generation " << engine.population().generation
                << "; resume with: clear resume --checkpoint " << engine.config().checkpoint_path.string()
                << "\n";
      return kOk;
    }
    write_file(best_path, dump_genotype(result.best_genotype, engine.config().data_item));
    std::cout << "best error " << result.best_recorded_error << " with "
              << result.best_genotype.cue_count() << " cues: "
              << render_cue_list(result.best_genotype) << "\n";
    return kOk;
  } catch (const BackendUnavailable& e) {
    if (backend.llm) std::cerr << "requests sent: " << backend.llm->requests_sent() << "\n";
    std::cerr << "backend unavailable: " << e.what() << "\n";
    // State is untouched by the failed generation, so it is safe to snapshot.
    if (engine.initialized()) write_file_atomic(engine.config().checkpoint_path, engine.checkpoint());
    if (fs::exists(engine.config().checkpoint_path))
      std::cerr << "resume with: clear resume --checkpoint "
                << engine.config().checkpoint_path.string() << "\n";
    return kBackend;
  }
}

int run_one(RunOptions opts, std::uint64_t seed, const fs::path& out_dir) {
  RunConfig& cfg = opts.config;
  cfg.seed = seed;
  cfg.mode = parse_genome_mode(opts.mode);
  fs::create_directories(out_dir);
  // Absolute paths let `resume` run from any working directory.
  cfg.log_path = fs::absolute(out_dir / "run.log");
  cfg.checkpoint_path = fs::absolute(out_dir / "checkpoint.json");
  cfg.schema_path = fs::absolute(cfg.schema_path);
  cfg.dataset_path = fs::absolute(cfg.dataset_path);
  if (!cfg.landscape_path.empty()) cfg.landscape_path = fs::absolute(cfg.landscape_path);

  const CueSchema schema = load_schema_file(cfg.schema_path);
  cfg.data_item = opts.item.empty() ? schema.data_item : parse_data_item(opts.item);
  if (cfg.backend == "oracle" && cfg.landscape_path.empty()) {
    Rng rng(mix64(seed ^ 0x6c616e64ULL));
    PlantedLandscape land = random_landscape(schema, opts.planted, rng);
    land.noise_scale = opts.noise;
    cfg.landscape_path = fs::absolute(out_dir / "landscape.json");
    write_file(cfg.landscape_path, dump_landscape(land));
  }
  cfg.validate();

  const auto records = load_records(cfg.dataset_path, cfg.current_year, cfg.backend);
  const DatasetSplit split = split_for_seed(records, cfg.data_item, seed);
  Backend backend = make_backend(cfg.backend, cfg.landscape_path, schema, cfg.retry_limit,
                                 cfg.current_year);
  Engine engine(cfg, schema, *backend.evaluator, split.train);
  write_file(cfg.log_path, run_log_header(cfg, schema) + "\n");
  std::cerr << "seed " << seed << ", " << split.train.size() << " training buildings, log "
            << cfg.log_path.string() << "\n";
  return drive(engine, out_dir / "best.genotype", backend, opts.stop_after);
}

int cmd_run(RunOptions opts) {
  if (opts.seed && !opts.seeds.empty()) throw UsageError("--seed and --seeds are exclusive");
  if (opts.config.backend == "oracle" && !opts.seed && opts.seeds.empty())
    throw UsageError("oracle runs need --seed or --seeds");
  if (!opts.seeds.empty()) {
    const auto [a, b] = parse_seed_range(opts.seeds);
    int status = kOk;
    for (std::uint64_t s = a; s <= b; ++s) {
      status = std::max(status, run_one(opts, s, opts.out_dir / ("seed-" + std::to_string(s))));
      if (status == kBackend) break;
    }
    return status;
  }
  const std::uint64_t seed = opts.seed ? *opts.seed : std::random_device{}();
  return run_one(opts, seed, opts.out_dir);
}

int cmd_resume(const fs::path& checkpoint_path) {
  const std::string text = read_file(checkpoint_path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("checkpoint: " + std::string(e.what()));
  }
  if (!doc.contains("config")) throw ParseError("checkpoint: missing config");
  RunConfig cfg = parse_config(doc["config"].dump());
  cfg.checkpoint_path = checkpoint_path;

  const CueSchema schema = load_schema_file(cfg.schema_path);
  const auto records = load_records(cfg.dataset_path, cfg.current_year, cfg.backend);
  const DatasetSplit split = split_for_seed(records, cfg.data_item, cfg.seed);
  Backend backend = make_backend(cfg.backend, cfg.landscape_path, schema, cfg.retry_limit,
                                 cfg.current_year);
  Engine engine(cfg, schema, *backend.evaluator, split.train);
  engine.resume(text);
  if (engine.finished()) {
    std::cout << "run already finished at generation " << engine.population().generation
              << "; nothing to do\n";
    return kOk;
  }
  // The log is rebuilt from the checkpoint so a crash between the log append
  // and the checkpoint write cannot leave a duplicate line.
  std::string header;
  if (fs::exists(cfg.log_path)) {
    std::ifstream in(cfg.log_path);
    std::getline(in, header);
    if (header.find("\"kind\":\"config\"") == std::string::npos) header.clear();
  }
  if (header.empty()) header = run_log_header(cfg, schema);
  std::string log = header + "\n";
  for (const auto& entry : engine.log()) log += dump_generation_log(entry) + "\n";
  write_file(cfg.log_path, log);
  return drive(engine, cfg.log_path.parent_path() / "best.genotype", backend, -1);
}

// ---------------------------------------------------------------------------
// gen-schema

int cmd_gen_schema(const std::string& item_name, const fs::path& dataset, const fs::path& out,
                   std::optional<std::uint64_t> seed, int retry_limit, int current_year,
                   const fs::path& trace_path) {
  const DataItem item = parse_data_item(item_name);
  const auto records = load_manifest_file(dataset, current_year, true);
  const std::uint64_t s = seed ? *seed : std::random_device{}();
  const DatasetSplit split = split_for_seed(records, item, s);
  HttpTransport transport(http_options_from_env());
  Rng rng(s);
  SchemaGenerationTrace trace;
  CueSchema schema;
  try {
    schema = generate_schema(split.train, item, transport, rng, retry_limit, &trace);
  } catch (const SchemaGenerationError& e) {
    std::cerr << "schema generation failed: " << e.what() << "\nlast reply:\n"
              << e.raw_response << "\n";
    return kBackend;
  }
  save_schema_file(schema, out);
  if (!trace_path.empty()) {
    nlohmann::json t{{"seed", s},
                     {"groups", trace.groups},
                     {"representatives", trace.representatives},
                     {"raw_features", trace.raw_features},
                     {"cluster_reply", trace.cluster_reply},
                     {"format_reply", trace.format_reply}};
    write_file(trace_path, t.dump(2) + "\n");
  }
  std::cout << schema.size() << " categories, "
            << [&] {
                 std::size_t n = 0;
                 for (const auto& c : schema.categories) n += c.allowed_cues.size();
                 return n;
               }()
            << " cues (seed " << s << ")\n";
  for (const auto& c : schema.categories)
    std::cout << "  " << c.name << ": " << c.allowed_cues.size() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// ablate / probe / report

struct AnalysisOptions {
  fs::path schema_path;
  fs::path dataset_path;
  std::string item;
  std::string backend = "llm";
  fs::path landscape_path;
  std::optional<std::uint64_t> seed;
  int retry_limit = 2;
  int current_year = kDefaultCurrentYear;
  fs::path out;
};

const std::vector<BuildingRecord>& pick_split(const DatasetSplit& split, const std::string& which) {
  return which == "train" ? split.train : split.test;
}

DatasetSplit analysis_split(const std::vector<BuildingRecord>& records, DataItem item,
                            std::optional<std::uint64_t> seed) {
  const bool explicit_split = std::all_of(records.begin(), records.end(),
                                          [](const BuildingRecord& r) { return r.split.has_value(); });
  if (!explicit_split && !seed)
    throw UsageError("the manifest has no explicit split; pass the run's --seed");
  return split_for_seed(records, item, seed.value_or(0));
}

int cmd_ablate(const AnalysisOptions& o, const fs::path& genotype_path, const std::string& which) {
  const CueSchema schema = load_schema_file(o.schema_path);
  const DataItem item = o.item.empty() ? schema.data_item : parse_data_item(o.item);
  const Genotype g = load_genotype(read_file(genotype_path), schema);
  const auto records = load_records(o.dataset_path, o.current_year, o.backend);
  const DatasetSplit split = analysis_split(records, item, o.seed);
  Backend backend = make_backend(o.backend, o.landscape_path, schema, o.retry_limit, o.current_year);
  const AblationReport rep = ablate(g, schema, *backend.evaluator, pick_split(split, which), item);
  if (!o.out.empty()) write_file(o.out, ablation_csv(rep));
  else std::cout << ablation_csv(rep);
  std::cout << ablation_text(rep);
  return kOk;
}

int cmd_probe(const AnalysisOptions& o, const std::string& cue_label, const std::string& category,
              const std::string& building_id, std::size_t n) {
  const CueSchema schema = load_schema_file(o.schema_path);
  const DataItem item = o.item.empty() ? schema.data_item : parse_data_item(o.item);
  const Cue cue(cue_label);
  std::optional<std::size_t> index;
  for (std::size_t x = 0; x < schema.size(); ++x) {
    const auto& c = schema.categories[x];
    if (!category.empty() ? c.name == category : c.allows(cue)) {
      if (index) throw UsageError("cue '" + cue.label() + "' appears in several categories; pass --category");
      index = x;
    }
  }
  if (!index) throw UsageError("no category of the schema holds cue '" + cue.label() + "'");
  if (!schema.categories[*index].allows(cue))
    throw UsageError("category '" + category + "' does not hold cue '" + cue.label() + "'");
  const auto records = load_records(o.dataset_path, o.current_year, o.backend);
  const auto it = std::find_if(records.begin(), records.end(),
                               [&](const BuildingRecord& r) { return r.id == building_id; });
  if (it == records.end()) throw UsageError("no building '" + building_id + "' in the manifest");
  Backend backend = make_backend(o.backend, o.landscape_path, schema, o.retry_limit, o.current_year);
  const ConsistencyReport rep =
      consistency_probe(cue, *index, schema, *it, *backend.evaluator, item, n);
  if (!o.out.empty()) {
    nlohmann::json j{{"cue", rep.cue.label()},
                     {"building", building_id},
                     {"samples", rep.samples},
                     {"failures", rep.failures},
                     {"disagreement_rate", rep.disagreement_rate},
                     {"cv", rep.cv ? nlohmann::json(*rep.cv) : nlohmann::json(nullptr)},
                     {"responses", rep.responses},
                     {"coded", rep.coded}};
    write_file(o.out, j.dump(2) + "\n");
  }
  std::cout << consistency_text(rep);
  return kOk;
}

int cmd_report(const std::vector<fs::path>& logs, const fs::path& out) {
  std::vector<RunLog> parsed;
  for (const auto& p : logs) {
    try {
      parsed.push_back(load_run_log(p));
    } catch (const ParseError& e) {
      throw ParseError(p.string() + ": " + e.what());
    }
    parsed.back().label = p.string();
  }
  const RunReport rep = report(parsed);
  if (out.empty()) {
    std::cout << rep.table_csv;
    if (!rep.comparison_csv.empty()) std::cout << "\n" << rep.comparison_csv;
  } else {
    fs::path table = out;
    table += ".csv";
    write_file(table, rep.table_csv);
    if (!rep.comparison_csv.empty()) {
      fs::path cmp = out;
      cmp += "_comparison.csv";
      write_file(cmp, rep.comparison_csv);
    }
  }
  std::cout << rep.summary;
  return kOk;
}

void add_backend_options(CLI::App* cmd, std::string& backend, fs::path& landscape) {
  cmd->add_option("--backend", backend, "Evaluation backend")
      ->check(CLI::IsMember({"llm", "oracle"}))
      ->capture_default_str();
  cmd->add_option("--landscape", landscape, "Planted landscape for the oracle backend");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolve prompt cues for image-based building data extraction"};
  app.set_config("--config", "", "TOML or INI file with option defaults");
  app.require_subcommand(1);
  const auto items = item_names();

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Evolve a cue set");
  run_cmd->add_option("--schema", run.config.schema_path, "Cue schema file")->required();
  run_cmd->add_option("--dataset", run.config.dataset_path, "Dataset manifest")->required();
  run_cmd->add_option("--item", run.item, "Data item (defaults to the schema's)")
      ->check(CLI::IsMember(items));
  run_cmd->add_option("--mode", run.mode, "Genome encoding")
      ->check(CLI::IsMember({"fixed", "variable"}))
      ->capture_default_str();
  add_backend_options(run_cmd, run.config.backend, run.config.landscape_path);
  run_cmd->add_option("--seed", run.seed, "Random seed (required for oracle runs)");
  run_cmd->add_option("--seeds", run.seeds, "Seed range a..b, one run per seed");
  run_cmd->add_option("--population", run.config.population_size)->capture_default_str();
  run_cmd->add_option("--generations", run.config.generations)->capture_default_str();
  run_cmd->add_option("--parent-fraction", run.config.parent_fraction)->capture_default_str();
  run_cmd->add_option("--elites", run.config.elites)->capture_default_str();
  run_cmd->add_option("--mutation-ops", run.config.mutation_ops_per_child)->capture_default_str();
  run_cmd->add_option("--concurrency", run.config.evaluation_concurrency)->capture_default_str();
  run_cmd->add_option("--retry-limit", run.config.retry_limit)->capture_default_str();
  run_cmd->add_option("--current-year", run.config.current_year)->capture_default_str();
  run_cmd->add_option("--planted", run.planted, "Planted cues when no landscape is given")
      ->capture_default_str();
  run_cmd->add_option("--noise", run.noise, "Noise scale when no landscape is given")
      ->capture_default_str();
  run_cmd->add_option("--out-dir", run.out_dir, "Directory for log, checkpoint and best genotype")
      ->capture_default_str();
  run_cmd->add_option("--stop-after", run.stop_after, "Stop (resumably) after this generation");

  fs::path checkpoint;
  auto* resume_cmd = app.add_subcommand("resume", "Continue a run from its checkpoint");
  resume_cmd->add_option("--checkpoint", checkpoint)->required();

  std::string gen_item;
  fs::path gen_dataset, gen_out, gen_trace;
  std::optional<std::uint64_t> gen_seed;
  int gen_retry = 2, gen_year = kDefaultCurrentYear;
  auto* gen_cmd = app.add_subcommand("gen-schema", "Build a cue schema from training photos");
  gen_cmd->add_option("--item", gen_item)->required()->check(CLI::IsMember(items));
  gen_cmd->add_option("--dataset", gen_dataset)->required();
  gen_cmd->add_option("--out", gen_out)->required();
  gen_cmd->add_option("--seed", gen_seed);
  gen_cmd->add_option("--retry-limit", gen_retry)->capture_default_str();
  gen_cmd->add_option("--current-year", gen_year)->capture_default_str();
  gen_cmd->add_option("--trace", gen_trace, "Write intermediate replies here");

  AnalysisOptions ab;
  fs::path genotype_path;
  std::string which = "test";
  auto* ablate_cmd = app.add_subcommand("ablate", "Remove each cue in turn and re-score");
  ablate_cmd->add_option("--schema", ab.schema_path)->required();
  ablate_cmd->add_option("--dataset", ab.dataset_path)->required();
  ablate_cmd->add_option("--genotype", genotype_path)->required();
  ablate_cmd->add_option("--split", which)->check(CLI::IsMember({"train", "test"}))->capture_default_str();
  ablate_cmd->add_option("--item", ab.item)->check(CLI::IsMember(items));
  add_backend_options(ablate_cmd, ab.backend, ab.landscape_path);
  ablate_cmd->add_option("--seed", ab.seed, "Seed of the run the genotype came from");
  ablate_cmd->add_option("--retry-limit", ab.retry_limit)->capture_default_str();
  ablate_cmd->add_option("--current-year", ab.current_year)->capture_default_str();
  ablate_cmd->add_option("--out", ab.out, "CSV output");

  AnalysisOptions pr;
  std::string cue_label, category, building_id;
  std::size_t repeats = 10;
  auto* probe_cmd = app.add_subcommand("probe", "Repeat one cue on one building");
  probe_cmd->add_option("--schema", pr.schema_path)->required();
  probe_cmd->add_option("--dataset", pr.dataset_path)->required();
  probe_cmd->add_option("--cue", cue_label)->required();
  probe_cmd->add_option("--category", category);
  probe_cmd->add_option("--building", building_id)->required();
  probe_cmd->add_option("--n", repeats)->check(CLI::Range(std::size_t{2}, std::size_t{100000}))->capture_default_str();
  probe_cmd->add_option("--item", pr.item)->check(CLI::IsMember(items));
  add_backend_options(probe_cmd, pr.backend, pr.landscape_path);
  probe_cmd->add_option("--retry-limit", pr.retry_limit)->capture_default_str();
  probe_cmd->add_option("--current-year", pr.current_year)->capture_default_str();
  probe_cmd->add_option("--out", pr.out, "JSON output");

  std::vector<fs::path> logs;
  fs::path report_out;
  auto* report_cmd = app.add_subcommand("report", "Summarize one or two run logs");
  report_cmd->add_option("--log", logs)->required();
  report_cmd->add_option("--out", report_out, "Output prefix for CSV tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*resume_cmd) return cmd_resume(checkpoint);
    if (*gen_cmd)
      return cmd_gen_schema(gen_item, gen_dataset, gen_out, gen_seed, gen_retry, gen_year, gen_trace);
    if (*ablate_cmd) return cmd_ablate(ab, genotype_path, which);
    if (*probe_cmd) return cmd_probe(pr, cue_label, category, building_id, repeats);
    if (*report_cmd) return cmd_report(logs, report_out);
  } catch (const UsageError& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return kUsage;
  } catch (const DigestMismatch& e) {
    std::cerr << "refusing to resume: " << e.what() << "\n";
    return kIo;
  } catch (const AuthError& e) {
    std::cerr << "credentials: " << e.what() << "\n";
    return kIo;
  } catch (const BackendUnavailable& e) {
    std::cerr << "backend unavailable: " << e.what() << "\n";
    return kBackend;
  } catch (const PermanentFailure& e) {
    std::cerr << "evaluation failed: " << e.what() << "\n";
    return kBackend;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  }
  return kUsage;
}
