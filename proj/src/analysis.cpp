#include "clear/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "clear/errors.hpp"
#include "clear/fitness.hpp"

namespace clear {

namespace {

struct SplitScore {
  double total = 0;
  std::size_t failures = 0;
};

SplitScore score_split(const Genotype& g, Evaluator& evaluator,
                       const std::vector<BuildingRecord>& split, DataItem item) {
  const std::string key = canonical_key(g);
  std::vector<double> errors;
  SplitScore out;
  for (const auto& b : split) {
    try {
      errors.push_back(building_error(item, evaluator.evaluate({g, key, b, item, 0, 0}), b.truth));
    } catch (const PermanentFailure&) {
      errors.push_back(failure_penalty(item));
      ++out.failures;
    }
  }
  out.total = aggregate_fitness(errors);
  return out;
}

std::string fmt(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double pop_stddev(std::span<const double> v) {
  const double m = mean_of(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace

AblationReport ablate(const Genotype& g, const CueSchema& schema, Evaluator& evaluator,
                      const std::vector<BuildingRecord>& split, DataItem item) {
  if (g.cue_count() == 0) throw ContractViolation("cannot ablate an empty genotype");
  if (split.empty()) throw ContractViolation("ablation split is empty");
  if (g.chromosomes.size() != schema.size())
    throw ContractViolation("genotype does not match the schema");

  const SplitScore base = score_split(g, evaluator, split, item);
  if (base.failures == split.size())
    throw PermanentFailure("no estimate could be obtained for the full genotype");

  AblationReport report;
  report.base_error = base.total;
  std::vector<double> kept;
  for (std::size_t x = 0; x < g.chromosomes.size(); ++x) {
    for (std::size_t j = 0; j < g.chromosomes[x].size(); ++j) {
      Genotype reduced = g;
      reduced.chromosomes[x].erase(reduced.chromosomes[x].begin() + static_cast<std::ptrdiff_t>(j));
      const SplitScore s = score_split(reduced, evaluator, split, item);
      AblationRow row{g.chromosomes[x][j], x, schema.categories[x].name, s.total,
                      s.total - base.total, s.failures > 0};
      if (row.failed)
        ++report.failed_rows;
      else
        kept.push_back(row.new_error);
      report.rows.push_back(std::move(row));
    }
  }
  if (!kept.empty()) {
    report.mean_new_error = mean_of(kept);
    report.stddev = pop_stddev(kept);
  }
  return report;
}

std::string ablation_csv(const AblationReport& report) {
  std::string out = "category,cue,new_error,delta,failed\n";
  for (const auto& r : report.rows)
    out += csv_field(r.category_name) + "," + csv_field(r.removed.label()) + "," +
           fmt(r.new_error) + "," + fmt(r.delta) + "," + (r.failed ? "1" : "0") + "\n";
  return out;
}

std::string ablation_text(const AblationReport& report) {
  std::ostringstream out;
  out << "base error: " << report.base_error << "\n";
  out << "cues removed: " << report.rows.size() << "\n";
  out << "mean new error: " << report.mean_new_error << " (sd " << report.stddev << ")\n";
  const auto worse = std::count_if(report.rows.begin(), report.rows.end(),
                                   [](const AblationRow& r) { return !r.failed && r.delta > 0; });
  out << "removals that made it worse: " << worse << "\n";
  if (report.failed_rows) out << "warning: " << report.failed_rows << " rows failed and were left out\n";
  return out.str();
}

std::optional<double> cv(std::span<const double> values) {
  if (values.empty()) throw ContractViolation("cv of an empty sample");
  const double m = mean_of(values);
  if (m == 0) return std::nullopt;
  return pop_stddev(values) / m;
}

double disagreement_rate(std::span<const std::string> samples) {
  if (samples.empty()) throw ContractViolation("disagreement rate of an empty sample");
  std::map<std::string, std::size_t> counts;
  std::vector<std::string> order;
  for (const auto& s : samples)
    if (counts[s]++ == 0) order.push_back(s);
  std::size_t modal = 0;
  for (const auto& s : order) modal = std::max(modal, counts[s]);
  return static_cast<double>(samples.size() - modal) / static_cast<double>(samples.size());
}

double code_response(DataItem item, const DataEstimate& estimate, const GroundTruth& truth) {
  if (!estimate_matches(estimate, item)) throw ContractViolation("estimate does not fit the item");
  switch (item) {
    case DataItem::heating:
    case DataItem::windows: return building_error(item, estimate, truth);
    case DataItem::building_age: {
      const auto& r = std::get<YearRange>(estimate);
      return (r.start + r.end) / 2.0;
    }
    case DataItem::lighting: return std::get<LightingPercent>(estimate).value;
    case DataItem::windows_uvalue: return std::get<UValue>(estimate).value;
    case DataItem::energy: {
      const auto& r = std::get<EnergyRange>(estimate);
      return (r.start + r.end) / 2.0;
    }
  }
  throw ContractViolation("unknown data item");
}

ConsistencyReport consistency_probe(const Cue& cue, std::size_t category, const CueSchema& schema,
                                    const BuildingRecord& building, Evaluator& evaluator,
                                    DataItem item, std::size_t n) {
  if (n < 2) throw ContractViolation("a consistency probe needs at least two samples");
  if (category >= schema.size()) throw ContractViolation("category outside the schema");
  Genotype g;
  g.chromosomes.resize(schema.size());
  g.chromosomes[category].push_back(cue);
  const std::string key = canonical_key(g);

  ConsistencyReport report;
  report.cue = cue;
  for (std::size_t i = 0; i < n; ++i) {
    try {
      const DataEstimate e = evaluator.evaluate({g, key, building, item, i, 0});
      report.responses.push_back(render_estimate(e));
      report.coded.push_back(code_response(item, e, building.truth));
    } catch (const PermanentFailure&) {
      ++report.failures;
    }
  }
  if (report.responses.empty())
    throw PermanentFailure("every probe sample failed for cue '" + cue.label() + "'");
  report.samples = report.responses.size();
  report.disagreement_rate = disagreement_rate(report.responses);
  report.cv = cv(report.coded);
  return report;
}

std::string consistency_text(const ConsistencyReport& report) {
  std::ostringstream out;
  out << "cue: " << report.cue.label() << "\n";
  out << "samples: " << report.samples;
  if (report.failures) out << " (" << report.failures << " failed)";
  out << "\ndisagreement rate: " << report.disagreement_rate << "\n";
  out << "cv: " << (report.cv ? fmt(*report.cv) : std::string("undefined (mean 0)")) << "\n";
  out << "responses:";
  for (const auto& r : report.responses) out << " " << r;
  out << "\n";
  return out.str();
}

RunLog parse_run_log(std::string_view text, std::string label) {
  RunLog log;
  log.label = std::move(label);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const auto fail = [&](const std::string& what) {
      return ParseError("run log line " + std::to_string(line_no) + ": " + what);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw fail(e.what());
    }
    if (!j.is_object()) throw fail("expected an object");
    const std::string kind = j.value("kind", "");
    if (kind == "config") {
      log.header = std::string(line);
    } else if (kind == "generation") {
      try {
        log.generations.push_back(parse_generation_log(line));
      } catch (const ParseError& e) {
        throw fail(e.what());
      }
    } else {
      throw fail("unknown record kind '" + kind + "'");
    }
  }
  if (log.generations.empty()) throw ParseError("run log holds no generations");
  return log;
}

RunLog load_run_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_log(buf.str(), path.stem().string());
}

RunReport report(const std::vector<RunLog>& logs) {
  if (logs.empty()) throw ContractViolation("report needs at least one run log");
  RunReport out;
  std::ostringstream table;
  table << "run,generation,best_error,best_ever_error,mean_error,fitness_cv,mean_cue_count,"
           "category_cue_counts,failed_evaluations,errors\n";
  auto joined = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + fmt(v[i]);
    return s;
  };
  auto fitness_cv = [](const GenerationLog& g) {
    const auto c = cv(g.errors);
    return c ? fmt(*c) : std::string();
  };
  std::ostringstream summary;
  for (const auto& log : logs) {
    for (const auto& g : log.generations)
      table << csv_field(log.label) << "," << g.generation << "," << g.best_error << ","
            << g.best_ever_error << "," << mean_of(g.errors) << "," << fitness_cv(g) << ","
            << g.mean_cue_count << "," << joined(g.category_cue_counts) << ","
            << g.failed_evaluations << "," << joined(g.errors) << "\n";
    const auto& first = log.generations.front();
    const auto& last = log.generations.back();
    std::size_t failures = 0;
    for (const auto& g : log.generations) failures += g.failed_evaluations;
    summary << (log.label.empty() ? std::string("run") : log.label) << ": "
            << log.generations.size() << " generations, best error " << first.best_error
            << " -> " << last.best_error << ", best ever " << last.best_ever_error
            << ", mean cues " << first.mean_cue_count << " -> " << last.mean_cue_count;
    if (failures) summary << ", " << failures << " failed evaluations";
    summary << "\n";
  }
  out.table_csv = table.str();
  out.summary = summary.str();

  if (logs.size() == 2) {
    const auto& a = logs[0];
    const auto& b = logs[1];
    std::ostringstream cmp;
    cmp << "generation,best_error_a,best_error_b,best_ever_a,best_ever_b,fitness_cv_a,fitness_cv_b\n";
    const std::size_t rows = std::max(a.generations.size(), b.generations.size());
    for (std::size_t i = 0; i < rows; ++i) {
      const GenerationLog* ga = i < a.generations.size() ? &a.generations[i] : nullptr;
      const GenerationLog* gb = i < b.generations.size() ? &b.generations[i] : nullptr;
      cmp << (ga ? ga->generation : gb->generation) << ","
          << (ga ? fmt(ga->best_error) : "") << "," << (gb ? fmt(gb->best_error) : "") << ","
          << (ga ? fmt(ga->best_ever_error) : "") << "," << (gb ? fmt(gb->best_ever_error) : "") << ","
          << (ga ? fitness_cv(*ga) : "") << "," << (gb ? fitness_cv(*gb) : "") << "\n";
    }
    out.comparison_csv = cmp.str();
  }
  return out;
}

}  // namespace clear
