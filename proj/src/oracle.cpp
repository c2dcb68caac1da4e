#include "clear/oracle.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include <json.hpp>

#include "clear/errors.hpp"

namespace clear {

using json = nlohmann::json;

double PlantedLandscape::total_benefit() const {
  double total = 0;
  for (const auto& p : planted) total += p.benefit;
  return total;
}

double PlantedLandscape::effective_base() const {
  return base_error < 0 ? total_benefit() : base_error;
}

void PlantedLandscape::validate(const CueSchema& schema) const {
  if (distractor_penalty <= 0) throw ValidationError("distractor penalty must be positive");
  if (noise_scale < 0) throw ValidationError("noise scale must be non-negative");
  if (base_error >= 0 && base_error < total_benefit())
    throw ValidationError("base error below the total planted benefit");
  std::set<std::pair<std::size_t, std::string>> seen;
  for (const auto& p : planted) {
    if (p.category >= schema.size())
      throw ValidationError("planted cue '" + p.label + "' names category " +
                            std::to_string(p.category) + " outside the schema");
    if (!schema.categories[p.category].allows(Cue(p.label)))
      throw ValidationError("planted cue '" + p.label + "' is not in category '" +
                            schema.categories[p.category].name + "'");
    if (p.benefit <= distractor_penalty)
      throw ValidationError("planted cue '" + p.label + "' benefit must exceed the distractor penalty");
    if (!seen.emplace(p.category, p.label).second)
      throw ValidationError("planted cue '" + p.label + "' listed twice");
  }
}

Genotype PlantedLandscape::optimum(const CueSchema& schema) const {
  Genotype g;
  g.chromosomes.resize(schema.size());
  for (const auto& p : planted) g.chromosomes.at(p.category).emplace_back(p.label);
  return g;
}

double landscape_noise(const PlantedLandscape& landscape, const std::string& key,
                       const std::string& building_id, std::uint64_t eval_counter) {
  if (landscape.noise_scale == 0) return 0.0;
  std::uint64_t h = mix64(landscape.seed ^ fnv1a(key));
  h = mix64(h ^ fnv1a(building_id));
  h = mix64(h ^ eval_counter);
  // Box-Muller on two decorrelated uniforms in (0, 1].
  const double u1 = (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(mix64(h) >> 11) * 0x1.0p-53;
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return landscape.noise_scale * z;
}

double oracle_score(const PlantedLandscape& landscape, const Genotype& g, const std::string& key,
                    const std::string& building_id, std::uint64_t eval_counter) {
  double score = landscape.effective_base();
  for (std::size_t x = 0; x < g.chromosomes.size(); ++x)
    for (const auto& cue : g.chromosomes[x]) {
      bool planted = false;
      for (const auto& p : landscape.planted)
        if (p.category == x && p.label == cue.label()) {
          score -= p.benefit;
          planted = true;
          break;
        }
      if (!planted) score += landscape.distractor_penalty;
    }
  score += landscape_noise(landscape, key, building_id, eval_counter);
  return std::max(0.0, score);
}

DataEstimate estimate_from_score(DataItem item, double score, const GroundTruth& truth) {
  if (!truth.has(item)) throw ContractViolation("building lacks truth for " + std::string(to_string(item)));
  switch (item) {
    case DataItem::building_age: {
      const int year = truth.age->end + static_cast<int>(std::lround(score));
      return YearRange::exact(year);
    }
    case DataItem::lighting: {
      const double t = *truth.lighting_pct;
      if (t + score <= 100) return LightingPercent{t + score};
      if (t - score >= 0) return LightingPercent{t - score};
      return LightingPercent{t >= 50 ? 0.0 : 100.0};
    }
    case DataItem::heating: {
      const HeatingClass t = *truth.heating;
      if (score < 1) return t;
      HeatingClass near = t, far = HeatingClass::water_radiators;
      switch (t) {
        case HeatingClass::underfloor: near = HeatingClass::warm_air; break;
        case HeatingClass::warm_air: near = HeatingClass::underfloor; break;
        case HeatingClass::electric_panel: near = HeatingClass::electric_storage; break;
        case HeatingClass::electric_storage: near = HeatingClass::electric_panel; break;
        case HeatingClass::water_radiators:
          near = HeatingClass::underfloor;
          far = HeatingClass::underfloor;
          break;
      }
      return score < 2 ? near : far;
    }
    case DataItem::windows: {
      const WindowClass t = *truth.windows;
      if (score < 1) return t;
      switch (t) {
        case WindowClass::single:
          return score < 2 ? WindowClass::double_glazed : WindowClass::high_efficiency;
        case WindowClass::high_efficiency:
          return score < 2 ? WindowClass::double_glazed : WindowClass::single;
        case WindowClass::double_glazed: return WindowClass::single;
      }
      return t;
    }
    case DataItem::windows_uvalue: return UValue{uvalue_target(*truth.windows) + score};
    case DataItem::energy: {
      const double v = *truth.energy_kwh_m2 + score;
      return EnergyRange{v, v};
    }
  }
  throw ContractViolation("unknown data item");
}

DataEstimate oracle_evaluate(const Genotype& g, const BuildingRecord& building, DataItem item,
                             const PlantedLandscape& landscape, std::uint64_t eval_counter) {
  const std::string key = canonical_key(g);
  return estimate_from_score(item, oracle_score(landscape, g, key, building.id, eval_counter),
                             building.truth);
}

DataEstimate OracleEvaluator::evaluate(const EvaluationRequest& request) {
  const double score = oracle_score(landscape_, request.genotype, request.key, request.building.id,
                                    request.eval_counter);
  return estimate_from_score(request.item, score, request.building.truth);
}

PlantedLandscape random_landscape(const CueSchema& schema, std::size_t count, Rng& rng,
                                  double min_benefit, double max_benefit) {
  std::size_t total = 0;
  for (const auto& c : schema.categories) total += c.allowed_cues.size();
  if (count > total) throw ContractViolation("cannot plant more cues than the schema holds");
  PlantedLandscape land;
  land.seed = rng.next();
  std::set<std::pair<std::size_t, std::size_t>> used;
  const auto span = static_cast<std::size_t>(std::max(0.0, max_benefit - min_benefit)) + 1;
  while (land.planted.size() < count) {
    const std::size_t x = rng.index(schema.size());
    const std::size_t j = rng.index(schema.categories[x].allowed_cues.size());
    if (!used.emplace(x, j).second) continue;
    land.planted.push_back({x, schema.categories[x].allowed_cues[j].label(),
                            min_benefit + static_cast<double>(rng.index(span))});
  }
  return land;
}

std::string dump_landscape(const PlantedLandscape& landscape) {
  json doc;
  doc["planted"] = json::array();
  for (const auto& p : landscape.planted)
    doc["planted"].push_back({{"category", p.category}, {"cue", p.label}, {"benefit", p.benefit}});
  doc["distractor_penalty"] = landscape.distractor_penalty;
  if (landscape.base_error >= 0) doc["base_error"] = landscape.base_error;
  doc["noise_scale"] = landscape.noise_scale;
  doc["seed"] = landscape.seed;
  return doc.dump(2) + "\n";
}

PlantedLandscape load_landscape(std::string_view document) {
  PlantedLandscape land;
  try {
    const json doc = json::parse(document);
    for (const auto& p : doc.at("planted"))
      land.planted.push_back(
          {p.at("category").get<std::size_t>(), p.at("cue").get<std::string>(), p.at("benefit").get<double>()});
    land.distractor_penalty = doc.value("distractor_penalty", 1.0);
    land.base_error = doc.value("base_error", -1.0);
    land.noise_scale = doc.value("noise_scale", 0.0);
    land.seed = doc.value("seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw ParseError(std::string("landscape: ") + e.what());
  }
  return land;
}

}  // namespace clear
