#include "clear/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "clear/errors.hpp"
#include "clear/parsing.hpp"

namespace clear {

using json = nlohmann::json;

namespace {

constexpr std::string_view kSetNames[] = {"building", "heating", "windows", "lighting"};

ImageSet parse_image_set(std::string_view text, const std::string& path) {
  for (std::size_t i = 0; i < std::size(kSetNames); ++i)
    if (kSetNames[i] == text) return static_cast<ImageSet>(i);
  throw ParseError(path + ": unknown image set '" + std::string(text) + "'");
}

YearRange parse_truth_age(const json& node, int current_year, const std::string& path) {
  if (node.is_number_integer()) return YearRange::exact(node.get<int>());
  if (!node.is_string()) throw ParseError(path + ": expected a year, range or period");
  try {
    return parse_age(node.get<std::string>(), current_year);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

double parse_truth_lighting(const json& node, const std::string& path) {
  if (node.is_number()) return node.get<double>();
  if (!node.is_string()) throw ParseError(path + ": expected a percentage");
  try {
    return parse_lighting(node.get<std::string>());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

template <typename F>
auto parse_field(F&& f, const std::string& path) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

BuildingRecord parse_record(const json& node, const std::filesystem::path& base_dir,
                            int current_year, bool check_images, const std::string& path) {
  if (!node.is_object()) throw ParseError(path + ": expected an object");
  BuildingRecord rec;
  if (!node.contains("id") || !node["id"].is_string()) throw ParseError(path + ".id: missing string");
  rec.id = node["id"].get<std::string>();
  if (node.contains("region")) rec.region = node["region"].get<std::string>();
  if (node.contains("image_sets")) {
    const json& sets = node["image_sets"];
    if (!sets.is_object()) throw ParseError(path + ".image_sets: expected an object");
    for (const auto& [name, files] : sets.items()) {
      const std::string set_path = path + ".image_sets." + name;
      const ImageSet set = parse_image_set(name, set_path);
      if (!files.is_array()) throw ParseError(set_path + ": expected an array");
      auto& list = rec.image_sets[set];
      for (const auto& f : files) {
        std::filesystem::path p = f.get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        if (check_images && !std::filesystem::exists(p))
          throw ValidationError(set_path + ": image not found: " + p.string());
        list.push_back(std::move(p));
      }
    }
  }
  if (node.contains("truth")) {
    const json& t = node["truth"];
    const std::string tp = path + ".truth";
    if (t.contains("age")) rec.truth.age = parse_truth_age(t["age"], current_year, tp + ".age");
    if (t.contains("lighting_pct"))
      rec.truth.lighting_pct = parse_truth_lighting(t["lighting_pct"], tp + ".lighting_pct");
    if (t.contains("heating"))
      rec.truth.heating = parse_field([&] { return parse_heating(t["heating"].get<std::string>()); },
                                      tp + ".heating");
    if (t.contains("windows"))
      rec.truth.windows = parse_field([&] { return parse_windows(t["windows"].get<std::string>()); },
                                      tp + ".windows");
    if (t.contains("energy_kwh_m2")) {
      const double e = parse_field([&] { return t["energy_kwh_m2"].get<double>(); },
                                   tp + ".energy_kwh_m2");
      if (e <= 0) throw ValidationError(tp + ".energy_kwh_m2: must be positive");
      rec.truth.energy_kwh_m2 = e;
    }
  }
  if (node.contains("split")) {
    const std::string s = node["split"].get<std::string>();
    if (s == "train") rec.split = Split::train;
    else if (s == "test") rec.split = Split::test;
    else throw ParseError(path + ".split: expected 'train' or 'test'");
  }
  return rec;
}

}  // namespace

std::string_view to_string(ImageSet set) { return kSetNames[static_cast<int>(set)]; }

ImageSet image_set_for(DataItem item) {
  switch (item) {
    case DataItem::heating: return ImageSet::heating;
    case DataItem::windows:
    case DataItem::windows_uvalue: return ImageSet::windows;
    case DataItem::lighting: return ImageSet::lighting;
    default: return ImageSet::building;
  }
}

const std::vector<std::filesystem::path>& BuildingRecord::images_for(DataItem item) const {
  static const std::vector<std::filesystem::path> none;
  const auto it = image_sets.find(image_set_for(item));
  return it == image_sets.end() ? none : it->second;
}

std::vector<BuildingRecord> load_manifest(std::string_view document,
                                          const std::filesystem::path& base_dir,
                                          int current_year, bool check_images) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("$: ") + e.what());
  }
  if (!doc.is_array()) throw ParseError("$: manifest must be an array of buildings");
  std::vector<BuildingRecord> records;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string path = "$[" + std::to_string(i) + "]";
    try {
      records.push_back(parse_record(doc[i], base_dir, current_year, check_images, path));
    } catch (const json::exception& e) {
      throw ParseError(path + ": " + e.what());
    }
    if (!ids.insert(records.back().id).second)
      throw ValidationError(path + ": duplicate building id '" + records.back().id + "'");
  }
  return records;
}

std::vector<BuildingRecord> load_manifest_file(const std::filesystem::path& path, int current_year,
                                               bool check_images) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_manifest(buf.str(), path.parent_path(), current_year, check_images);
}

std::string dump_manifest(const std::vector<BuildingRecord>& records) {
  json doc = json::array();
  for (const auto& r : records) {
    json node{{"id", r.id}, {"region", r.region}};
    json sets = json::object();
    for (const auto& [set, files] : r.image_sets) {
      json list = json::array();
      for (const auto& f : files) list.push_back(f.string());
      sets[std::string(to_string(set))] = list;
    }
    node["image_sets"] = sets;
    json truth = json::object();
    if (r.truth.age)
      truth["age"] = r.truth.age->is_exact()
                         ? std::to_string(r.truth.age->start)
                         : std::to_string(r.truth.age->start) + "-" + std::to_string(r.truth.age->end);
    if (r.truth.lighting_pct) truth["lighting_pct"] = *r.truth.lighting_pct;
    if (r.truth.heating) truth["heating"] = to_string(*r.truth.heating);
    if (r.truth.windows) truth["windows"] = to_string(*r.truth.windows);
    if (r.truth.energy_kwh_m2) truth["energy_kwh_m2"] = *r.truth.energy_kwh_m2;
    node["truth"] = truth;
    if (r.split) node["split"] = *r.split == Split::train ? "train" : "test";
    doc.push_back(node);
  }
  return doc.dump(2) + "\n";
}

int value_group(DataItem item, const GroundTruth& truth) {
  if (!truth.has(item)) throw ContractViolation("building lacks truth for " + std::string(to_string(item)));
  switch (item) {
    case DataItem::building_age: {
      constexpr int bands[] = {1900, 1930, 1950, 1970, 1990, 2020};
      const int year = truth.age->end;
      int g = 0;
      while (g < 6 && year >= bands[g]) ++g;
      return g;
    }
    case DataItem::lighting:
      return *truth.lighting_pct <= 0 ? 0 : (*truth.lighting_pct >= 100 ? 1 : 2);
    case DataItem::heating:
      switch (*truth.heating) {
        case HeatingClass::water_radiators: return 0;
        case HeatingClass::electric_panel:
        case HeatingClass::electric_storage: return 1;
        default: return 2;
      }
    case DataItem::windows:
    case DataItem::windows_uvalue: return static_cast<int>(*truth.windows);
    case DataItem::energy:
      return *truth.energy_kwh_m2 < 100 ? 0 : (*truth.energy_kwh_m2 <= 200 ? 1 : 2);
  }
  return 0;
}

DatasetSplit split_dataset(const std::vector<BuildingRecord>& records, DataItem item, Rng& rng,
                           double train_fraction) {
  DatasetSplit out;
  const bool explicit_split =
      !records.empty() && std::all_of(records.begin(), records.end(),
                                      [](const BuildingRecord& r) { return r.split.has_value(); });
  if (explicit_split) {
    for (const auto& r : records) (*r.split == Split::train ? out.train : out.test).push_back(r);
    return out;
  }
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < records.size(); ++i)
    groups[value_group(item, records[i].truth)].push_back(i);
  std::vector<bool> to_train(records.size(), false);
  for (auto& [g, members] : groups) {
    for (std::size_t i = members.size(); i > 1; --i) std::swap(members[i - 1], members[rng.index(i)]);
    std::size_t n_train = static_cast<std::size_t>(std::lround(train_fraction * members.size()));
    if (members.size() >= 2) n_train = std::clamp<std::size_t>(n_train, 1, members.size() - 1);
    for (std::size_t k = 0; k < n_train; ++k) to_train[members[k]] = true;
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    BuildingRecord r = records[i];
    r.split = to_train[i] ? Split::train : Split::test;
    (to_train[i] ? out.train : out.test).push_back(std::move(r));
  }
  return out;
}

DatasetSplit split_for_seed(const std::vector<BuildingRecord>& records, DataItem item,
                            std::uint64_t seed) {
  Rng rng(mix64(seed ^ 0x73706c6974ULL));
  return split_dataset(records, item, rng);
}

}  // namespace clear
