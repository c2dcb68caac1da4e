#include "clear/schema.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "clear/errors.hpp"

namespace clear {

using json = nlohmann::json;

namespace {

constexpr std::string_view kItemNames[] = {"building_age", "lighting",       "heating",
                                           "windows",      "windows_uvalue", "energy"};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

const json& require(const json& node, const char* field, const std::string& path) {
  if (!node.is_object() || !node.contains(field))
    throw ParseError(path + ": missing field '" + field + "'");
  return node.at(field);
}

std::string require_string(const json& node, const std::string& path) {
  if (!node.is_string()) throw ParseError(path + ": expected a string");
  return node.get<std::string>();
}

}  // namespace

std::string trim(std::string_view text) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto first = text.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(ws);
  return std::string(text.substr(first, last - first + 1));
}

std::string_view to_string(DataItem item) { return kItemNames[static_cast<int>(item)]; }

DataItem parse_data_item(std::string_view text) {
  for (std::size_t i = 0; i < std::size(kItemNames); ++i)
    if (kItemNames[i] == text) return static_cast<DataItem>(i);
  throw ParseError("unknown data item '" + std::string(text) + "'");
}

const std::vector<DataItem>& all_data_items() {
  static const std::vector<DataItem> items = {DataItem::building_age, DataItem::lighting,
                                              DataItem::heating,      DataItem::windows,
                                              DataItem::windows_uvalue, DataItem::energy};
  return items;
}

bool schema_serves(DataItem schema_item, DataItem item) {
  const auto family = [](DataItem d) { return d == DataItem::windows_uvalue ? DataItem::windows : d; };
  return family(schema_item) == family(item);
}

std::string_view to_string(GenomeMode mode) {
  return mode == GenomeMode::fixed ? "fixed" : "variable";
}

GenomeMode parse_genome_mode(std::string_view text) {
  if (text == "fixed") return GenomeMode::fixed;
  if (text == "variable") return GenomeMode::variable;
  throw ParseError("unknown mode '" + std::string(text) + "'");
}

Cue::Cue(std::string_view label) : label_(trim(label)) {
  if (label_.empty()) throw ValidationError("cue label is empty");
}

bool CueCategory::allows(const Cue& cue) const {
  return std::find(allowed_cues.begin(), allowed_cues.end(), cue) != allowed_cues.end();
}

void CueSchema::validate() const {
  if (categories.empty()) throw ValidationError("schema has no categories");
  std::set<std::string> names;
  for (const auto& cat : categories) {
    if (!names.insert(cat.name).second)
      throw ValidationError("duplicate category name '" + cat.name + "'");
    if (cat.allowed_cues.empty())
      throw ValidationError("category '" + cat.name + "' has no cues");
    std::set<std::string> labels;
    for (const auto& cue : cat.allowed_cues)
      if (!labels.insert(cue.label()).second)
        throw ValidationError("duplicate cue '" + cue.label() + "' in category '" + cat.name + "'");
  }
}

std::size_t Genotype::cue_count() const {
  std::size_t n = 0;
  for (const auto& ch : chromosomes) n += ch.size();
  return n;
}

CueSchema load_schema(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("$: ") + e.what());
  }
  CueSchema schema;
  try {
    schema.data_item = parse_data_item(require_string(require(doc, "data_item", "$"), "$.data_item"));
  } catch (const ParseError& e) {
    throw ParseError(std::string("$.data_item: ") + e.what());
  }
  schema.region = require_string(require(doc, "region", "$"), "$.region");
  const json& cats = require(doc, "categories", "$");
  if (!cats.is_array()) throw ParseError("$.categories: expected an array");
  for (std::size_t i = 0; i < cats.size(); ++i) {
    const std::string path = "$.categories[" + std::to_string(i) + "]";
    CueCategory cat;
    cat.name = trim(require_string(require(cats[i], "name", path), path + ".name"));
    const json& cues = require(cats[i], "cues", path);
    if (!cues.is_array()) throw ParseError(path + ".cues: expected an array");
    for (std::size_t j = 0; j < cues.size(); ++j) {
      const std::string cue_path = path + ".cues[" + std::to_string(j) + "]";
      const std::string label = require_string(cues[j], cue_path);
      try {
        cat.allowed_cues.emplace_back(label);
      } catch (const ValidationError& e) {
        throw ValidationError(cue_path + ": " + e.what());
      }
    }
    schema.categories.push_back(std::move(cat));
  }
  schema.validate();
  return schema;
}

CueSchema load_schema_file(const std::filesystem::path& path) { return load_schema(read_file(path)); }

std::string dump_schema(const CueSchema& schema) {
  json doc;
  doc["data_item"] = to_string(schema.data_item);
  doc["region"] = schema.region;
  doc["categories"] = json::array();
  for (const auto& cat : schema.categories) {
    json cues = json::array();
    for (const auto& cue : cat.allowed_cues) cues.push_back(cue.label());
    doc["categories"].push_back({{"name", cat.name}, {"cues", cues}});
  }
  return doc.dump(2) + "\n";
}

void save_schema_file(const CueSchema& schema, const std::filesystem::path& path) {
  write_file(path, dump_schema(schema));
}

void validate_genotype(const Genotype& g, const CueSchema& schema, GenomeMode mode) {
  if (g.chromosomes.size() != schema.size())
    throw ValidationError("genotype has " + std::to_string(g.chromosomes.size()) +
                          " chromosomes, schema has " + std::to_string(schema.size()));
  for (std::size_t x = 0; x < g.chromosomes.size(); ++x) {
    const auto& ch = g.chromosomes[x];
    const auto& cat = schema.categories[x];
    if (mode == GenomeMode::fixed && ch.size() != 1)
      throw ValidationError("fixed-length chromosome " + std::to_string(x) + " holds " +
                            std::to_string(ch.size()) + " cues");
    if (ch.size() > cat.allowed_cues.size())
      throw ValidationError("chromosome " + std::to_string(x) + " is longer than its vocabulary");
    std::set<std::string> seen;
    for (const auto& cue : ch) {
      if (!cat.allows(cue))
        throw ValidationError("cue '" + cue.label() + "' is not allowed in category '" +
                              cat.name + "'");
      if (!seen.insert(cue.label()).second)
        throw ValidationError("duplicate cue '" + cue.label() + "' in chromosome " +
                              std::to_string(x));
    }
  }
}

Genotype random_genotype(const CueSchema& schema, Rng& rng) {
  Genotype g;
  g.chromosomes.reserve(schema.size());
  for (const auto& cat : schema.categories)
    g.chromosomes.push_back({cat.allowed_cues[rng.index(cat.allowed_cues.size())]});
  return g;
}

std::string canonical_key(const Genotype& g) {
  json key = json::array();
  for (const auto& ch : g.chromosomes) {
    std::vector<std::string> labels;
    labels.reserve(ch.size());
    for (const auto& cue : ch) labels.push_back(cue.label());
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    key.push_back(labels);
  }
  return key.dump();
}

std::string render_cue_list(const Genotype& g) {
  std::string out;
  for (const auto& ch : g.chromosomes)
    for (const auto& cue : ch) {
      if (!out.empty()) out += ", ";
      out += cue.label();
    }
  return out;
}

std::string dump_genotype(const Genotype& g, DataItem item) {
  json doc;
  doc["data_item"] = to_string(item);
  doc["chromosomes"] = json::array();
  for (const auto& ch : g.chromosomes) {
    json labels = json::array();
    for (const auto& cue : ch) labels.push_back(cue.label());
    doc["chromosomes"].push_back(labels);
  }
  return doc.dump(2) + "\n";
}

Genotype load_genotype(std::string_view document, const CueSchema& schema) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("$: ") + e.what());
  }
  if (doc.contains("data_item") &&
      !schema_serves(schema.data_item, parse_data_item(require_string(doc["data_item"], "$.data_item"))))
    throw ValidationError("genotype data item does not match the schema");
  const json& chs = require(doc, "chromosomes", "$");
  if (!chs.is_array()) throw ParseError("$.chromosomes: expected an array");
  Genotype g;
  for (std::size_t x = 0; x < chs.size(); ++x) {
    const std::string path = "$.chromosomes[" + std::to_string(x) + "]";
    if (!chs[x].is_array()) throw ParseError(path + ": expected an array");
    Chromosome ch;
    for (const auto& label : chs[x]) ch.emplace_back(require_string(label, path));
    g.chromosomes.push_back(std::move(ch));
  }
  validate_genotype(g, schema, GenomeMode::variable);
  return g;
}

}  // namespace clear
