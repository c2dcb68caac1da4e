#pragma once

#include <compare>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "clear/rng.hpp"

namespace clear {

/// Extraction target of a run. `windows_uvalue` is the real-valued re-encoding
/// of the windows item.
enum class DataItem { building_age, lighting, heating, windows, windows_uvalue, energy };

std::string_view to_string(DataItem item);
/// Accepts the enum spelling ("building_age"), throws ParseError otherwise.
DataItem parse_data_item(std::string_view text);
const std::vector<DataItem>& all_data_items();
/// Whether a schema built for `schema_item` can drive runs on `item`. The
/// window schema serves both the categorical and the U-value read-out.
bool schema_serves(DataItem schema_item, DataItem item);

/// A textual signal placed in the evaluation prompt. Labels are trimmed on
/// construction and compared case-sensitively.
class Cue {
 public:
  Cue() = default;
  explicit Cue(std::string_view label);

  const std::string& label() const { return label_; }

  friend bool operator==(const Cue&, const Cue&) = default;
  friend auto operator<=>(const Cue&, const Cue&) = default;

 private:
  std::string label_;
};

using Chromosome = std::vector<Cue>;

struct CueCategory {
  std::string name;
  std::vector<Cue> allowed_cues;

  bool allows(const Cue& cue) const;
};

struct CueSchema {
  DataItem data_item = DataItem::building_age;
  std::string region = "UK";
  std::vector<CueCategory> categories;

  std::size_t size() const { return categories.size(); }
  /// Throws ValidationError when any schema invariant is broken.
  void validate() const;
};

/// One individual: a chromosome per schema category, each an ordered list of
/// cues. Order within a chromosome is kept for rendering only.
struct Genotype {
  std::vector<Chromosome> chromosomes;

  std::size_t cue_count() const;
  friend bool operator==(const Genotype&, const Genotype&) = default;
};

enum class GenomeMode { fixed, variable };

std::string_view to_string(GenomeMode mode);
GenomeMode parse_genome_mode(std::string_view text);

/// Parses a schema document (JSON, see docs/formats.md).
CueSchema load_schema(std::string_view document);
CueSchema load_schema_file(const std::filesystem::path& path);
std::string dump_schema(const CueSchema& schema);
void save_schema_file(const CueSchema& schema, const std::filesystem::path& path);

/// Throws ValidationError describing the first violated Genotype invariant.
void validate_genotype(const Genotype& g, const CueSchema& schema, GenomeMode mode);

/// One uniformly chosen cue per category.
Genotype random_genotype(const CueSchema& schema, Rng& rng);

/// Identity used for caching: per chromosome the sorted set of labels.
std::string canonical_key(const Genotype& g);

/// All cue labels in chromosome order, joined by ", ".
std::string render_cue_list(const Genotype& g);

std::string dump_genotype(const Genotype& g, DataItem item);
/// Parses a genotype document and checks it against `schema`.
Genotype load_genotype(std::string_view document, const CueSchema& schema);

std::string trim(std::string_view text);

}  // namespace clear
