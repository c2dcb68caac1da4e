#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clear/fitness.hpp"
#include "clear/rng.hpp"

namespace clear {

/// Photo subsets prepared per dwelling.
enum class ImageSet { building, heating, windows, lighting };

std::string_view to_string(ImageSet set);
/// Building photos serve age and energy; the other items have their own subset.
ImageSet image_set_for(DataItem item);

enum class Split { train, test };

struct BuildingRecord {
  std::string id;
  std::string region = "UK";
  std::map<ImageSet, std::vector<std::filesystem::path>> image_sets;
  GroundTruth truth;
  std::optional<Split> split;

  const std::vector<std::filesystem::path>& images_for(DataItem item) const;
};

struct DatasetSplit {
  std::vector<BuildingRecord> train;
  std::vector<BuildingRecord> test;

  const std::vector<BuildingRecord>& get(Split s) const { return s == Split::train ? train : test; }
};

/// Parses a manifest (JSON array of records). Relative image paths resolve
/// against `base_dir`; when `check_images` is set every path must exist.
/// Textual ages are cleaned here ("19th century" -> 1801-1900).
std::vector<BuildingRecord> load_manifest(std::string_view document,
                                          const std::filesystem::path& base_dir,
                                          int current_year, bool check_images = true);
std::vector<BuildingRecord> load_manifest_file(const std::filesystem::path& path,
                                               int current_year, bool check_images = true);
std::string dump_manifest(const std::vector<BuildingRecord>& records);

/// Value bucket of a building for `item`: the three fixed groupings used when
/// picking representatives (lighting 0 / 100 / between, energy <100 / 100-200
/// / >200...). Age uses the seven era bands of the evaluation prompt.
int value_group(DataItem item, const GroundTruth& truth);

/// Honors explicit per-record splits when every record carries one; otherwise
/// splits each value group 60:40 so both sides see every group with >= 2 members.
DatasetSplit split_dataset(const std::vector<BuildingRecord>& records, DataItem item, Rng& rng,
                           double train_fraction = 0.6);

/// The split used by a run seeded with `seed`, drawn from a stream of its own.
DatasetSplit split_for_seed(const std::vector<BuildingRecord>& records, DataItem item,
                            std::uint64_t seed);

}  // namespace clear
