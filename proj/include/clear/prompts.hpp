#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "clear/schema.hpp"

namespace clear::prompts {

std::string_view question(DataItem item);
std::string_view instructions(DataItem item);
std::string_view final_instructions(DataItem item);

/// Full cue-evaluation prompt for one dwelling.
std::string evaluation(DataItem item, std::string_view region, std::string_view cue_list);

/// Asks a surveyor persona for ~50 features relevant to `item`.
std::string feature_extraction(DataItem item, std::string_view region);

/// Groups buildings into three eras from "id: year" rows.
std::string age_clustering(std::string_view building_rows);

/// Dedup + cluster the raw features into about eight categories.
std::string dedup_and_cluster(std::string_view raw_feature_list);

/// Turns the clustering answer into a nested array, one subarray per category
/// with the category name first.
std::string formatting(std::string_view categories);

}  // namespace clear::prompts
