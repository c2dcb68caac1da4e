#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "clear/dataset.hpp"
#include "clear/llm.hpp"
#include "clear/rng.hpp"
#include "clear/schema.hpp"

namespace clear {

/// An LLM step kept failing; `raw_response` holds the last reply for inspection.
class SchemaGenerationError : public std::runtime_error {
 public:
  SchemaGenerationError(const std::string& what, std::string raw)
      : std::runtime_error(what), raw_response(std::move(raw)) {}
  std::string raw_response;
};

/// Intermediate artifacts of a schema generation run.
struct SchemaGenerationTrace {
  std::vector<std::vector<std::string>> groups;  // building ids per group
  std::vector<std::string> representatives;
  std::vector<std::string> raw_features;
  std::string cluster_reply;
  std::string format_reply;
};

/// Parses a (possibly python-flavoured) nested array of strings/numbers out of
/// free text: `[['a', "b"], [1, 2]]`. Throws ParseError.
std::vector<std::vector<std::string>> parse_nested_list(std::string_view text);

/// One feature per non-empty line, with bullets, numbering and markdown emphasis removed.
std::vector<std::string> parse_feature_list(std::string_view text);

/// Three training groups for `item`: LLM era clustering for building age, the
/// fixed value groupings otherwise.
std::vector<std::vector<std::string>> group_training(const std::vector<BuildingRecord>& training,
                                                     DataItem item, LlmTransport& llm,
                                                     int retry_limit);

/// Builds a cue schema from training photos: group, pick one building per
/// group, extract features, dedup and cluster them, format into categories.
CueSchema generate_schema(const std::vector<BuildingRecord>& training, DataItem item,
                          LlmTransport& llm, Rng& rng, int retry_limit = 2,
                          SchemaGenerationTrace* trace = nullptr);

/// Converts formatted category arrays (name first) into a validated schema.
CueSchema schema_from_categories(const std::vector<std::vector<std::string>>& categories,
                                 DataItem item, std::string region);

}  // namespace clear
