#include "clear/schema_gen.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "clear/errors.hpp"
#include "clear/prompts.hpp"

namespace clear {

namespace {

class NestedListParser {
 public:
  explicit NestedListParser(std::string_view text) : text_(text) {}

  std::vector<std::vector<std::string>> parse() {
    pos_ = text_.find('[');
    if (pos_ == std::string_view::npos) throw ParseError("no array found in reply");
    expect('[');
    std::vector<std::vector<std::string>> rows;
    skip_ws();
    while (peek() != ']') {
      rows.push_back(parse_row());
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        skip_ws();
      } else if (peek() != ']') {
        fail("expected ',' or ']'");
      }
    }
    ++pos_;
    return rows;
  }

 private:
  std::vector<std::string> parse_row() {
    skip_ws();
    expect('[');
    std::vector<std::string> row;
    skip_ws();
    while (peek() != ']') {
      row.push_back(parse_scalar());
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        skip_ws();
      } else if (peek() != ']') {
        fail("expected ',' or ']'");
      }
    }
    ++pos_;
    return row;
  }

  std::string parse_scalar() {
    const char c = peek();
    if (c == '\'' || c == '"') return parse_string(c);
    std::string out;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                   text_[pos_] == '.' || text_[pos_] == '-' || text_[pos_] == '_'))
      out += text_[pos_++];
    if (out.empty()) fail("expected a string or number");
    return out;
  }

  std::string parse_string(char quote) {
    ++pos_;
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != quote) {
      if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
      out += text_[pos_++];
    }
    if (pos_ >= text_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  char peek() {
    if (pos_ >= text_.size()) fail("unexpected end of input");
    return text_[pos_];
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("nested list, offset " + std::to_string(pos_) + ": " + msg);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

template <typename F>
auto with_retries(int retry_limit, const char* step, F&& step_fn) {
  std::string last_reply;
  std::string last_error;
  for (int attempt = 0; attempt <= retry_limit; ++attempt) {
    try {
      return step_fn(last_reply);
    } catch (const ParseError& e) {
      last_error = e.what();
    } catch (const ValidationError& e) {
      last_error = e.what();
    } catch (const TransportError& e) {
      last_error = e.what();
    }
  }
  throw SchemaGenerationError(std::string(step) + " failed: " + last_error, last_reply);
}

std::string age_row(const BuildingRecord& r) {
  const auto& age = *r.truth.age;
  return r.id + ": " +
         (age.is_exact() ? std::to_string(age.start)
                         : std::to_string(age.start) + "-" + std::to_string(age.end));
}

}  // namespace

std::vector<std::vector<std::string>> parse_nested_list(std::string_view text) {
  return NestedListParser(text).parse();
}

std::vector<std::string> parse_feature_list(std::string_view text) {
  static const std::regex bullet(R"(^\s*(?:[-*•]+|\d+[\.\)])\s*)");
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    line = std::regex_replace(line, bullet, "");
    line.erase(std::remove(line.begin(), line.end(), '*'), line.end());
    line = trim(line);
    if (line.empty() || line.back() == ':') continue;
    out.push_back(line);
  }
  return out;
}

std::vector<std::vector<std::string>> group_training(const std::vector<BuildingRecord>& training,
                                                     DataItem item, LlmTransport& llm,
                                                     int retry_limit) {
  if (item != DataItem::building_age) {
    std::map<int, std::vector<std::string>> by_group;
    for (const auto& r : training) {
      // Group ids come from value_group; for heating the three buckets are
      // water radiators, electric, and warm air / underfloor.
      by_group[value_group(item, r.truth)].push_back(r.id);
    }
    std::vector<std::vector<std::string>> groups;
    for (auto& [g, ids] : by_group) groups.push_back(std::move(ids));
    return groups;
  }
  std::string rows;
  std::set<std::string> known;
  for (const auto& r : training) {
    if (!r.truth.age) continue;
    rows += age_row(r) + "\n";
    known.insert(r.id);
  }
  const std::string prompt = prompts::age_clustering(rows);
  return with_retries(retry_limit, "age clustering", [&](std::string& reply) {
    reply = llm.send(prompt, {});
    auto groups = parse_nested_list(reply);
    std::erase_if(groups, [](const auto& g) { return g.empty(); });
    for (const auto& g : groups)
      for (const auto& id : g)
        if (!known.count(id)) throw ValidationError("clustering returned unknown id '" + id + "'");
    if (groups.empty()) throw ParseError("clustering returned no groups");
    return groups;
  });
}

CueSchema schema_from_categories(const std::vector<std::vector<std::string>>& categories,
                                 DataItem item, std::string region) {
  CueSchema schema;
  schema.data_item = item;
  schema.region = std::move(region);
  std::set<std::string> names;
  for (const auto& row : categories) {
    if (row.size() < 2) continue;
    CueCategory cat;
    std::string name = trim(row.front());
    if (name.empty()) name = "Category " + std::to_string(schema.categories.size() + 1);
    for (int n = 2; names.count(name); ++n) name = trim(row.front()) + " (" + std::to_string(n) + ")";
    cat.name = name;
    std::set<std::string> labels;
    for (std::size_t i = 1; i < row.size(); ++i) {
      const std::string label = trim(row[i]);
      if (!label.empty() && labels.insert(label).second) cat.allowed_cues.emplace_back(label);
    }
    if (cat.allowed_cues.empty()) continue;
    names.insert(name);
    schema.categories.push_back(std::move(cat));
  }
  schema.validate();
  return schema;
}

CueSchema generate_schema(const std::vector<BuildingRecord>& training, DataItem item,
                          LlmTransport& llm, Rng& rng, int retry_limit,
                          SchemaGenerationTrace* trace) {
  if (training.empty()) throw ContractViolation("schema generation needs training buildings");
  std::map<std::string, const BuildingRecord*> by_id;
  for (const auto& r : training) by_id[r.id] = &r;
  const std::string region = training.front().region.empty() ? "UK" : training.front().region;

  auto groups = group_training(training, item, llm, retry_limit);
  std::vector<const BuildingRecord*> reps;
  for (const auto& g : groups) reps.push_back(by_id.at(g[rng.index(g.size())]));

  std::vector<std::string> raw;
  for (const auto* rep : reps) {
    const std::string prompt = prompts::feature_extraction(item, region);
    auto features = with_retries(retry_limit, "feature extraction", [&](std::string& reply) {
      reply = llm.send(prompt, rep->images_for(item));
      auto list = parse_feature_list(reply);
      if (list.empty()) throw ParseError("no features in reply");
      return list;
    });
    raw.insert(raw.end(), features.begin(), features.end());
  }

  std::string joined;
  for (const auto& f : raw) joined += (joined.empty() ? "" : ", ") + f;
  const std::string cluster_reply = with_retries(retry_limit, "clustering", [&](std::string& reply) {
    reply = llm.send(prompts::dedup_and_cluster(joined), {});
    if (trim(reply).empty()) throw ParseError("empty clustering reply");
    return reply;
  });

  std::string format_reply;
  CueSchema schema = with_retries(retry_limit, "formatting", [&](std::string& reply) {
    reply = llm.send(prompts::formatting(cluster_reply), {});
    format_reply = reply;
    return schema_from_categories(parse_nested_list(reply), item, region);
  });

  if (trace) {
    trace->groups = groups;
    for (const auto* r : reps) trace->representatives.push_back(r->id);
    trace->raw_features = raw;
    trace->cluster_reply = cluster_reply;
    trace->format_reply = format_reply;
  }
  return schema;
}

}  // namespace clear
