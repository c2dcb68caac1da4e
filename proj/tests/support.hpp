#pragma once

#include <atomic>
#include <initializer_list>
#include <mutex>
#include <string>
#include <vector>

#include "clear/dataset.hpp"
#include "clear/evaluator.hpp"
#include "clear/llm.hpp"
#include "clear/rng.hpp"
#include "clear/schema.hpp"

namespace testing {

using Labels = std::vector<std::vector<std::string>>;

inline clear::Genotype G(const Labels& labels) {
  clear::Genotype g;
  for (const auto& ch : labels) {
    clear::Chromosome c;
    for (const auto& l : ch) c.emplace_back(l);
    g.chromosomes.push_back(std::move(c));
  }
  return g;
}

inline Labels labels_of(const clear::Genotype& g) {
  Labels out;
  for (const auto& ch : g.chromosomes) {
    out.emplace_back();
    for (const auto& c : ch) out.back().push_back(c.label());
  }
  return out;
}

inline clear::CueSchema make_schema(const Labels& vocab, clear::DataItem item = clear::DataItem::energy) {
  clear::CueSchema s;
  s.data_item = item;
  for (std::size_t x = 0; x < vocab.size(); ++x) {
    clear::CueCategory c;
    c.name = "cat" + std::to_string(x);
    for (const auto& l : vocab[x]) c.allowed_cues.emplace_back(l);
    s.categories.push_back(std::move(c));
  }
  s.validate();
  return s;
}

/// `categories` x `cues` schema with labels "c<x>_<j>".
inline clear::CueSchema grid_schema(std::size_t categories, std::size_t cues,
                                    clear::DataItem item = clear::DataItem::energy) {
  Labels vocab(categories);
  for (std::size_t x = 0; x < categories; ++x)
    for (std::size_t j = 0; j < cues; ++j) vocab[x].push_back("c" + std::to_string(x) + "_" + std::to_string(j));
  return make_schema(vocab, item);
}

/// Random schema with 1..max_categories categories of 1..max_cues cues.
inline clear::CueSchema random_schema(clear::Rng& rng, std::size_t max_categories, std::size_t max_cues) {
  Labels vocab(1 + rng.index(max_categories));
  for (std::size_t x = 0; x < vocab.size(); ++x) {
    const std::size_t m = 1 + rng.index(max_cues);
    for (std::size_t j = 0; j < m; ++j) vocab[x].push_back("k" + std::to_string(x) + "_" + std::to_string(j));
  }
  return make_schema(vocab);
}

/// Buildings with full ground truth; energy truth 100 + 10 i.
inline std::vector<clear::BuildingRecord> buildings(std::size_t n) {
  std::vector<clear::BuildingRecord> out;
  static const clear::HeatingClass heat[] = {
      clear::HeatingClass::underfloor, clear::HeatingClass::warm_air,
      clear::HeatingClass::water_radiators, clear::HeatingClass::electric_panel,
      clear::HeatingClass::electric_storage};
  static const clear::WindowClass win[] = {clear::WindowClass::single,
                                           clear::WindowClass::double_glazed,
                                           clear::WindowClass::high_efficiency};
  for (std::size_t i = 0; i < n; ++i) {
    clear::BuildingRecord b;
    b.id = "b" + std::to_string(i);
    b.truth.age = clear::YearRange::exact(1900 + static_cast<int>(i) * 10);
    b.truth.lighting_pct = static_cast<double>((i * 20) % 120 > 100 ? 50 : (i * 20) % 120);
    b.truth.heating = heat[i % 5];
    b.truth.windows = win[i % 3];
    b.truth.energy_kwh_m2 = 100.0 + 10.0 * static_cast<double>(i);
    out.push_back(std::move(b));
  }
  return out;
}

/// Answers every request with the building's true value.
class TruthEvaluator : public clear::Evaluator {
 public:
  clear::DataEstimate evaluate(const clear::EvaluationRequest& r) override {
    ++calls;
    const auto& t = r.building.truth;
    switch (r.item) {
      case clear::DataItem::building_age: return *t.age;
      case clear::DataItem::lighting: return clear::LightingPercent{*t.lighting_pct};
      case clear::DataItem::heating: return *t.heating;
      case clear::DataItem::windows: return *t.windows;
      case clear::DataItem::windows_uvalue: return clear::UValue{clear::uvalue_target(*t.windows)};
      case clear::DataItem::energy: return clear::EnergyRange{*t.energy_kwh_m2, *t.energy_kwh_m2};
    }
    return *t.age;
  }
  std::atomic<int> calls{0};
};

/// Replays canned replies in order and records every prompt.
class ScriptedTransport : public clear::LlmTransport {
 public:
  explicit ScriptedTransport(std::vector<std::string> replies) : replies_(std::move(replies)) {}
  std::string send(const std::string& prompt, const std::vector<std::filesystem::path>& images) override {
    std::lock_guard lock(mutex_);
    prompts.push_back(prompt);
    image_batches.push_back(images);
    if (next_ >= replies_.size()) throw clear::TransportError("script exhausted");
    const std::string r = replies_[next_++];
    if (r == "<transport-error>") throw clear::TransportError("scripted failure");
    return r;
  }
  std::vector<std::string> prompts;
  std::vector<std::vector<std::filesystem::path>> image_batches;

 private:
  std::mutex mutex_;
  std::vector<std::string> replies_;
  std::size_t next_ = 0;
};

}  // namespace testing
