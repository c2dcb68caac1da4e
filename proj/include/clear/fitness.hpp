#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>

#include "clear/schema.hpp"

namespace clear {

/// Inclusive year interval; an exact year has start == end.
struct YearRange {
  int start = 0;
  int end = 0;

  YearRange() = default;
  YearRange(int s, int e);
  static YearRange exact(int year) { return {year, year}; }
  bool is_exact() const { return start == end; }
  friend bool operator==(const YearRange&, const YearRange&) = default;
};

enum class HeatingClass { underfloor, warm_air, water_radiators, electric_panel, electric_storage };
enum class WindowClass { single, double_glazed, high_efficiency };

inline constexpr HeatingClass kHeatingClasses[] = {
    HeatingClass::underfloor, HeatingClass::warm_air, HeatingClass::water_radiators,
    HeatingClass::electric_panel, HeatingClass::electric_storage};
inline constexpr WindowClass kWindowClasses[] = {WindowClass::single, WindowClass::double_glazed,
                                                 WindowClass::high_efficiency};

std::string_view to_string(HeatingClass value);
std::string_view to_string(WindowClass value);

struct LightingPercent {
  double value = 0;
  friend bool operator==(const LightingPercent&, const LightingPercent&) = default;
};

struct UValue {
  double value = 0;
  friend bool operator==(const UValue&, const UValue&) = default;
};

/// kWh/m² estimate; a point estimate has start == end.
struct EnergyRange {
  double start = 0;
  double end = 0;
  friend bool operator==(const EnergyRange&, const EnergyRange&) = default;
};

/// What the estimator answered for one building.
using DataEstimate =
    std::variant<YearRange, LightingPercent, HeatingClass, WindowClass, UValue, EnergyRange>;

/// The data item whose variant `estimate` holds (windows and windows_uvalue
/// are told apart by the WindowClass / UValue alternatives).
DataItem item_of(const DataEstimate& estimate);
bool estimate_matches(const DataEstimate& estimate, DataItem item);
std::string render_estimate(const DataEstimate& estimate);

/// Confirmed values for one dwelling. A run only needs the field of its item.
struct GroundTruth {
  std::optional<YearRange> age;
  std::optional<double> lighting_pct;
  std::optional<HeatingClass> heating;
  std::optional<WindowClass> windows;
  std::optional<double> energy_kwh_m2;

  bool has(DataItem item) const;
};

// Per-building error functions. Lower is better, 0 is exact.

long long range_point_error(long long start_a, long long end_a, long long point_b);
long long range_range_error(const YearRange& a, const YearRange& b);
double range_point_error(double start_a, double end_a, double point_b);

int heating_error(HeatingClass estimate, HeatingClass truth);
int windows_error(WindowClass estimate, WindowClass truth);
double lighting_error(double estimate_pct, double truth_pct);
double energy_error(const EnergyRange& estimate, double truth);

/// U-value the windows class is scored against: single 0.5, double 2.0, high efficiency 4.8.
double uvalue_target(WindowClass truth);
double uvalue_error(double estimate_u, WindowClass truth);

/// Dispatches to the item's error function. Throws ContractViolation when the
/// estimate variant or the truth field does not fit `item`.
double building_error(DataItem item, const DataEstimate& estimate, const GroundTruth& truth);

/// Error charged to a building whose estimate could not be obtained.
double failure_penalty(DataItem item);

/// Sum of per-building errors. Throws ContractViolation on an empty split.
double aggregate_fitness(std::span<const double> per_building_errors);

}  // namespace clear
