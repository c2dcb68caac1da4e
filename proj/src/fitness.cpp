#include "clear/fitness.hpp"

#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>

#include "clear/errors.hpp"

namespace clear {

YearRange::YearRange(int s, int e) : start(s), end(e) {
  if (s > e)
    throw ValidationError("year range " + std::to_string(s) + "-" + std::to_string(e) +
                          " ends before it starts");
}

std::string_view to_string(HeatingClass value) {
  switch (value) {
    case HeatingClass::underfloor: return "underfloor";
    case HeatingClass::warm_air: return "warm_air";
    case HeatingClass::water_radiators: return "water_radiators";
    case HeatingClass::electric_panel: return "electric_panel";
    case HeatingClass::electric_storage: return "electric_storage";
  }
  return "?";
}

std::string_view to_string(WindowClass value) {
  switch (value) {
    case WindowClass::single: return "single";
    case WindowClass::double_glazed: return "double";
    case WindowClass::high_efficiency: return "high_efficiency";
  }
  return "?";
}

DataItem item_of(const DataEstimate& estimate) {
  switch (estimate.index()) {
    case 0: return DataItem::building_age;
    case 1: return DataItem::lighting;
    case 2: return DataItem::heating;
    case 3: return DataItem::windows;
    case 4: return DataItem::windows_uvalue;
    default: return DataItem::energy;
  }
}

bool estimate_matches(const DataEstimate& estimate, DataItem item) {
  return item_of(estimate) == item;
}

std::string render_estimate(const DataEstimate& estimate) {
  std::ostringstream out;
  std::visit(
      [&out](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, YearRange>) {
          if (v.is_exact()) out << v.start;
          else out << v.start << "-" << v.end;
        } else if constexpr (std::is_same_v<T, LightingPercent>) {
          out << v.value << "%";
        } else if constexpr (std::is_same_v<T, HeatingClass> || std::is_same_v<T, WindowClass>) {
          out << to_string(v);
        } else if constexpr (std::is_same_v<T, UValue>) {
          out << v.value;
        } else {
          if (v.start == v.end) out << v.start;
          else out << v.start << "-" << v.end;
        }
      },
      estimate);
  return out.str();
}

bool GroundTruth::has(DataItem item) const {
  switch (item) {
    case DataItem::building_age: return age.has_value();
    case DataItem::lighting: return lighting_pct.has_value();
    case DataItem::heating: return heating.has_value();
    case DataItem::windows:
    case DataItem::windows_uvalue: return windows.has_value();
    case DataItem::energy: return energy_kwh_m2.has_value();
  }
  return false;
}

long long range_point_error(long long start_a, long long end_a, long long point_b) {
  if (start_a > end_a) throw ContractViolation("range_point_error: start after end");
  if (start_a <= point_b && point_b <= end_a) return 0;
  return std::min(std::llabs(point_b - start_a), std::llabs(point_b - end_a));
}

double range_point_error(double start_a, double end_a, double point_b) {
  if (start_a > end_a) throw ContractViolation("range_point_error: start after end");
  if (start_a <= point_b && point_b <= end_a) return 0.0;
  return std::min(std::fabs(point_b - start_a), std::fabs(point_b - end_a));
}

long long range_range_error(const YearRange& a, const YearRange& b) {
  if (a.end < b.start) return static_cast<long long>(b.start) - a.end;
  if (b.end < a.start) return static_cast<long long>(a.start) - b.end;
  return 0;
}

int heating_error(HeatingClass estimate, HeatingClass truth) {
  if (estimate == truth) return 0;
  const auto pair_of = [](HeatingClass c) {
    switch (c) {
      case HeatingClass::underfloor:
      case HeatingClass::warm_air: return 0;
      case HeatingClass::electric_panel:
      case HeatingClass::electric_storage: return 1;
      default: return 2;
    }
  };
  // Underfloor/warm air and panel/storage are near misses; everything else is a full miss.
  const int pe = pair_of(estimate);
  return pe != 2 && pe == pair_of(truth) ? 1 : 2;
}

int windows_error(WindowClass estimate, WindowClass truth) {
  return std::abs(static_cast<int>(estimate) - static_cast<int>(truth));
}

double lighting_error(double estimate_pct, double truth_pct) {
  return std::fabs(estimate_pct - truth_pct);
}

double energy_error(const EnergyRange& estimate, double truth) {
  if (estimate.start == estimate.end) return std::fabs(estimate.start - truth);
  return range_point_error(estimate.start, estimate.end, truth);
}

double uvalue_target(WindowClass truth) {
  switch (truth) {
    case WindowClass::single: return 0.5;
    case WindowClass::double_glazed: return 2.0;
    case WindowClass::high_efficiency: return 4.8;
  }
  return 0.0;
}

double uvalue_error(double estimate_u, WindowClass truth) {
  return std::fabs(estimate_u - uvalue_target(truth));
}

double building_error(DataItem item, const DataEstimate& estimate, const GroundTruth& truth) {
  if (!estimate_matches(estimate, item))
    throw ContractViolation("estimate variant does not match data item " +
                            std::string(to_string(item)));
  if (!truth.has(item))
    throw ContractViolation("ground truth lacks data item " + std::string(to_string(item)));
  switch (item) {
    case DataItem::building_age: {
      const auto& est = std::get<YearRange>(estimate);
      const auto& t = *truth.age;
      if (t.is_exact()) {
        using ll = long long;
        return static_cast<double>(range_point_error(ll{est.start}, ll{est.end}, ll{t.start}));
      }
      return static_cast<double>(range_range_error(est, t));
    }
    case DataItem::lighting:
      return lighting_error(std::get<LightingPercent>(estimate).value, *truth.lighting_pct);
    case DataItem::heating: return heating_error(std::get<HeatingClass>(estimate), *truth.heating);
    case DataItem::windows: return windows_error(std::get<WindowClass>(estimate), *truth.windows);
    case DataItem::windows_uvalue: return uvalue_error(std::get<UValue>(estimate).value, *truth.windows);
    case DataItem::energy: return energy_error(std::get<EnergyRange>(estimate), *truth.energy_kwh_m2);
  }
  return 0.0;
}

double failure_penalty(DataItem item) {
  switch (item) {
    case DataItem::building_age: return 1024.0;
    case DataItem::lighting: return 100.0;
    case DataItem::heating:
    case DataItem::windows: return 2.0;
    case DataItem::windows_uvalue: return 4.3;
    case DataItem::energy: return 450.0;
  }
  return 0.0;
}

double aggregate_fitness(std::span<const double> per_building_errors) {
  if (per_building_errors.empty())
    throw ContractViolation("aggregate_fitness needs at least one building");
  return std::accumulate(per_building_errors.begin(), per_building_errors.end(), 0.0);
}

}  // namespace clear
