#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "clear/errors.hpp"
#include "clear/fitness.hpp"
#include "clear/rng.hpp"

using namespace clear;

namespace {

// Rows are estimates, columns truths, in enum order.
constexpr int kHeatingTable[5][5] = {{0, 1, 2, 2, 2},
                                     {1, 0, 2, 2, 2},
                                     {2, 2, 0, 2, 2},
                                     {2, 2, 2, 0, 1},
                                     {2, 2, 2, 1, 0}};
constexpr int kWindowsTable[3][3] = {{0, 1, 2}, {1, 0, 1}, {2, 1, 0}};

// Distance between two integer intervals by scanning every pair of points.
long long brute_distance(long long s1, long long e1, long long s2, long long e2) {
  long long best = -1;
  for (long long a = s1; a <= e1; ++a)
    for (long long b = s2; b <= e2; ++b) {
      const long long d = std::llabs(a - b);
      if (best < 0 || d < best) best = d;
    }
  return best;
}

}  // namespace

TEST_SUITE("fitness") {

TEST_CASE("range_point_error examples") {
  CHECK(range_point_error(2007LL, 2011LL, 2009LL) == 0);
  CHECK(range_point_error(2007LL, 2011LL, 2014LL) == 3);
  CHECK(range_point_error(1990LL, 2020LL, 1985LL) == 5);
}

TEST_CASE("range_range_error examples") {
  CHECK(range_range_error({1900, 1930}, {1950, 1970}) == 20);
  CHECK(range_range_error({1950, 1970}, {1900, 1930}) == 20);
  CHECK(range_range_error({1900, 1960}, {1950, 1970}) == 0);
}

TEST_CASE("year errors agree with a brute-force distance") {
  Rng rng(21);
  for (int i = 0; i < 2000; ++i) {
    const long long s1 = 1900 + static_cast<long long>(rng.index(60)), e1 = s1 + static_cast<long long>(rng.index(25));
    const long long s2 = 1900 + static_cast<long long>(rng.index(60)), e2 = s2 + static_cast<long long>(rng.index(25));
    const long long p = 1880 + static_cast<long long>(rng.index(120));
    CHECK(range_point_error(s1, e1, p) == brute_distance(s1, e1, p, p));
    CHECK(range_range_error(YearRange(static_cast<int>(s1), static_cast<int>(e1)),
                            YearRange(static_cast<int>(s2), static_cast<int>(e2))) ==
          brute_distance(s1, e1, s2, e2));
    CHECK(range_point_error(s1, e1, p) ==
          range_range_error(YearRange(static_cast<int>(s1), static_cast<int>(e1)), YearRange::exact(static_cast<int>(p))));
  }
}

TEST_CASE("YearRange rejects inverted bounds") {
  CHECK_THROWS_AS(YearRange(2000, 1990), ValidationError);
  CHECK(YearRange::exact(2014).is_exact());
}

TEST_CASE("heating error matrix, every cell") {
  for (int e = 0; e < 5; ++e)
    for (int t = 0; t < 5; ++t) {
      CAPTURE(e);
      CAPTURE(t);
      CHECK(heating_error(kHeatingClasses[e], kHeatingClasses[t]) == kHeatingTable[e][t]);
    }
  CHECK(heating_error(HeatingClass::underfloor, HeatingClass::warm_air) == 1);
  CHECK(heating_error(HeatingClass::underfloor, HeatingClass::water_radiators) == 2);
  CHECK(heating_error(HeatingClass::electric_storage, HeatingClass::electric_storage) == 0);
}

TEST_CASE("windows error matrix, every cell") {
  for (int e = 0; e < 3; ++e)
    for (int t = 0; t < 3; ++t) CHECK(windows_error(kWindowClasses[e], kWindowClasses[t]) == kWindowsTable[e][t]);
  CHECK(windows_error(WindowClass::single, WindowClass::high_efficiency) == 2);
  CHECK(windows_error(WindowClass::single, WindowClass::double_glazed) == 1);
  CHECK(windows_error(WindowClass::double_glazed, WindowClass::double_glazed) == 0);
}

TEST_CASE("categorical errors are symmetric metrics") {
  for (auto a : kHeatingClasses)
    for (auto b : kHeatingClasses) CHECK(heating_error(a, b) == heating_error(b, a));
  for (auto a : kWindowClasses)
    for (auto b : kWindowClasses)
      for (auto c : kWindowClasses) {
        CHECK(windows_error(a, b) == windows_error(b, a));
        CHECK(windows_error(a, b) <= windows_error(a, c) + windows_error(c, b));
      }
}

TEST_CASE("lighting, energy and U-value errors") {
  CHECK(lighting_error(20, 86) == 66);
  CHECK(lighting_error(100, 100) == 0);
  CHECK(lighting_error(0, 100) == 100);
  CHECK(energy_error({150, 150}, 120) == 30);
  CHECK(energy_error({100, 200}, 150) == 0);
  CHECK(energy_error({100, 200}, 250) == 50);
  CHECK(uvalue_error(2.3, WindowClass::double_glazed) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(uvalue_error(0.5, WindowClass::single) == 0.0);
  CHECK(uvalue_error(4.8, WindowClass::double_glazed) == doctest::Approx(2.8).epsilon(1e-12));
  CHECK(uvalue_target(WindowClass::single) == 0.5);
  CHECK(uvalue_target(WindowClass::double_glazed) == 2.0);
  CHECK(uvalue_target(WindowClass::high_efficiency) == 4.8);
}

TEST_CASE("numeric errors satisfy the triangle inequality") {
  Rng rng(22);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform() * 100, b = rng.uniform() * 100, c = rng.uniform() * 100;
    CHECK(lighting_error(a, b) <= lighting_error(a, c) + lighting_error(c, b) + 1e-12);
    CHECK(lighting_error(a, b) >= 0);
    for (auto w : kWindowClasses) {
      const double u1 = 0.1 + rng.uniform() * 6, u2 = 0.1 + rng.uniform() * 6;
      // |u1 - t| <= |u1 - u2| + |u2 - t|
      CHECK(uvalue_error(u1, w) <= std::abs(u1 - u2) + uvalue_error(u2, w) + 1e-12);
    }
  }
}

TEST_CASE("building_error dispatches per item") {
  GroundTruth t;
  t.age = YearRange::exact(2014);
  t.heating = HeatingClass::underfloor;
  t.windows = WindowClass::double_glazed;
  t.lighting_pct = 86;
  t.energy_kwh_m2 = 120;
  CHECK(building_error(DataItem::building_age, YearRange(1990, 2020), t) == 0);
  CHECK(building_error(DataItem::building_age, YearRange(1950, 1970), t) == 44);
  CHECK(building_error(DataItem::heating, HeatingClass::warm_air, t) == 1);
  CHECK(building_error(DataItem::windows_uvalue, UValue{2.0}, t) == 0);
  CHECK(building_error(DataItem::windows, WindowClass::single, t) == 1);
  CHECK(building_error(DataItem::lighting, LightingPercent{20}, t) == 66);
  CHECK(building_error(DataItem::energy, EnergyRange{100, 110}, t) == 10);

  GroundTruth ranged;
  ranged.age = YearRange(1801, 1900);
  CHECK(building_error(DataItem::building_age, YearRange(1930, 1950), ranged) == 30);
  CHECK(building_error(DataItem::building_age, YearRange::exact(1850), ranged) == 0);
}

TEST_CASE("building_error rejects mismatched inputs") {
  GroundTruth t;
  t.windows = WindowClass::single;
  CHECK_THROWS_AS(building_error(DataItem::windows, HeatingClass::underfloor, t), ContractViolation);
  CHECK_THROWS_AS(building_error(DataItem::heating, HeatingClass::underfloor, t), ContractViolation);
}

TEST_CASE("failure penalties") {
  CHECK(failure_penalty(DataItem::building_age) == 1024);
  CHECK(failure_penalty(DataItem::heating) == 2);
  CHECK(failure_penalty(DataItem::windows) == 2);
  CHECK(failure_penalty(DataItem::lighting) == 100);
  CHECK(failure_penalty(DataItem::energy) == 450);
  CHECK(failure_penalty(DataItem::windows_uvalue) == doctest::Approx(4.3));
}

TEST_CASE("aggregate_fitness sums and is order-free") {
  const std::vector<double> v{0, 3, 5};
  CHECK(aggregate_fitness(v) == 8);
  CHECK(aggregate_fitness(std::vector<double>{0, 0, 0}) == 0);
  CHECK(aggregate_fitness(std::vector<double>{66}) == 66);
  CHECK_THROWS_AS(aggregate_fitness(std::vector<double>{}), ContractViolation);
  std::vector<double> w{1, 2, 3, 4, 7};
  const double total = aggregate_fitness(w);
  while (std::next_permutation(w.begin(), w.end())) CHECK(aggregate_fitness(w) == total);
}

TEST_CASE("estimate variants map to items") {
  CHECK(item_of(UValue{1.0}) == DataItem::windows_uvalue);
  CHECK(item_of(WindowClass::single) == DataItem::windows);
  CHECK(estimate_matches(EnergyRange{1, 2}, DataItem::energy));
  CHECK_FALSE(estimate_matches(EnergyRange{1, 2}, DataItem::lighting));
}

}
