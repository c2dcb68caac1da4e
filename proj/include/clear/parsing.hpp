#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clear/fitness.hpp"

namespace clear {

/// Content of the last complete `###...###` pair, trimmed. Throws ParseError
/// when no complete pair exists.
std::string extract_delimited(std::string_view text);

/// Lowercase, punctuation to spaces, collapsed whitespace, leading "(k)" stripped.
std::string normalize_option(std::string_view text);

/// Exact years, "A-B" ranges, "before YYYY", "Nth century" and "YYYY-now".
YearRange parse_age(std::string_view payload, int current_year);

/// "no low energy lighting", "low energy in K%" or a bare percentage.
double parse_lighting(std::string_view payload);

/// Index of the unique option matching `payload` after normalization. Exact
/// matches win; otherwise a whole-word substring match is accepted only when
/// it is unique.
std::size_t parse_categorical(std::string_view payload, std::span<const std::string> options);

HeatingClass parse_heating(std::string_view payload);
WindowClass parse_windows(std::string_view payload);

/// A point ("120") or range ("100-200 kwh"); units are ignored.
EnergyRange parse_numeric(std::string_view payload);

/// Parses a delimited payload into the estimate variant for `item`.
DataEstimate parse_estimate(DataItem item, std::string_view payload, int current_year);

}  // namespace clear
