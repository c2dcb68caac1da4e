#include "clear/parsing.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>
#include <utility>

#include "clear/errors.hpp"

namespace clear {

namespace {

struct Alias {
  std::string_view text;
  int value;
};

// Surface forms accepted for each class: the prompt's options plus the
// wording used in ground-truth documents.
constexpr Alias kHeatingAliases[] = {
    {"underfloor heating", static_cast<int>(HeatingClass::underfloor)},
    {"underfloor", static_cast<int>(HeatingClass::underfloor)},
    {"under floor", static_cast<int>(HeatingClass::underfloor)},
    {"warm air from vents", static_cast<int>(HeatingClass::warm_air)},
    {"warm air", static_cast<int>(HeatingClass::warm_air)},
    {"water radiators", static_cast<int>(HeatingClass::water_radiators)},
    {"water rads", static_cast<int>(HeatingClass::water_radiators)},
    {"electric heaters", static_cast<int>(HeatingClass::electric_panel)},
    {"electric panels", static_cast<int>(HeatingClass::electric_panel)},
    {"electric panel", static_cast<int>(HeatingClass::electric_panel)},
    {"electric storage heaters", static_cast<int>(HeatingClass::electric_storage)},
    {"electric storage", static_cast<int>(HeatingClass::electric_storage)},
};

constexpr Alias kWindowAliases[] = {
    {"single glazed", static_cast<int>(WindowClass::single)},
    {"single glazing", static_cast<int>(WindowClass::single)},
    {"double glazed", static_cast<int>(WindowClass::double_glazed)},
    {"double glazing", static_cast<int>(WindowClass::double_glazed)},
    {"high efficiency double or triple glazed", static_cast<int>(WindowClass::high_efficiency)},
    {"high efficiency", static_cast<int>(WindowClass::high_efficiency)},
    {"triple glazed", static_cast<int>(WindowClass::high_efficiency)},
};

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Collapses whitespace and folds en/em dashes to '-'.
std::string tidy(std::string_view text) {
  std::string s;
  s.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text.compare(i, 3, "\xE2\x80\x93") == 0 || text.compare(i, 3, "\xE2\x80\x94") == 0) {
      s += '-';
      i += 2;
    } else {
      s += text[i];
    }
  }
  return trim(lower(s));
}

// Indices of options whose normalized form equals the payload; failing that,
// those that occur in the payload (or contain it) on word boundaries.
std::vector<std::size_t> candidates(std::string_view payload,
                                    std::span<const std::string> options) {
  const std::string norm = normalize_option(payload);
  std::vector<std::size_t> exact, partial;
  if (norm.empty()) return {};
  const std::string padded = " " + norm + " ";
  for (std::size_t i = 0; i < options.size(); ++i) {
    const std::string opt = normalize_option(options[i]);
    if (opt.empty()) continue;
    if (opt == norm) exact.push_back(i);
    else if (padded.find(" " + opt + " ") != std::string::npos ||
             (" " + opt + " ").find(padded) != std::string::npos)
      partial.push_back(i);
  }
  return exact.empty() ? partial : exact;
}

template <typename T, std::size_t N>
T parse_aliased(std::string_view payload, const Alias (&aliases)[N], const char* what) {
  std::vector<std::string> options;
  for (const auto& a : aliases) options.emplace_back(a.text);
  std::set<int> values;
  for (std::size_t i : candidates(payload, options)) values.insert(aliases[i].value);
  if (values.size() != 1)
    throw ParseError(std::string(values.empty() ? "unrecognized " : "ambiguous ") + what + " '" +
                     std::string(payload) + "'");
  return static_cast<T>(*values.begin());
}

}  // namespace

std::string extract_delimited(std::string_view text) {
  constexpr std::string_view delim = "###";
  std::vector<std::size_t> marks;
  for (std::size_t pos = text.find(delim); pos != std::string_view::npos;
       pos = text.find(delim, pos + delim.size()))
    marks.push_back(pos);
  if (marks.size() < 2) throw ParseError("answer has no ###...### pair");
  // Pairs are (0,1), (2,3)...; the last complete one is the final answer.
  const std::size_t open = marks[(marks.size() / 2 - 1) * 2];
  const std::size_t close = marks[(marks.size() / 2 - 1) * 2 + 1];
  return trim(text.substr(open + delim.size(), close - open - delim.size()));
}

std::string normalize_option(std::string_view text) {
  std::string s = tidy(text);
  static const std::regex index_prefix(R"(^\(?\d+[\).:]\s*)");
  s = std::regex_replace(s, index_prefix, "");
  std::string out;
  bool space = false;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c >= 0x80) {
      if (space && !out.empty()) out += ' ';
      space = false;
      out += static_cast<char>(c);
    } else {
      space = true;
    }
  }
  return out;
}

YearRange parse_age(std::string_view payload, int current_year) {
  std::string s = tidy(payload);
  static const std::regex index_prefix(R"(^\(\d+\)\s*)");
  s = std::regex_replace(s, index_prefix, "");
  std::smatch m;
  static const std::regex exact(R"(^(\d{4})$)");
  static const std::regex range(R"(^(\d{4})\s*(?:-|to)\s*(\d{4})$)");
  static const std::regex open_end(R"(^(\d{4})\s*(?:-|to)\s*(?:now|present|today)$)");
  static const std::regex before(R"(^(?:before|pre|pre-)\s*(\d{4})$)");
  static const std::regex century(R"(^(\d{1,2})(?:st|nd|rd|th)\s+century$)");
  try {
    if (std::regex_match(s, m, exact)) return YearRange::exact(std::stoi(m[1]));
    if (std::regex_match(s, m, range)) return {std::stoi(m[1]), std::stoi(m[2])};
    if (std::regex_match(s, m, open_end)) return {std::stoi(m[1]), current_year};
    if (std::regex_match(s, m, before)) return {1000, std::stoi(m[1]) - 1};
    if (std::regex_match(s, m, century)) {
      const int n = std::stoi(m[1]);
      if (n >= 1) return {(n - 1) * 100 + 1, n * 100};
    }
  } catch (const ValidationError& e) {
    throw ParseError("age '" + std::string(payload) + "': " + e.what());
  }
  throw ParseError("unrecognized age '" + std::string(payload) + "'");
}

double parse_lighting(std::string_view payload) {
  const std::string s = tidy(payload);
  std::smatch m;
  static const std::regex none(R"(^(?:\(\d+\)\s*)?no low[ -]energy lighting$)");
  static const std::regex share(R"(^(?:\(\d+\)\s*)?low[ -]energy in (\d+(?:\.\d+)?)\s*%$)");
  static const std::regex bare(R"(^(\d+(?:\.\d+)?)\s*%?$)");
  double pct = -1;
  if (std::regex_match(s, none)) pct = 0;
  else if (std::regex_match(s, m, share) || std::regex_match(s, m, bare)) pct = std::stod(m[1]);
  if (pct < 0 || pct > 100) throw ParseError("unrecognized lighting '" + std::string(payload) + "'");
  return pct;
}

std::size_t parse_categorical(std::string_view payload, std::span<const std::string> options) {
  if (options.empty()) throw ContractViolation("parse_categorical needs options");
  const auto found = candidates(payload, options);
  if (found.size() != 1)
    throw ParseError(std::string(found.empty() ? "no option matches '" : "several options match '") +
                     std::string(payload) + "'");
  return found.front();
}

HeatingClass parse_heating(std::string_view payload) {
  const std::string s = trim(payload);
  for (auto c : kHeatingClasses)
    if (s == to_string(c)) return c;
  return parse_aliased<HeatingClass>(payload, kHeatingAliases, "heating");
}

WindowClass parse_windows(std::string_view payload) {
  const std::string s = trim(payload);
  for (auto c : kWindowClasses)
    if (s == to_string(c)) return c;
  return parse_aliased<WindowClass>(payload, kWindowAliases, "windows");
}

EnergyRange parse_numeric(std::string_view payload) {
  std::string s = tidy(payload);
  static const std::regex units(R"(kwh\s*/\s*m\s*(?:2|²|\^2)|kwh|w\s*/\s*m\s*(?:2|²|\^2)\s*k|per\s+m(?:etre|eter)?\s*(?:squared|2)?|m2|m²)");
  s = std::regex_replace(s, units, " ");
  static const std::regex thousands(R"((\d),(\d{3}))");
  s = std::regex_replace(s, thousands, "$1$2");
  static const std::regex number(R"((\d+(?:\.\d+)?)(?:\s*(?:-|to)\s*(\d+(?:\.\d+)?))?)");
  std::smatch m;
  if (!std::regex_search(s, m, number)) throw ParseError("no number in '" + std::string(payload) + "'");
  const double a = std::stod(m[1]);
  if (!m[2].matched) return {a, a};
  const double b = std::stod(m[2]);
  return {std::min(a, b), std::max(a, b)};
}

DataEstimate parse_estimate(DataItem item, std::string_view payload, int current_year) {
  switch (item) {
    case DataItem::building_age: return parse_age(payload, current_year);
    case DataItem::lighting: return LightingPercent{parse_lighting(payload)};
    case DataItem::heating: return parse_heating(payload);
    case DataItem::windows: return parse_windows(payload);
    case DataItem::windows_uvalue: {
      const auto r = parse_numeric(payload);
      if (r.start != r.end) return UValue{(r.start + r.end) / 2};
      return UValue{r.start};
    }
    case DataItem::energy: return parse_numeric(payload);
  }
  throw ContractViolation("unknown data item");
}

}  // namespace clear
