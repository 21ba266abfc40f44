#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

// Locale-independent number formatting and parsing built on <charconv>.
namespace eigengaze::numfmt {

// General notation with `significant` digits; 17 round-trips any double.
std::string real(double value, int significant = 17);

// Fixed notation with `decimals` digits after the point.
std::string fixed(double value, int decimals);

std::optional<double> parse_real(std::string_view text);
std::optional<std::int64_t> parse_int(std::string_view text);

}  // namespace eigengaze::numfmt
