#include "sivsq/units.hpp"

#include <charconv>
#include <cmath>
#include <string>
#include <utility>

#include "sivsq/errors.hpp"
#include "sivsq/model.hpp"

namespace sivsq {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::pair<double, std::string_view> number_and_suffix(std::string_view text) {
    text = trim(text);
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr == first) throw InvalidArgument("expected a number, got '" + std::string(text) + "'");
    if (!std::isfinite(v)) throw InvalidArgument("value must be finite");
    return {v, trim(std::string_view(ptr, static_cast<std::size_t>(last - ptr)))};
}

}  // namespace

double parse_frequency(std::string_view text) {
    auto [v, unit] = number_and_suffix(text);
    if (unit.empty() || unit == "rad/s") return v;
    if (unit == "Hz") return kTwoPi * v;
    if (unit == "kHz") return kTwoPi * v * 1e3;
    if (unit == "MHz") return kTwoPi * v * 1e6;
    if (unit == "GHz") return kTwoPi * v * 1e9;
    throw InvalidArgument("unknown frequency unit '" + std::string(unit) + "'");
}

double parse_time(std::string_view text) {
    auto [v, unit] = number_and_suffix(text);
    if (unit.empty() || unit == "s") return v;
    if (unit == "ms") return v * 1e-3;
    if (unit == "us" || unit == "µs") return v * 1e-6;
    if (unit == "ns") return v * 1e-9;
    throw InvalidArgument("unknown time unit '" + std::string(unit) + "'");
}

double parse_real(std::string_view text) {
    auto [v, unit] = number_and_suffix(text);
    if (!unit.empty()) throw InvalidArgument("unexpected trailing text '" + std::string(unit) + "'");
    return v;
}

int parse_int(std::string_view text) {
    text = trim(text);
    int v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw InvalidArgument("expected an integer, got '" + std::string(text) + "'");
    return v;
}

}  // namespace sivsq
