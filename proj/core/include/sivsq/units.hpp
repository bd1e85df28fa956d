#pragma once

#include <string_view>

namespace sivsq {

// "500 kHz" -> 2 pi 5e5 rad/s; "rad/s" or no suffix -> rad/s
double parse_frequency(std::string_view text);

// "20 us" -> 2e-5 s; s, ms, us, µs, ns; no suffix -> seconds
double parse_time(std::string_view text);

double parse_real(std::string_view text);
int parse_int(std::string_view text);

}  // namespace sivsq
