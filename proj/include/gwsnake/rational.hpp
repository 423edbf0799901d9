#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace gwsnake {

using Rational = mpq_class;
using BigInt = mpz_class;

// Parses "p/q", an integer, or a plain decimal such as "0.25" or "-1.5e-2"
// into an exact rational. Throws ModelError on malformed input.
Rational parse_rational(std::string_view text);

// Canonical "p/q" (or "p" when q == 1).
std::string to_string(const Rational& q);

inline double to_double(const Rational& q) { return q.get_d(); }

Rational factorial(unsigned n);

}  // namespace gwsnake
