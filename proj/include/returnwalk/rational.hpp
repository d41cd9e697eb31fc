#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace rw {

using Rational = mpq_class;
using BigInt = mpz_class;

// Parses "num/den", an integer, or a plain decimal ("0.25", "-1.5e-3") into
// an exact rational. Throws std::invalid_argument on malformed input.
Rational parse_rational(std::string_view text);

// Canonical "num/den" form; integers are written with "/1" omitted.
std::string format_rational(const Rational& q);

double to_double(const Rational& q);

// Shortest decimal string that round-trips to x, read back as a rational.
Rational rational_from_double(double x);

}  // namespace rw
