#pragma once

#include <string>
#include <string_view>

#include <gmpxx.h>

namespace experts {

// Exact loss values. Every recursion step is a sum of successor values divided by
// a subset size, so the values stay rational.
using Rational = mpq_class;

// "num/den", always with an explicit denominator ("1/1" for one).
std::string to_fraction_string(const Rational& q);

// Inverse of to_fraction_string. Throws std::invalid_argument on anything else.
Rational parse_fraction(std::string_view text);

inline double to_double(const Rational& q) { return q.get_d(); }

// Fixed-point decimal with `places` digits after the point.
std::string to_decimal(const Rational& q, int places = 6);
std::string to_decimal(double x, int places = 6);

// Exact value of a finite double.
Rational exact_rational(double x);

}  // namespace experts
