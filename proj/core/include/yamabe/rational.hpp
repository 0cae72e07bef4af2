#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

#include "yamabe/errors.hpp"

namespace yamabe {

// Exact arithmetic everywhere the cohomology lives. cpp_rational keeps the
// fraction reduced with a positive denominator after every operation.
using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational make_rational(const Integer& num, const Integer& den) {
  if (den == 0) throw InputError("rational with zero denominator");
  Rational r(num);
  r /= Rational(den);
  return r;
}

/// Parses "n" or "n/d" (optionally signed). Throws InputError on anything else.
inline Rational parse_rational(const std::string& text) {
  if (text.empty()) throw InputError("empty rational literal");
  for (char c : text) {
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '/' || c == '-' || c == '+')) {
      throw InputError("cannot parse rational literal '" + text + "'");
    }
  }
  try {
    return Rational(text);
  } catch (const std::exception&) {
    throw InputError("cannot parse rational literal '" + text + "'");
  }
}

/// "n" when the value is integral, "n/d" otherwise; denominator always positive.
inline std::string to_string(const Rational& q) { return q.str(); }

inline bool is_integer(const Rational& q) { return denominator(q) == 1; }

inline Integer to_integer(const Rational& q) {
  if (!is_integer(q)) throw InputError("expected an integer, got " + q.str());
  return numerator(q);
}

inline Integer floor_to_integer(const Rational& q) {
  Integer num = numerator(q), den = denominator(q);
  Integer f = num / den;  // truncates toward zero
  if (num < 0 && f * den != num) --f;
  return f;
}

/// Representative of q mod 1 in [0, 1).
inline Rational mod_one(const Rational& q) { return q - Rational(floor_to_integer(q)); }

inline Rational factorial(long n) {
  Integer f = 1;
  for (long i = 2; i <= n; ++i) f *= i;
  return Rational(f);
}

}  // namespace yamabe
