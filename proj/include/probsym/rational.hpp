#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace probsym {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Parses `digits[.digits]` into an exact rational.
inline Rational parse_decimal(std::string_view text) {
  BigInt num = 0;
  BigInt den = 1;
  bool seen_point = false;
  bool seen_digit = false;
  for (char c : text) {
    if (c == '.') {
      if (seen_point) throw std::invalid_argument("malformed decimal literal");
      seen_point = true;
    } else if (c >= '0' && c <= '9') {
      num = num * 10 + (c - '0');
      if (seen_point) den *= 10;
      seen_digit = true;
    } else {
      throw std::invalid_argument("malformed decimal literal");
    }
  }
  if (!seen_digit) throw std::invalid_argument("malformed decimal literal");
  return Rational(num, den);
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

/// Exact decimal rendering when the denominator has only factors 2 and 5,
/// `p/q` otherwise.
inline std::string to_decimal_string(const Rational& q) {
  BigInt num = boost::multiprecision::numerator(q);
  BigInt den = boost::multiprecision::denominator(q);
  std::string sign;
  if (num < 0) {
    sign = "-";
    num = -num;
  }
  BigInt rest = den;
  unsigned twos = 0, fives = 0;
  while (rest % 2 == 0) {
    rest /= 2;
    ++twos;
  }
  while (rest % 5 == 0) {
    rest /= 5;
    ++fives;
  }
  if (rest != 1) return sign + num.str() + "/" + den.str();

  const unsigned places = twos > fives ? twos : fives;
  BigInt scale = 1;
  for (unsigned i = 0; i < places; ++i) scale *= 10;
  const BigInt scaled = num * (scale / den);
  const BigInt whole = scaled / scale;
  std::string out = sign + whole.str();
  if (places > 0) {
    std::string frac = BigInt(scaled % scale).str();
    frac.insert(0, places - frac.size(), '0');
    out += "." + frac;
  }
  return out;
}

}  // namespace probsym
