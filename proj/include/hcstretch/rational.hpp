#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <boost/multiprecision/gmp.hpp>

namespace hcstretch {

// Exact arithmetic for densities, expectations and coupling masses.
using BigInt = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;

inline Rational make_rational(std::int64_t num, std::int64_t den = 1) {
  return Rational(BigInt(num), BigInt(den));
}

inline Rational make_rational(const BigInt& num, const BigInt& den) {
  return Rational(num, den);
}

// Always "p/q", also for integers ("1/1").
std::string to_fraction_string(const Rational& r);

// Accepts "p/q" or a bare integer "p". Throws ParseError.
Rational parse_fraction(std::string_view text);

double to_double(const Rational& r);

// 2^e as an exact integer.
BigInt pow2(unsigned e);

}  // namespace hcstretch
