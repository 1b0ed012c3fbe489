#include "hcstretch/rational.hpp"

#include "hcstretch/errors.hpp"

namespace hcstretch {

std::string to_fraction_string(const Rational& r) {
  return boost::multiprecision::numerator(r).str() + "/" +
         boost::multiprecision::denominator(r).str();
}

Rational parse_fraction(std::string_view text) {
  auto valid_int = [](std::string_view s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') return false;
    }
    return true;
  };
  const auto slash = text.find('/');
  const auto num_text = text.substr(0, slash);
  const auto den_text =
      slash == std::string_view::npos ? std::string_view("1") : text.substr(slash + 1);
  if (!valid_int(num_text) || !valid_int(den_text)) {
    throw ParseError("not a fraction: '" + std::string(text) + "'");
  }
  const BigInt num{std::string(num_text)};
  const BigInt den{std::string(den_text)};
  if (den == 0) throw ParseError("zero denominator in '" + std::string(text) + "'");
  return Rational(num, den);
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

BigInt pow2(unsigned e) {
  BigInt v = 1;
  v <<= e;
  return v;
}

}  // namespace hcstretch
