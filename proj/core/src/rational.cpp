#include "cml/rational.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <stdexcept>

namespace cml {
namespace {

mpz_class parse_integer(std::string_view digits, std::string_view whole) {
  if (digits.empty()) {
    throw std::invalid_argument("malformed number: '" + std::string(whole) + "'");
  }
  for (char c : digits) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw std::invalid_argument("malformed number: '" + std::string(whole) + "'");
    }
  }
  return mpz_class(std::string(digits), 10);
}

mpz_class power_of_ten(unsigned long e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, e);
  return r;
}

Rational parse_decimal(std::string_view text, std::string_view whole) {
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  long exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_text = text.substr(e + 1);
    text = text.substr(0, e);
    auto [ptr, ec] = std::from_chars(exp_text.data() + (exp_text.starts_with('+') ? 1 : 0),
                                     exp_text.data() + exp_text.size(), exponent);
    if (ec != std::errc() || ptr != exp_text.data() + exp_text.size()) {
      throw std::invalid_argument("malformed exponent in '" + std::string(whole) + "'");
    }
  }
  std::string digits;
  long fraction_digits = 0;
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    digits = std::string(text.substr(0, dot)) + std::string(text.substr(dot + 1));
    fraction_digits = static_cast<long>(text.size() - dot - 1);
  } else {
    digits = std::string(text);
  }
  Rational value(parse_integer(digits, whole));
  long shift = exponent - fraction_digits;
  if (shift > 0) {
    value *= power_of_ten(static_cast<unsigned long>(shift));
  } else if (shift < 0) {
    value /= power_of_ten(static_cast<unsigned long>(-shift));
  }
  value.canonicalize();
  return negative ? Rational(-value) : value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const std::string_view whole = text;
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational num = parse_decimal(text.substr(0, slash), whole);
    Rational den = parse_decimal(text.substr(slash + 1), whole);
    if (den == 0) throw std::invalid_argument("zero denominator in '" + std::string(whole) + "'");
    Rational q = num / den;
    return q;
  }
  return parse_decimal(text, whole);
}

Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite value cannot be made rational");
  std::array<char, 64> buffer{};
  auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), x);
  if (ec != std::errc()) throw std::invalid_argument("cannot format double");
  return parse_rational(std::string_view(buffer.data(), static_cast<std::size_t>(ptr - buffer.data())));
}

std::string to_string(const Rational& q) { return q.get_str(); }

Rational floor(const Rational& q) {
  mpz_class result;
  mpz_fdiv_q(result.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return Rational(result);
}

Rational pow(const Rational& base, unsigned exponent) {
  Rational result(1);
  Rational factor = base;
  while (exponent > 0) {
    if (exponent & 1U) result *= factor;
    factor *= factor;
    exponent >>= 1U;
  }
  return result;
}

}  // namespace cml
