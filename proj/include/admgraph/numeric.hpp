#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>

namespace admgraph {

using Rational = mpq_class;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// Raised when an exhaustive search exceeds its node allowance.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

enum class NumericKind { exact, floating };

struct NumericMode {
  NumericKind kind = NumericKind::exact;
  double epsilon = 1e-9;

  static NumericMode exact_rational() { return {}; }
  static NumericMode floating_point(double eps = 1e-9) { return {NumericKind::floating, eps}; }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline mpz_class parse_integer(std::string_view text) {
  text = trim(text);
  std::string s(text);
  if (!s.empty() && s.front() == '+') s.erase(0, 1);
  if (s.empty() || s == "-") throw ParseError("empty integer in numeric literal");
  for (std::size_t i = (s.front() == '-') ? 1 : 0; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') throw ParseError("malformed integer '" + std::string(text) + "'");
  }
  return mpz_class(s, 10);
}

/// Exact value of a decimal literal such as "-1.25e-3".
inline Rational parse_decimal(std::string_view text) {
  text = trim(text);
  if (text.empty()) throw ParseError("empty numeric literal");
  bool negative = false;
  if (text.front() == '+' || text.front() == '-') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  long exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    auto exp_text = text.substr(e + 1);
    if (!exp_text.empty() && exp_text.front() == '+') exp_text.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(exp_text.data(), exp_text.data() + exp_text.size(), exponent);
    if (ec != std::errc{} || ptr != exp_text.data() + exp_text.size()) {
      throw ParseError("malformed exponent in '" + std::string(text) + "'");
    }
    text = text.substr(0, e);
  }
  std::string digits;
  bool seen_point = false;
  bool seen_digit = false;
  for (char c : text) {
    if (c == '.' && !seen_point) {
      seen_point = true;
    } else if (c >= '0' && c <= '9') {
      digits.push_back(c);
      seen_digit = true;
      if (seen_point) --exponent;
    } else {
      throw ParseError("malformed number '" + std::string(text) + "'");
    }
  }
  if (!seen_digit) throw ParseError("malformed number '" + std::string(text) + "'");
  mpz_class numerator(digits, 10);
  if (negative) numerator = -numerator;
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
  Rational value = exponent >= 0 ? Rational(mpz_class(numerator * scale)) : Rational(numerator, scale);
  value.canonicalize();
  return value;
}

inline std::string shortest_double(double v) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, v);
  if (ec != std::errc{}) throw Error("cannot format floating value");
  return std::string(buffer, ptr);
}

}  // namespace detail

template <typename T>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
  static constexpr bool is_exact = true;

  static Rational from_int(long v) { return Rational(v); }

  /// Accepts "p/q", integers and decimal literals; the result is exact.
  static Rational parse(std::string_view text) {
    text = detail::trim(text);
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
      mpz_class num = detail::parse_integer(text.substr(0, slash));
      mpz_class den = detail::parse_integer(text.substr(slash + 1));
      if (den == 0) throw ParseError("zero denominator in '" + std::string(text) + "'");
      Rational value(num, den);
      value.canonicalize();
      return value;
    }
    return detail::parse_decimal(text);
  }

  /// Converts through the shortest round-trip decimal, so 0.1 becomes 1/10.
  static Rational from_double(double v) {
    if (!std::isfinite(v)) throw ParseError("non-finite number");
    return detail::parse_decimal(detail::shortest_double(v));
  }

  static std::string format(const Rational& v) {
    if (v.get_den() == 1) return v.get_num().get_str();
    return v.get_num().get_str() + "/" + v.get_den().get_str();
  }

  static double to_double(const Rational& v) { return v.get_d(); }
};

template <>
struct ScalarTraits<double> {
  static constexpr bool is_exact = false;

  static double from_int(long v) { return static_cast<double>(v); }

  static double parse(std::string_view text) {
    text = detail::trim(text);
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
      return ScalarTraits<Rational>::parse(text).get_d();
    }
    return detail::parse_decimal(text).get_d();
  }

  static double from_double(double v) {
    if (!std::isfinite(v)) throw ParseError("non-finite number");
    return v;
  }

  static std::string format(double v) { return detail::shortest_double(v); }

  static double to_double(double v) { return v; }
};

template <typename S>
inline constexpr bool is_exact_v = ScalarTraits<S>::is_exact;

template <typename S>
S abs_value(const S& v) {
  if constexpr (is_exact_v<S>) {
    return S(abs(v));
  } else {
    return std::fabs(v);
  }
}

/// Sign with a tolerance band around zero in floating mode.
template <typename S>
int sign_of(const S& v, double epsilon = 1e-9) {
  if constexpr (is_exact_v<S>) {
    return sgn(v);
  } else {
    if (std::fabs(v) <= epsilon) return 0;
    return v > 0 ? 1 : -1;
  }
}

template <typename S>
bool approx_equal(const S& a, const S& b, double epsilon = 1e-9) {
  if constexpr (is_exact_v<S>) {
    return a == b;
  } else {
    double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
    return std::fabs(a - b) <= epsilon * scale;
  }
}

template <typename S>
double to_double(const S& v) {
  return ScalarTraits<S>::to_double(v);
}

/// Works for built-in arithmetic types as well as the scalar types above.
template <typename V>
double to_double_value(const V& v) {
  if constexpr (std::is_arithmetic_v<V>) {
    return static_cast<double>(v);
  } else {
    return ScalarTraits<V>::to_double(v);
  }
}

template <typename S>
std::string format_scalar(const S& v) {
  return ScalarTraits<S>::format(v);
}

template <typename S>
S parse_scalar(std::string_view text) {
  return ScalarTraits<S>::parse(text);
}

}  // namespace admgraph
