#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <type_traits>

#include "leafavg/error.hpp"

namespace leafavg {

/// Exact rational scalar (GMP backed, expression templates disabled so that
/// `auto` and generic code behave like ordinary value types).
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;
using BigInt = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                             boost::multiprecision::et_off>;

/// Minimal complex number over an arbitrary field, used to complexify torus
/// averages without leaving exact arithmetic.
template <class S>
struct Complex {
  S re{};
  S im{};

  Complex() = default;
  Complex(S r, S i = S(0)) : re(std::move(r)), im(std::move(i)) {}

  friend Complex operator+(const Complex& a, const Complex& b) { return {a.re + b.re, a.im + b.im}; }
  friend Complex operator-(const Complex& a, const Complex& b) { return {a.re - b.re, a.im - b.im}; }
  friend Complex operator-(const Complex& a) { return {-a.re, -a.im}; }
  friend Complex operator*(const Complex& a, const Complex& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  Complex& operator+=(const Complex& b) { re += b.re; im += b.im; return *this; }
  Complex& operator*=(const Complex& b) { return *this = *this * b; }
  friend bool operator==(const Complex& a, const Complex& b) { return a.re == b.re && a.im == b.im; }
  Complex conj() const { return {re, -im}; }
};

enum class ScalarMode { ExactRational, Floating };

constexpr std::string_view to_string(ScalarMode m) {
  return m == ScalarMode::ExactRational ? "exact-rational" : "floating";
}

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static constexpr ScalarMode mode = ScalarMode::ExactRational;
  static bool is_zero(const Rational& x) { return x == 0; }
  static double to_double(const Rational& x) { return x.convert_to<double>(); }
  static Rational abs(const Rational& x) { return x < 0 ? Rational(-x) : x; }
};

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  static constexpr ScalarMode mode = ScalarMode::Floating;
  static bool is_zero(double x) { return x == 0.0; }
  static double to_double(double x) { return x; }
  static double abs(double x) { return std::fabs(x); }
};

template <class S>
struct ScalarTraits<Complex<S>> {
  static constexpr bool exact = ScalarTraits<S>::exact;
  static bool is_zero(const Complex<S>& x) {
    return ScalarTraits<S>::is_zero(x.re) && ScalarTraits<S>::is_zero(x.im);
  }
};

template <class S>
concept ExactScalar = ScalarTraits<S>::exact;

template <class S>
double to_double(const S& x) {
  return ScalarTraits<S>::to_double(x);
}

/// Explicit conversion between scalar modes. Rational -> double rounds;
/// double -> Rational is the exact binary value of the double.
template <class To, class From>
To scalar_cast(const From& x) {
  if constexpr (std::is_same_v<To, From>) {
    return x;
  } else if constexpr (std::is_same_v<To, double>) {
    return ScalarTraits<From>::to_double(x);
  } else {
    static_assert(std::is_same_v<To, Rational> && std::is_same_v<From, double>);
    return Rational(x);
  }
}

inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline std::string format_scalar(const Rational& x) { return x.str(); }
inline std::string format_scalar(double x) { return format_double(x); }

/// Parses "p", "p/q" or a decimal literal ("0.25", "1e-3").
template <class S>
S parse_scalar(std::string_view text) {
  require(!text.empty(), ErrorKind::ParseError, "empty number");
  const auto slash = text.find('/');
  if constexpr (std::is_same_v<S, Rational>) {
    if (slash != std::string_view::npos) {
      BigInt num(std::string(text.substr(0, slash)));
      BigInt den(std::string(text.substr(slash + 1)));
      require(den != 0, ErrorKind::ParseError, "zero denominator in '" + std::string(text) + "'");
      return Rational(num, den);
    }
    const bool decimal = text.find_first_of(".eE") != std::string_view::npos;
    if (!decimal) return Rational(BigInt(std::string(text)));
    // Exact decimal: mantissa digits over a power of ten.
    std::string s(text);
    long long exp10 = 0;
    if (auto e = s.find_first_of("eE"); e != std::string::npos) {
      exp10 = std::stoll(s.substr(e + 1));
      s = s.substr(0, e);
    }
    bool neg = false;
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
      neg = s[0] == '-';
      s = s.substr(1);
    }
    if (auto dot = s.find('.'); dot != std::string::npos) {
      exp10 -= static_cast<long long>(s.size() - dot - 1);
      s.erase(dot, 1);
    }
    require(!s.empty() && s.find_first_not_of("0123456789") == std::string::npos,
            ErrorKind::ParseError, "malformed number '" + std::string(text) + "'");
    Rational value{BigInt(s)};
    BigInt ten_pow = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(std::llabs(exp10)));
    value = exp10 >= 0 ? value * Rational(ten_pow) : value / Rational(ten_pow);
    return neg ? Rational(-value) : value;
  } else {
    if (slash != std::string_view::npos) {
      return parse_scalar<double>(text.substr(0, slash)) / parse_scalar<double>(text.substr(slash + 1));
    }
    double out = 0.0;
    const char* first = text.data();
    if (*first == '+') ++first;
    auto res = std::from_chars(first, text.data() + text.size(), out);
    require(res.ec == std::errc() && res.ptr == text.data() + text.size(), ErrorKind::ParseError,
            "malformed number '" + std::string(text) + "'");
    return out;
  }
}

}  // namespace leafavg
