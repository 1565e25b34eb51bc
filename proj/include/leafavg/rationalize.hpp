#pragma once

#include <algorithm>
#include <cmath>

#include "leafavg/polynomial.hpp"

namespace leafavg {

/// Closest rational to x with denominator <= max_denominator (continued
/// fractions with the semiconvergent correction).
inline Rational nearest_rational(const Rational& x, const BigInt& max_denominator) {
  require(max_denominator >= 1, ErrorKind::ConfigError, "max_denominator must be >= 1");
  BigInt n = numerator(x);
  BigInt d = denominator(x);
  if (d <= max_denominator) return x;
  BigInt p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  while (true) {
    // floor division for possibly negative n
    BigInt a = n / d;
    if (n % d != 0 && ((n < 0) != (d < 0))) a -= 1;
    BigInt q2 = q0 + a * q1;
    if (q2 > max_denominator) break;
    BigInt p2 = p0 + a * p1;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    BigInt r = n - a * d;
    n = d;
    d = r;
    if (d == 0) break;
  }
  if (q1 == 0) return Rational(p0, q0);
  const BigInt k = (max_denominator - q0) / q1;
  const Rational bound1(p0 + k * p1, q0 + k * q1);
  const Rational bound2(p1, q1);
  auto dist = [&](const Rational& r) { return r > x ? Rational(r - x) : Rational(x - r); };
  return dist(bound2) <= dist(bound1) ? bound2 : bound1;
}

inline Rational nearest_rational(double x, long long max_denominator) {
  return nearest_rational(Rational(x), BigInt(max_denominator));
}

struct RationalizedPolynomial {
  Polynomial<Rational> poly;
  double max_perturbation = 0.0;
};

/// Snaps every coefficient to its nearest rational with bounded denominator.
/// Lossy; the largest coefficient change is reported.
inline RationalizedPolynomial rationalize(const Polynomial<double>& p, long long max_denominator) {
  RationalizedPolynomial out{Polynomial<Rational>(p.dim()), 0.0};
  for (const auto& [e, c] : p.terms()) {
    Rational r = nearest_rational(c, max_denominator);
    out.max_perturbation = std::max(out.max_perturbation, std::fabs(r.convert_to<double>() - c));
    out.poly.add_term(e, r);
  }
  return out;
}

}  // namespace leafavg
