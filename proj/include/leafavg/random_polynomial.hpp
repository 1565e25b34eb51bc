#pragma once

#include <random>

#include "leafavg/polynomial.hpp"

namespace leafavg {

/// Homogeneous polynomial with `terms` random monomials of degree d and small
/// nonzero coefficients (integers, or p/q with q <= 3 in rational mode).
template <class S, class Rng>
Polynomial<S> random_homogeneous(std::size_t dim, unsigned d, std::size_t terms, Rng& rng) {
  const auto basis = monomial_basis(dim, d);
  std::uniform_int_distribution<std::size_t> pick(0, basis.size() - 1);
  std::uniform_int_distribution<int> num(1, 5), sign(0, 1), den(1, 3);
  Polynomial<S> p(dim);
  for (std::size_t k = 0; k < terms; ++k) {
    const int n = num(rng) * (sign(rng) ? 1 : -1);
    const int q = den(rng);
    p += Polynomial<S>::monomial(basis[pick(rng)], S(n) / S(q));
  }
  if (p.is_zero()) p = Polynomial<S>::monomial(basis.front(), S(1));
  return p;
}

}  // namespace leafavg
