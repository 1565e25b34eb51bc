#pragma once

#include <cmath>
#include <deque>
#include <random>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "leafavg/linalg.hpp"
#include "leafavg/polynomial.hpp"
#include "leafavg/sphere.hpp"

namespace leafavg {

/// Orbit foliation of a finite orthogonal group acting on R^{n+1}.
template <class S>
class FiniteGroupModel {
 public:
  using Scalar = S;

  FiniteGroupModel(std::size_t dim, std::vector<Matrix<S>> generators, std::vector<Matrix<S>> elements)
      : dim_(dim), generators_(std::move(generators)), elements_(std::move(elements)) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t order() const noexcept { return elements_.size(); }
  const std::vector<Matrix<S>>& generators() const noexcept { return generators_; }
  const std::vector<Matrix<S>>& elements() const noexcept { return elements_; }

 private:
  std::size_t dim_;
  std::vector<Matrix<S>> generators_;
  std::vector<Matrix<S>> elements_;
};

struct ClosureOptions {
  std::size_t max_group_size = 10000;
  double tol_orth = 1e-9;
  double tol_dedup = 1e-9;
};

/// Breadth-first closure of the generators under multiplication.
template <class S>
FiniteGroupModel<S> group_closure(const std::vector<Matrix<S>>& generators, ClosureOptions opts = {}) {
  require(!generators.empty(), ErrorKind::ConfigError, "group needs at least one generator");
  require(opts.max_group_size >= 1, ErrorKind::ConfigError, "max_group_size must be >= 1");
  const std::size_t n = generators.front().rows();
  const auto id = Matrix<S>::identity(n);
  for (std::size_t k = 0; k < generators.size(); ++k) {
    const auto& g = generators[k];
    require(g.rows() == n && g.cols() == n, ErrorKind::DimensionMismatch,
            "generator " + std::to_string(k) + " is not " + std::to_string(n) + "x" + std::to_string(n));
    const auto gtg = g.transpose() * g;
    bool orth;
    if constexpr (ScalarTraits<S>::exact) {
      orth = gtg == id;
    } else {
      orth = gtg.max_abs_diff(id) <= opts.tol_orth;
    }
    require(orth, ErrorKind::NonOrthogonalGenerator, "generator " + std::to_string(k) + " fails g^T g = I");
  }

  std::vector<Matrix<S>> elements{id};
  std::set<Matrix<S>> seen{id};  // exact dedup
  auto known = [&](const Matrix<S>& m) {
    if constexpr (ScalarTraits<S>::exact) {
      return seen.count(m) > 0;
    } else {
      for (const auto& e : elements)
        if (e.max_abs_diff(m) <= opts.tol_dedup) return true;
      return false;
    }
  };
  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    const std::size_t idx = queue.front();
    queue.pop_front();
    for (const auto& g : generators) {
      Matrix<S> next = g * elements[idx];
      if (known(next)) continue;
      if (elements.size() >= opts.max_group_size)
        throw Error(ErrorKind::GroupTooLarge,
                    "closure exceeds max_group_size = " + std::to_string(opts.max_group_size));
      if constexpr (ScalarTraits<S>::exact) seen.insert(next);
      elements.push_back(std::move(next));
      queue.push_back(elements.size() - 1);
    }
  }
  return FiniteGroupModel<S>(n, generators, std::move(elements));
}

/// Reynolds operator (1/|G|) sum_g f(g x).
template <class S>
Polynomial<S> reynolds(const FiniteGroupModel<S>& model, const Polynomial<S>& f) {
  require(f.dim() == model.dim(), ErrorKind::DimensionMismatch, "polynomial and model dimensions differ");
  Polynomial<S> acc(f.dim());
  if (f.is_zero()) return acc;
  for (const auto& g : model.elements()) acc += compose_linear(f, g.data());
  acc *= S(1) / S(static_cast<unsigned>(model.order()));
  return acc;
}

template <class S>
double leaf_distance(const FiniteGroupModel<S>& model, std::span<const double> p, std::span<const double> q) {
  require(p.size() == model.dim() && q.size() == model.dim(), ErrorKind::DimensionMismatch,
          "point dimension differs from model");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& g : model.elements()) best = std::min(best, distance(g.template apply<double>(p), q));
  return best;
}

template <class S>
bool same_leaf(const FiniteGroupModel<S>& model, std::span<const double> p, std::span<const double> q, double tol) {
  return leaf_distance(model, p, q) < tol;
}

/// Random leaf-mate g p for a uniformly chosen group element.
template <class S, class Rng>
std::vector<double> leaf_mate(const FiniteGroupModel<S>& model, std::span<const double> p, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, model.order() - 1);
  return model.elements()[pick(rng)].template apply<double>(p);
}

template <class S>
FiniteGroupModel<double> to_floating(const FiniteGroupModel<S>& model) {
  auto conv = [](const Matrix<S>& m) {
    std::vector<double> d;
    for (const auto& v : m.data()) d.push_back(to_double(v));
    return Matrix<double>(m.rows(), m.cols(), std::move(d));
  };
  std::vector<Matrix<double>> gens, elems;
  for (const auto& g : model.generators()) gens.push_back(conv(g));
  for (const auto& g : model.elements()) elems.push_back(conv(g));
  return FiniteGroupModel<double>(model.dim(), std::move(gens), std::move(elems));
}

}  // namespace leafavg
