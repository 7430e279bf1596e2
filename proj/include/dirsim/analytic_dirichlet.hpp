#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "dirsim/simplex.hpp"
#include "dirsim/special_functions.hpp"

namespace dirsim {

namespace detail {

inline void require_same_dimension(const DirichletParams& w, const SimplexState& s) {
  if (w.dimension() != s.dimension())
    throw DimensionMismatch("omega has " + std::to_string(w.dimension()) +
                            " components but the state has " + std::to_string(s.dimension()));
}

// Sum of (omega_a - 1) ln Y_a with the boundary conventions shared by the
// density and the potential: a zero component contributes -inf when its
// exponent is positive, nothing when it is zero, and is an error otherwise.
inline double weighted_log_sum(const DirichletParams& w, const SimplexState& s) {
  require_same_dimension(w, s);
  double acc = 0.0;
  bool vanishes = false;
  for (std::size_t a = 0; a < w.dimension(); ++a) {
    const double y = s[a];
    const double exponent = w[a] - 1.0;
    if (y <= 0.0) {
      if (exponent < 0.0)
        throw BoundaryDivergence("density diverges: Y_" + std::to_string(a) +
                                 " = 0 with omega < 1");
      if (exponent > 0.0) vanishes = true;
      continue;
    }
    acc += exponent * std::log(y);
  }
  return vanishes ? -std::numeric_limits<double>::infinity() : acc;
}

}  // namespace detail

/// ln Gamma(omega_0) - sum ln Gamma(omega_a).
inline double log_normalization(const DirichletParams& w) {
  double v = log_gamma(w.total());
  for (double x : w.omega()) v -= log_gamma(x);
  return v;
}

/// Log density of the Dirichlet distribution at s. Returns -inf on a face
/// where the density vanishes; throws BoundaryDivergence where it is unbounded.
inline double log_pdf(const DirichletParams& w, const SimplexState& s) {
  return log_normalization(w) + detail::weighted_log_sum(w, s);
}

inline double pdf(const DirichletParams& w, const SimplexState& s) {
  return std::exp(log_pdf(w, s));
}

/// Scalar potential phi = -sum (omega_a - 1) ln Y_a, so that
/// exp(-phi) is the unnormalized density.
inline double potential(const DirichletParams& w, const SimplexState& s) {
  return -detail::weighted_log_sum(w, s);
}

/// Gradient of ln D with respect to the free components:
/// (omega_b - 1)/Y_b - (omega_N - 1)/Y_N. Requires an interior point.
inline std::vector<double> log_pdf_gradient(const DirichletParams& w, const SimplexState& s) {
  detail::require_same_dimension(w, s);
  const std::size_t free = s.dimension() - 1;
  const double y_last = s.last();
  for (std::size_t a = 0; a < s.dimension(); ++a)
    if (!(s[a] > 0.0)) throw BoundaryDivergence("gradient needs an interior point");
  const double tail = (w.omega().back() - 1.0) / y_last;
  std::vector<double> g(free);
  for (std::size_t b = 0; b < free; ++b) g[b] = (w[b] - 1.0) / s[b] - tail;
  return g;
}

using AnalyticMoments = MomentReport;

/// Stationary means omega_a/omega_0 and second central moments
/// (omega_a delta_ab omega_0 - omega_a omega_b) / (omega_0^2 (omega_0 + 1)).
inline AnalyticMoments analytic_moments(const DirichletParams& w) {
  const std::size_t n = w.dimension();
  const double total = w.total();
  const double denom = total * total * (total + 1.0);
  AnalyticMoments m{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t a = 0; a < n; ++a) {
    m.mean[a] = w[a] / total;
    for (std::size_t b = 0; b < n; ++b)
      m.second_central(a, b) =
          a == b ? w[a] * (total - w[a]) / denom : -w[a] * w[b] / denom;
  }
  return m;
}

/// Shapes (omega_a, omega_0 - omega_a) of the Beta marginal of component a.
inline std::pair<double, double> marginal_beta_params(const DirichletParams& w, std::size_t alpha) {
  if (alpha >= w.dimension()) throw InvalidArgument("component index out of range");
  return {w[alpha], w.total() - w[alpha]};
}

}  // namespace dirsim
