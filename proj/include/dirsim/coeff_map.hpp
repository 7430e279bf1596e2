#pragma once

#include <algorithm>
#include <vector>

#include "dirsim/simplex.hpp"

namespace dirsim {

/// Relative tolerance on the equal-ratio condition (b/kappa)(1-S).
inline constexpr double kConstraintTolerance = 1e-12;

/// Spread of (b_a/kappa_a)(1-S_a) across components, relative to their mean.
/// Zero for a single free component.
inline double validate_constraint(const SdeCoeffs& c) {
  const auto b = c.b();
  const auto kappa = c.kappa();
  const auto s = c.s();
  double lo = b[0] / kappa[0] * (1.0 - s[0]);
  double hi = lo;
  double sum = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double r = b[i] / kappa[i] * (1.0 - s[i]);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
    sum += r;
  }
  return (hi - lo) / (sum / static_cast<double>(b.size()));
}

inline bool satisfies_constraint(const SdeCoeffs& c) {
  return validate_constraint(c) <= kConstraintTolerance;
}

/// omega_a = (b_a/kappa_a) S_a for the free components and
/// omega_N = (b_1/kappa_1)(1 - S_1). Throws ConstraintViolated when the ratios
/// disagree, since no Dirichlet law is then invariant.
inline DirichletParams forward_omega(const SdeCoeffs& c) {
  const double deviation = validate_constraint(c);
  if (deviation > kConstraintTolerance) throw ConstraintViolated(deviation);
  const auto b = c.b();
  const auto kappa = c.kappa();
  const auto s = c.s();
  std::vector<double> omega(b.size() + 1);
  for (std::size_t i = 0; i < b.size(); ++i) omega[i] = b[i] / kappa[i] * s[i];
  omega.back() = b[0] / kappa[0] * (1.0 - s[0]);
  return DirichletParams::make(std::move(omega));
}

/// Coefficients producing the invariant `w` for a chosen diffusion scale
/// kappa: b_a = kappa_a (omega_a + omega_N), S_a = omega_a / (omega_a + omega_N).
inline SdeCoeffs inverse_coeffs(const DirichletParams& w, std::span<const double> kappa) {
  if (kappa.size() + 1 != w.dimension())
    throw DimensionMismatch("kappa must have N-1 components");
  const double omega_last = w.omega().back();
  std::vector<double> b(kappa.size()), s(kappa.size());
  for (std::size_t i = 0; i < kappa.size(); ++i) {
    const double pair = w[i] + omega_last;
    b[i] = kappa[i] * pair;
    s[i] = w[i] / pair;
  }
  return SdeCoeffs::make(std::move(b), std::vector<double>(kappa.begin(), kappa.end()),
                         std::move(s));
}

}  // namespace dirsim
