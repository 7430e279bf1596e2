#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dirsim/errors.hpp"
#include "dirsim/linalg.hpp"

namespace dirsim {

namespace detail {

inline void require_finite(std::span<const double> v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i]))
      throw InvalidArgument(std::string(what) + ": component " + std::to_string(i) +
                            " is not finite");
}

inline double sum(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace detail

/// One realization (Y_1, ..., Y_{N-1}) on the unit simplex. Only the N-1 free
/// components are stored; Y_N = 1 - sum(Y_beta) is always derived, so the
/// full vector sums to one by construction.
class SimplexState {
 public:
  /// Validates and wraps the free components. Throws NegativeComponent or
  /// SumExceedsOne; membership is checked exactly (no tolerance).
  static SimplexState make(std::vector<double> y) {
    if (y.empty()) throw InvalidArgument("a simplex state needs N >= 2 (at least one free component)");
    detail::require_finite(y, "simplex state");
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] < 0.0) throw NegativeComponent(i, y[i]);
    const double s = detail::sum(y);
    if (s > 1.0) throw SumExceedsOne(s);
    return SimplexState(std::move(y));
  }

  /// N, the number of components including the derived one.
  std::size_t dimension() const noexcept { return y_.size() + 1; }
  std::span<const double> free_components() const noexcept { return y_; }
  double last() const noexcept { return 1.0 - detail::sum(y_); }

  /// Component alpha of the full N-vector (alpha == N-1 is the derived one).
  double operator[](std::size_t alpha) const {
    return alpha < y_.size() ? y_[alpha] : last();
  }

  std::vector<double> full_vector() const {
    std::vector<double> v(y_);
    v.push_back(last());
    return v;
  }

  bool operator==(const SimplexState&) const = default;

 private:
  explicit SimplexState(std::vector<double> y) : y_(std::move(y)) {}
  std::vector<double> y_;
};

inline SimplexState make_state(std::vector<double> y) { return SimplexState::make(std::move(y)); }
inline std::vector<double> full_vector(const SimplexState& s) { return s.full_vector(); }

/// Fixed-size particle ensemble sharing one dimension N, plus the simulation
/// clock. Free components are stored contiguously per particle.
class Ensemble {
 public:
  Ensemble() = default;

  /// `particles` copies of `initial`.
  Ensemble(std::size_t particles, const SimplexState& initial)
      : dimension_(initial.dimension()) {
    values_.reserve(particles * stride());
    for (std::size_t i = 0; i < particles; ++i)
      values_.insert(values_.end(), initial.free_components().begin(),
                     initial.free_components().end());
  }

  static Ensemble from_states(std::span<const SimplexState> states) {
    if (states.empty()) throw EmptyEnsemble();
    Ensemble e;
    e.dimension_ = states.front().dimension();
    e.values_.reserve(states.size() * e.stride());
    for (const auto& s : states) {
      if (s.dimension() != e.dimension_)
        throw DimensionMismatch("ensemble states must share one dimension");
      e.values_.insert(e.values_.end(), s.free_components().begin(), s.free_components().end());
    }
    return e;
  }

  std::size_t size() const noexcept { return stride() == 0 ? 0 : values_.size() / stride(); }
  bool empty() const noexcept { return values_.empty(); }
  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t stride() const noexcept { return dimension_ == 0 ? 0 : dimension_ - 1; }

  SimplexState state(std::size_t i) const {
    auto c = free_components(i);
    return SimplexState::make(std::vector<double>(c.begin(), c.end()));
  }
  std::span<const double> free_components(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * stride(), stride());
  }
  void set_state(std::size_t i, const SimplexState& s) {
    if (s.dimension() != dimension_) throw DimensionMismatch("state dimension differs from ensemble");
    std::copy(s.free_components().begin(), s.free_components().end(),
              values_.begin() + static_cast<std::ptrdiff_t>(i * stride()));
  }

  /// Raw storage of particles [first, first + count). Writers must leave every
  /// particle on the simplex; this is how the integrator mutates disjoint
  /// ranges concurrently.
  std::span<double> unchecked_range(std::size_t first, std::size_t count) {
    return std::span<double>(values_).subspan(first * stride(), count * stride());
  }
  std::span<const double> raw() const noexcept { return values_; }

  double time = 0.0;
  std::uint64_t step_count = 0;

 private:
  std::size_t dimension_ = 0;
  std::vector<double> values_;
};

/// Dirichlet-diffusion coefficients b, kappa, S (each of length N-1).
class SdeCoeffs {
 public:
  /// Checks lengths and b > 0, kappa > 0, 0 < S < 1. The equal-ratio
  /// condition needed for a Dirichlet invariant is checked by forward_omega.
  static SdeCoeffs make(std::vector<double> b, std::vector<double> kappa, std::vector<double> s) {
    if (b.empty() || b.size() != kappa.size() || b.size() != s.size())
      throw InvalidCoefficients("b, kappa and S must be non-empty and of equal length");
    detail::require_finite(b, "b");
    detail::require_finite(kappa, "kappa");
    detail::require_finite(s, "S");
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (!(b[i] > 0.0)) throw InvalidCoefficients("b[" + std::to_string(i) + "] must be > 0");
      if (!(kappa[i] > 0.0))
        throw InvalidCoefficients("kappa[" + std::to_string(i) + "] must be > 0");
      if (!(s[i] > 0.0 && s[i] < 1.0))
        throw InvalidCoefficients("S[" + std::to_string(i) + "] must lie in (0,1)");
    }
    return SdeCoeffs(std::move(b), std::move(kappa), std::move(s));
  }

  std::size_t dimension() const noexcept { return b_.size() + 1; }
  std::span<const double> b() const noexcept { return b_; }
  std::span<const double> kappa() const noexcept { return kappa_; }
  std::span<const double> s() const noexcept { return s_; }

  bool operator==(const SdeCoeffs&) const = default;

 private:
  SdeCoeffs(std::vector<double> b, std::vector<double> kappa, std::vector<double> s)
      : b_(std::move(b)), kappa_(std::move(kappa)), s_(std::move(s)) {}
  std::vector<double> b_, kappa_, s_;
};

/// Shape vector omega of a Dirichlet distribution (length N, all positive).
class DirichletParams {
 public:
  static DirichletParams make(std::vector<double> omega) {
    if (omega.size() < 2) throw InvalidCoefficients("Dirichlet parameters need N >= 2");
    detail::require_finite(omega, "omega");
    for (std::size_t i = 0; i < omega.size(); ++i)
      if (!(omega[i] > 0.0))
        throw InvalidCoefficients("omega[" + std::to_string(i) + "] must be > 0");
    return DirichletParams(std::move(omega));
  }

  std::size_t dimension() const noexcept { return omega_.size(); }
  std::span<const double> omega() const noexcept { return omega_; }
  double operator[](std::size_t i) const { return omega_[i]; }
  double total() const noexcept { return detail::sum(omega_); }

  bool operator==(const DirichletParams&) const = default;

 private:
  explicit DirichletParams(std::vector<double> omega) : omega_(std::move(omega)) {}
  std::vector<double> omega_;
};

struct WfCoeffs {
  DirichletParams omega;
  bool operator==(const WfCoeffs&) const = default;
};

/// Jacobi-diffusion coefficients: a < 0, c > 0, pi on the open simplex.
class JacobiCoeffs {
 public:
  static JacobiCoeffs make(double a, double c, std::vector<double> pi) {
    if (!(std::isfinite(a) && a < 0.0)) throw InvalidCoefficients("Jacobi a must be < 0");
    if (!(std::isfinite(c) && c > 0.0)) throw InvalidCoefficients("Jacobi c must be > 0");
    if (pi.size() < 2) throw InvalidCoefficients("Jacobi pi needs N >= 2 components");
    detail::require_finite(pi, "pi");
    for (std::size_t i = 0; i < pi.size(); ++i)
      if (!(pi[i] > 0.0)) throw InvalidCoefficients("pi[" + std::to_string(i) + "] must be > 0");
    if (std::abs(detail::sum(pi) - 1.0) > 1e-12)
      throw InvalidCoefficients("Jacobi pi must sum to 1");
    return JacobiCoeffs(a, c, std::move(pi));
  }

  std::size_t dimension() const noexcept { return pi_.size(); }
  double a() const noexcept { return a_; }
  double c() const noexcept { return c_; }
  std::span<const double> pi() const noexcept { return pi_; }

  bool operator==(const JacobiCoeffs&) const = default;

 private:
  JacobiCoeffs(double a, double c, std::vector<double> pi) : a_(a), c_(c), pi_(std::move(pi)) {}
  double a_, c_;
  std::vector<double> pi_;
};

/// Means and second central moments over all N components.
struct MomentReport {
  std::vector<double> mean;
  Matrix second_central;

  std::size_t dimension() const noexcept { return mean.size(); }
  double variance(std::size_t alpha) const { return second_central(alpha, alpha); }
  double covariance(std::size_t alpha, std::size_t beta) const {
    return second_central(alpha, beta);
  }
};

}  // namespace dirsim
