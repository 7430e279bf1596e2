#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "dirsim/analytic_dirichlet.hpp"
#include "dirsim/coeff_map.hpp"
#include "dirsim/linalg.hpp"
#include "dirsim/simplex.hpp"

// Drift and diffusion of the diffusions on the simplex. Every process evolves
// the N-1 free components; Y_N = 1 - sum(Y) is derived. The raw kernels take
// the free components plus the precomputed Y_N so the integrator can run
// them on ensemble storage without building SimplexState objects.

namespace dirsim {

/// dY_a = (b_a/2)[S_a Y_N - (1-S_a) Y_a] dt + sqrt(kappa_a Y_a Y_N) dW_a.
/// The diffusion matrix is diagonal.
struct DirichletDiffusion {
  SdeCoeffs coeffs;

  std::size_t dimension() const noexcept { return coeffs.dimension(); }
  std::size_t factor_scratch_size() const noexcept { return 0; }

  void drift(std::span<const double> y, double y_last, std::span<double> out) const {
    const auto b = coeffs.b();
    const auto s = coeffs.s();
    for (std::size_t a = 0; a < y.size(); ++a)
      out[a] = 0.5 * b[a] * (s[a] * y_last - (1.0 - s[a]) * y[a]);
  }

  void diffusion_matrix(std::span<const double> y, double y_last, Matrix& out) const {
    const auto kappa = coeffs.kappa();
    out = Matrix(y.size(), y.size());
    for (std::size_t a = 0; a < y.size(); ++a) out(a, a) = kappa[a] * y[a] * y_last;
  }

  void diffusion_factor(std::span<const double> y, double y_last, Matrix& out) const {
    const auto kappa = coeffs.kappa();
    out = Matrix(y.size(), y.size());
    for (std::size_t a = 0; a < y.size(); ++a)
      out(a, a) = std::sqrt(std::max(0.0, kappa[a] * y[a] * y_last));
  }

  /// out += G dw
  void add_noise(std::span<const double> y, double y_last, std::span<const double> dw,
                 std::span<double> out, std::span<double> /*scratch*/) const {
    const auto kappa = coeffs.kappa();
    for (std::size_t a = 0; a < y.size(); ++a)
      out[a] += std::sqrt(std::max(0.0, kappa[a] * y[a] * y_last)) * dw[a];
  }

  /// sum_g dB_ag/dY_g; only the diagonal depends on Y_a, through Y_a Y_N.
  void diffusion_divergence(std::span<const double> y, double y_last,
                            std::span<double> out) const {
    const auto kappa = coeffs.kappa();
    for (std::size_t a = 0; a < y.size(); ++a) out[a] = kappa[a] * (y_last - y[a]);
  }
};

/// Multivariate Wright-Fisher: drift (omega_a - omega_0 Y_a)/2 and full
/// diffusion matrix B_ab = Y_a (delta_ab - Y_b), factored by Cholesky.
struct WrightFisher {
  WfCoeffs coeffs;

  std::size_t dimension() const noexcept { return coeffs.omega.dimension(); }
  std::size_t factor_scratch_size() const noexcept {
    const std::size_t m = dimension() - 1;
    return m * m;
  }

  void drift(std::span<const double> y, double /*y_last*/, std::span<double> out) const {
    const double total = coeffs.omega.total();
    for (std::size_t a = 0; a < y.size(); ++a) out[a] = 0.5 * (coeffs.omega[a] - total * y[a]);
  }

  void diffusion_matrix(std::span<const double> y, double /*y_last*/, Matrix& out) const {
    out = Matrix(y.size(), y.size());
    fill_matrix(y, out.data());
  }

  void diffusion_factor(std::span<const double> y, double y_last, Matrix& out) const {
    diffusion_matrix(y, y_last, out);
    cholesky_in_place(out.data(), y.size());
  }

  void add_noise(std::span<const double> y, double /*y_last*/, std::span<const double> dw,
                 std::span<double> out, std::span<double> scratch) const {
    const std::size_t m = y.size();
    fill_matrix(y, scratch);
    cholesky_in_place(scratch, m);
    for (std::size_t a = 0; a < m; ++a) {
      double v = 0.0;
      for (std::size_t b = 0; b <= a; ++b) v += scratch[a * m + b] * dw[b];
      out[a] += v;
    }
  }

  /// d/dY_a (Y_a - Y_a^2) - (m-1) Y_a with m free components, i.e. 1 - N Y_a.
  void diffusion_divergence(std::span<const double> y, double /*y_last*/,
                            std::span<double> out) const {
    const double n = static_cast<double>(dimension());
    for (std::size_t a = 0; a < y.size(); ++a) out[a] = 1.0 - n * y[a];
  }

 private:
  static void fill_matrix(std::span<const double> y, std::span<double> m) {
    const std::size_t n = y.size();
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) m[a * n + b] = y[a] * ((a == b ? 1.0 : 0.0) - y[b]);
  }
};

/// Multivariate Jacobi diffusion on the N-1 free components:
/// dY_a = a (Y_a - pi_a) dt + sqrt(c Y_a) dW_a - Y_a sum_b sqrt(c Y_b) dW_b.
/// The factor is taken directly from the noise terms (not triangular);
/// B = G G^T = c [delta_ab Y_a - (2 - s) Y_a Y_b] with s = sum of free Y.
struct Jacobi {
  JacobiCoeffs coeffs;

  std::size_t dimension() const noexcept { return coeffs.dimension(); }
  std::size_t factor_scratch_size() const noexcept { return 0; }

  void drift(std::span<const double> y, double /*y_last*/, std::span<double> out) const {
    const auto pi = coeffs.pi();
    for (std::size_t a = 0; a < y.size(); ++a) out[a] = coeffs.a() * (y[a] - pi[a]);
  }

  void diffusion_matrix(std::span<const double> y, double /*y_last*/, Matrix& out) const {
    const std::size_t m = y.size();
    const double s = detail::sum(y);
    out = Matrix(m, m);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b)
        out(a, b) = coeffs.c() * ((a == b ? y[a] : 0.0) - (2.0 - s) * y[a] * y[b]);
  }

  void diffusion_factor(std::span<const double> y, double /*y_last*/, Matrix& out) const {
    const std::size_t m = y.size();
    out = Matrix(m, m);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b)
        out(a, b) = (a == b ? std::sqrt(coeffs.c() * y[a]) : 0.0) -
                    y[a] * std::sqrt(coeffs.c() * y[b]);
  }

  void add_noise(std::span<const double> y, double /*y_last*/, std::span<const double> dw,
                 std::span<double> out, std::span<double> /*scratch*/) const {
    const double c = coeffs.c();
    double shared = 0.0;
    for (std::size_t b = 0; b < y.size(); ++b) shared += std::sqrt(c * std::max(0.0, y[b])) * dw[b];
    for (std::size_t a = 0; a < y.size(); ++a)
      out[a] += std::sqrt(c * std::max(0.0, y[a])) * dw[a] - y[a] * shared;
  }

  void diffusion_divergence(std::span<const double> y, double /*y_last*/,
                            std::span<double> out) const {
    const double m = static_cast<double>(y.size());
    const double s = detail::sum(y);
    for (std::size_t a = 0; a < y.size(); ++a)
      out[a] = coeffs.c() * (1.0 + y[a] * s - (2.0 - s) * (m + 1.0) * y[a]);
  }
};

/// Univariate reduction dY = (b/2)(S - Y) dt + sqrt(kappa Y (1-Y)) dW,
/// invariant Beta(bS/kappa, b(1-S)/kappa).
struct BetaUnivariate {
  double b;
  double s;
  double kappa;

  static BetaUnivariate make(double b, double s, double kappa) {
    if (!(std::isfinite(b) && b > 0.0)) throw InvalidCoefficients("beta process b must be > 0");
    if (!(std::isfinite(kappa) && kappa > 0.0))
      throw InvalidCoefficients("beta process kappa must be > 0");
    if (!(s > 0.0 && s < 1.0)) throw InvalidCoefficients("beta process S must lie in (0,1)");
    return BetaUnivariate{b, s, kappa};
  }

  std::size_t dimension() const noexcept { return 2; }
  std::size_t factor_scratch_size() const noexcept { return 0; }

  void drift(std::span<const double> y, double /*y_last*/, std::span<double> out) const {
    out[0] = 0.5 * b * (s - y[0]);
  }
  void diffusion_matrix(std::span<const double> y, double y_last, Matrix& out) const {
    out = Matrix(1, 1);
    out(0, 0) = kappa * y[0] * y_last;
  }
  void diffusion_factor(std::span<const double> y, double y_last, Matrix& out) const {
    out = Matrix(1, 1);
    out(0, 0) = std::sqrt(std::max(0.0, kappa * y[0] * y_last));
  }
  void add_noise(std::span<const double> y, double y_last, std::span<const double> dw,
                 std::span<double> out, std::span<double> /*scratch*/) const {
    out[0] += std::sqrt(std::max(0.0, kappa * y[0] * y_last)) * dw[0];
  }
  void diffusion_divergence(std::span<const double> y, double /*y_last*/,
                            std::span<double> out) const {
    out[0] = kappa * (1.0 - 2.0 * y[0]);
  }
};

using ProcessKind = std::variant<DirichletDiffusion, WrightFisher, Jacobi, BetaUnivariate>;

inline std::size_t dimension(const ProcessKind& p) {
  return std::visit([](const auto& q) { return q.dimension(); }, p);
}

/// Number of Gaussian increments consumed per particle and step.
inline std::size_t noise_dimension(const ProcessKind& p) { return dimension(p) - 1; }

namespace detail {

inline void require_dimension(const ProcessKind& p, const SimplexState& s) {
  if (dimension(p) != s.dimension())
    throw DimensionMismatch("process has N=" + std::to_string(dimension(p)) +
                            " but the state has N=" + std::to_string(s.dimension()));
}

}  // namespace detail

inline std::vector<double> drift(const ProcessKind& p, const SimplexState& s) {
  detail::require_dimension(p, s);
  std::vector<double> out(s.dimension() - 1);
  std::visit([&](const auto& q) { q.drift(s.free_components(), s.last(), out); }, p);
  return out;
}

inline Matrix diffusion_matrix(const ProcessKind& p, const SimplexState& s) {
  detail::require_dimension(p, s);
  Matrix out;
  std::visit([&](const auto& q) { q.diffusion_matrix(s.free_components(), s.last(), out); }, p);
  return out;
}

/// G with G G^T = B. Lower-triangular for every process except Jacobi,
/// whose factor is read off its noise terms.
inline Matrix diffusion_factor(const ProcessKind& p, const SimplexState& s) {
  detail::require_dimension(p, s);
  Matrix out;
  std::visit([&](const auto& q) { q.diffusion_factor(s.free_components(), s.last(), out); }, p);
  return out;
}

/// Vector of sum_g dB_ag/dY_g, evaluated analytically.
inline std::vector<double> diffusion_divergence(const ProcessKind& p, const SimplexState& s) {
  detail::require_dimension(p, s);
  std::vector<double> out(s.dimension() - 1);
  std::visit([&](const auto& q) { q.diffusion_divergence(s.free_components(), s.last(), out); },
             p);
  return out;
}

/// B^{-1} (2a - div B): the gradient of ln F demanded of any stationary
/// potential solution. Throws SingularDiffusion on the boundary.
inline std::vector<double> stationary_log_gradient(const ProcessKind& p, const SimplexState& s) {
  auto a = drift(p, s);
  const auto div = diffusion_divergence(p, s);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = 2.0 * a[i] - div[i];
  const Matrix b = diffusion_matrix(p, s);
  for (std::size_t i = 0; i < b.rows(); ++i)
    if (!(b(i, i) > 0.0)) throw SingularDiffusion("diffusion matrix is singular at this state");
  return solve(b, std::move(a));
}

/// Dirichlet law that `p` leaves invariant, when one is known.
inline std::optional<DirichletParams> stationary_law(const ProcessKind& p) {
  struct Visitor {
    std::optional<DirichletParams> operator()(const DirichletDiffusion& q) const {
      if (!satisfies_constraint(q.coeffs)) return std::nullopt;
      return forward_omega(q.coeffs);
    }
    std::optional<DirichletParams> operator()(const WrightFisher& q) const { return q.coeffs.omega; }
    std::optional<DirichletParams> operator()(const Jacobi&) const { return std::nullopt; }
    std::optional<DirichletParams> operator()(const BetaUnivariate& q) const {
      return DirichletParams::make({q.b * q.s / q.kappa, q.b * (1.0 - q.s) / q.kappa});
    }
  };
  return std::visit(Visitor{}, p);
}

/// Max-norm gap between grad ln D(omega) and B^{-1}(2a - div B) at an
/// interior state: zero exactly when exp(-phi) is a potential solution.
inline double potential_residual(const ProcessKind& p, const DirichletParams& omega,
                                 const SimplexState& s) {
  const auto lhs = log_pdf_gradient(omega, s);
  const auto rhs = stationary_log_gradient(p, s);
  double r = 0.0;
  for (std::size_t i = 0; i < lhs.size(); ++i) r = std::max(r, std::abs(lhs[i] - rhs[i]));
  return r;
}

/// Residual of the potential-solution condition for Dirichlet-diffusion
/// coefficients, with omega = (b_a S_a/kappa_a, b_1 (1-S_1)/kappa_1). The
/// equal-ratio condition is not enforced, so violating coefficients give a
/// visibly nonzero residual instead of an exception.
inline double potential_residual(const SdeCoeffs& c, const SimplexState& s) {
  std::vector<double> omega(c.dimension());
  for (std::size_t a = 0; a + 1 < c.dimension(); ++a) omega[a] = c.b()[a] / c.kappa()[a] * c.s()[a];
  omega.back() = c.b()[0] / c.kappa()[0] * (1.0 - c.s()[0]);
  return potential_residual(ProcessKind{DirichletDiffusion{c}}, DirichletParams::make(omega), s);
}

}  // namespace dirsim
