#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "dirsim/analytic_dirichlet.hpp"
#include "dirsim/simplex.hpp"
#include "dirsim/special_functions.hpp"

namespace dirsim {

namespace detail {

/// Particles per leaf of the reduction tree. Fixed, so the summation order
/// never depends on how the ensemble was partitioned across workers.
inline constexpr std::size_t kReductionLeaf = 1024;

// Pairwise sum of `leaves` vectors of width w stored back to back.
inline std::vector<double> pairwise_reduce(std::vector<double> leaves, std::size_t w) {
  std::size_t count = w == 0 ? 0 : leaves.size() / w;
  while (count > 1) {
    const std::size_t half = count / 2;
    for (std::size_t i = 0; i < half; ++i)
      for (std::size_t k = 0; k < w; ++k) leaves[i * w + k] = leaves[2 * i * w + k] + leaves[(2 * i + 1) * w + k];
    if (count % 2 == 1)
      for (std::size_t k = 0; k < w; ++k) leaves[half * w + k] = leaves[(count - 1) * w + k];
    count = half + count % 2;
  }
  leaves.resize(w);
  return leaves;
}

}  // namespace detail

/// Ensemble means and biased (divisor n) second central moments of the full
/// N-vector. Two passes: means first, then centered products.
inline MomentReport moments(const Ensemble& e) {
  if (e.empty()) throw EmptyEnsemble();
  const std::size_t n = e.dimension();
  const std::size_t free = n - 1;
  const std::size_t particles = e.size();
  const std::size_t leaves = (particles + detail::kReductionLeaf - 1) / detail::kReductionLeaf;
  const auto raw = e.raw();

  auto full = [&](std::size_t i, std::span<double> out) {
    double s = 0.0;
    for (std::size_t a = 0; a < free; ++a) {
      out[a] = raw[i * free + a];
      s += out[a];
    }
    out[free] = 1.0 - s;
  };

  std::vector<double> y(n);
  std::vector<double> sums(leaves * n, 0.0);
  for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
    const std::size_t end = std::min(particles, (leaf + 1) * detail::kReductionLeaf);
    for (std::size_t i = leaf * detail::kReductionLeaf; i < end; ++i) {
      full(i, y);
      for (std::size_t a = 0; a < n; ++a) sums[leaf * n + a] += y[a];
    }
  }
  MomentReport r{detail::pairwise_reduce(std::move(sums), n), Matrix(n, n)};
  const double inv = 1.0 / static_cast<double>(particles);
  for (double& m : r.mean) m *= inv;

  const std::size_t w = n * (n + 1) / 2;
  std::vector<double> products(leaves * w, 0.0);
  for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
    const std::size_t end = std::min(particles, (leaf + 1) * detail::kReductionLeaf);
    double* acc = products.data() + leaf * w;
    for (std::size_t i = leaf * detail::kReductionLeaf; i < end; ++i) {
      full(i, y);
      for (std::size_t a = 0; a < n; ++a) y[a] -= r.mean[a];
      std::size_t k = 0;
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a; b < n; ++b) acc[k++] += y[a] * y[b];
    }
  }
  const auto upper = detail::pairwise_reduce(std::move(products), w);
  std::size_t k = 0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      r.second_central(a, b) = upper[k++] * inv;
      r.second_central(b, a) = r.second_central(a, b);
    }
  return r;
}

/// Counts of (Y_1, Y_2) on a bins x bins grid over the unit square.
/// Bins are half-open [k/B, (k+1)/B) with the last one closed.
class JointHistogram {
 public:
  JointHistogram(std::size_t bins) : bins_(bins), counts_(bins * bins, 0) {
    if (bins == 0) throw InvalidArgument("histogram needs at least one bin");
  }

  std::size_t bins() const noexcept { return bins_; }
  std::uint64_t total() const noexcept { return total_; }
  std::uint64_t count(std::size_t i, std::size_t j) const { return counts_[i * bins_ + j]; }
  double cell_width() const noexcept { return 1.0 / static_cast<double>(bins_); }
  double cell_center(std::size_t k) const noexcept { return (static_cast<double>(k) + 0.5) * cell_width(); }

  /// Count normalized to a probability density over the (Y_1, Y_2) plane.
  double density(std::size_t i, std::size_t j) const {
    const double w = cell_width();
    return total_ == 0 ? 0.0 : static_cast<double>(count(i, j)) / (static_cast<double>(total_) * w * w);
  }

  std::size_t bin_of(double y) const noexcept {
    const auto k = static_cast<std::size_t>(std::max(0.0, y) * static_cast<double>(bins_));
    return std::min(k, bins_ - 1);
  }

  void add(double y1, double y2) {
    ++counts_[bin_of(y1) * bins_ + bin_of(y2)];
    ++total_;
  }

 private:
  std::size_t bins_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

inline JointHistogram joint_histogram(const Ensemble& e, std::size_t bins) {
  if (e.dimension() != 3) throw DimensionMismatch("joint histogram requires N = 3");
  JointHistogram h(bins);
  for (std::size_t i = 0; i < e.size(); ++i) {
    const auto y = e.free_components(i);
    h.add(y[0], y[1]);
  }
  return h;
}

/// Component `alpha` (of the full N-vector) of every particle.
inline std::vector<double> component_samples(const Ensemble& e, std::size_t alpha) {
  if (alpha >= e.dimension()) throw InvalidArgument("component index out of range");
  std::vector<double> out(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    const auto y = e.free_components(i);
    if (alpha + 1 < e.dimension()) {
      out[i] = y[alpha];
    } else {
      double s = 0.0;
      for (double v : y) s += v;
      out[i] = 1.0 - s;
    }
  }
  return out;
}

/// One-sample Kolmogorov-Smirnov statistic sup |F_n - F|, evaluated at the
/// sorted samples with the right-continuous empirical CDF.
inline double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw EmptyEnsemble();
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// KS distance between the empirical law of component `alpha` and its
/// Beta(omega_a, omega_0 - omega_a) marginal under Dirichlet(w).
inline double marginal_ks(const Ensemble& e, std::size_t alpha, const DirichletParams& w) {
  if (w.dimension() != e.dimension()) throw DimensionMismatch("omega and ensemble dimensions differ");
  const auto [a, b] = marginal_beta_params(w, alpha);
  return ks_statistic(component_samples(e, alpha), [a = a, b = b](double x) { return beta_cdf(a, b, x); });
}

/// Moment reports sampled at strictly increasing times.
class ConvergenceTrace {
 public:
  void append(double time, MomentReport report) {
    if (!times_.empty() && !(time > times_.back()))
      throw InvalidArgument("trace times must be strictly increasing");
    times_.push_back(time);
    reports_.push_back(std::move(report));
  }

  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<MomentReport>& reports() const noexcept { return reports_; }

 private:
  std::vector<double> times_;
  std::vector<MomentReport> reports_;
};

/// Earliest trace time t (at least window after the start) such that at t and
/// at every later sample, each mean and second-moment entry stays within
/// `tol` (max minus min) over the trailing window. nullopt when never.
inline std::optional<double> stationarity_detector(const ConvergenceTrace& trace, double window,
                                                   double tol) {
  if (!(window > 0.0)) throw InvalidArgument("window must be positive");
  if (trace.empty()) return std::nullopt;
  const auto& t = trace.times();
  const auto& r = trace.reports();
  if (t.back() - t.front() < 2.0 * window)
    throw InvalidArgument("trace must span at least twice the window");

  auto settled_at = [&](std::size_t i) {
    const std::size_t n = r[i].dimension();
    std::size_t first = i;
    while (first > 0 && t[first - 1] >= t[i] - window) --first;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a; b <= n; ++b) {
        // b == n selects the mean, otherwise the (a, b) second moment.
        auto value = [&](std::size_t k) { return b == n ? r[k].mean[a] : r[k].second_central(a, b); };
        double lo = value(i), hi = lo;
        for (std::size_t k = first; k < i; ++k) {
          lo = std::min(lo, value(k));
          hi = std::max(hi, value(k));
        }
        if (!(hi - lo < tol)) return false;
      }
    }
    return true;
  };

  std::optional<double> detected;
  for (std::size_t i = t.size(); i-- > 0;) {
    if (t[i] - t.front() < window) break;
    if (!settled_at(i)) break;
    detected = t[i];
  }
  return detected;
}

}  // namespace dirsim
