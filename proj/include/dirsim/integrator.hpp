#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <thread>
#include <vector>

#include "dirsim/processes.hpp"
#include "dirsim/random.hpp"
#include "dirsim/simplex.hpp"
#include "dirsim/stats.hpp"

namespace dirsim {

struct IntegratorConfig {
  double dt = 0.05;
  double t_end = 1.0;
  std::uint64_t seed = 0;
  double projection_epsilon = 1e-12;
  std::uint64_t output_every = 1;
  unsigned threads = 1;

  void validate() const {
    if (!(std::isfinite(dt) && dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(std::isfinite(t_end) && t_end >= dt)) throw ConfigError("t_end must be at least dt");
    if (!(projection_epsilon > 0.0 && projection_epsilon <= 1e-6))
      throw ConfigError("projection_epsilon must lie in (0, 1e-6]");
    if (output_every == 0) throw ConfigError("output_every must be positive");
    if (threads == 0) throw ConfigError("threads must be positive");
    if (step_count() >= kInitialConditionStep) throw ConfigError("too many steps");
  }

  /// ceil(t_end / dt), ignoring a relative rounding excess of 1e-12.
  std::uint64_t step_count() const {
    return static_cast<std::uint64_t>(std::ceil(t_end / dt * (1.0 - 1e-12)));
  }
};

/// Clamps negative components to zero and, if the sum then exceeds one,
/// rescales by 1/sum. Any rounding excess left by the division is taken off
/// the largest component so that 1 - sum is never negative. Returns true if
/// the input was outside the simplex by more than `epsilon`.
inline bool project_in_place(std::span<double> y, double epsilon) {
  bool activated = false;
  double s = 0.0;
  for (double& v : y) {
    if (v < 0.0) {
      if (v < -epsilon) activated = true;
      v = 0.0;
    }
    s += v;
  }
  if (s > 1.0) {
    if (s > 1.0 + epsilon) activated = true;
    for (double& v : y) v /= s;
    for (;;) {
      s = detail::sum(y);
      if (s <= 1.0) break;
      auto largest = std::max_element(y.begin(), y.end());
      *largest = std::max(0.0, *largest - (s - 1.0));
    }
  }
  return activated;
}

inline SimplexState project(std::vector<double> y_raw, double epsilon = 1e-12) {
  detail::require_finite(y_raw, "projection input");
  project_in_place(y_raw, epsilon);
  return SimplexState::make(std::move(y_raw));
}

namespace detail {

// One Euler-Maruyama update of a single particle's free components in place;
// `dw` holds Normal(0, dt) increments. Returns true on projection activation.
template <class Process>
bool euler_maruyama_update(const Process& p, std::span<double> y, std::span<const double> dw,
                           double dt, double epsilon, std::span<double> work,
                           std::span<double> scratch) {
  const std::size_t m = y.size();
  double s = 0.0;
  for (double v : y) s += v;
  const double y_last = 1.0 - s;
  p.drift(y, y_last, work);
  for (std::size_t a = 0; a < m; ++a) work[a] = y[a] + work[a] * dt;
  p.add_noise(y, y_last, dw, work, scratch);
  for (std::size_t a = 0; a < m; ++a)
    if (!std::isfinite(work[a])) throw NonFiniteState("integrator produced a non-finite state");
  const bool activated = project_in_place(work.first(m), epsilon);
  std::copy_n(work.begin(), m, y.begin());
  return activated;
}

}  // namespace detail

/// Single Euler-Maruyama step Y' = project(Y + a dt + G dw), with a and G
/// evaluated at the pre-step state.
inline SimplexState step(const ProcessKind& p, const SimplexState& s, const WienerIncrement& dw,
                         double dt, double epsilon = 1e-12) {
  detail::require_dimension(p, s);
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  const std::size_t m = s.dimension() - 1;
  if (dw.dw.size() != m) throw DimensionMismatch("increment dimension must be N-1");
  std::vector<double> y(s.free_components().begin(), s.free_components().end());
  std::vector<double> work(m);
  return std::visit(
      [&](const auto& q) {
        std::vector<double> scratch(q.factor_scratch_size());
        detail::euler_maruyama_update(q, std::span<double>(y), dw.dw, dt, epsilon, work, scratch);
        return SimplexState::make(std::move(y));
      },
      p);
}

/// Test hook: fills `dw` with the Normal(0, dt) increment for (particle, step).
using IncrementSource =
    std::function<void(std::uint64_t particle, std::uint64_t step, std::span<double> dw)>;

/// Statistics handed to the sink at each emission.
struct Emission {
  std::uint64_t step;  // steps taken in this run
  double time;
  const Ensemble& ensemble;
  MomentReport moments;
  /// Fraction of particle-steps since the previous emission that needed
  /// projection (0 for the initial emission).
  double projection_rate;
};

using StatisticsSink = std::function<void(const Emission&)>;

/// Advances `e` by cfg.step_count() Euler-Maruyama steps. Emits the initial
/// state, then every cfg.output_every steps, and the final state. Particles
/// are split into cfg.threads contiguous ranges that advance independently
/// between emissions; increments depend only on (seed, particle, step), so
/// the result does not depend on the thread count.
inline Ensemble run(const ProcessKind& p, Ensemble e, const IntegratorConfig& cfg,
                    const StatisticsSink& sink, const IncrementSource& increments = {}) {
  cfg.validate();
  if (e.empty()) throw EmptyEnsemble();
  if (e.dimension() != dimension(p)) throw DimensionMismatch("ensemble and process dimensions differ");

  const std::uint64_t total_steps = cfg.step_count();
  const std::size_t particles = e.size();
  const std::size_t m = e.stride();
  const double t0 = e.time;
  const std::uint64_t first_step = e.step_count;
  if (first_step + total_steps >= kInitialConditionStep) throw ConfigError("step counter overflow");
  const double sqrt_dt = std::sqrt(cfg.dt);

  auto emit = [&](std::uint64_t k, double rate) {
    if (sink) sink(Emission{k, e.time, e, moments(e), rate});
  };
  emit(0, 0.0);

  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(cfg.threads, particles));

  // Advances particles [first, last) through steps [k0, k1); returns the
  // number of projection activations.
  auto advance_range = [&](std::size_t first, std::size_t last, std::uint64_t k0,
                           std::uint64_t k1) -> std::uint64_t {
    return std::visit(
        [&](const auto& q) {
          std::uint64_t activations = 0;
          std::vector<double> dw(m), work(m), scratch(q.factor_scratch_size());
          auto storage = e.unchecked_range(first, last - first);
          for (std::size_t i = first; i < last; ++i) {
            auto y = storage.subspan((i - first) * m, m);
            for (std::uint64_t k = k0; k < k1; ++k) {
              const std::uint64_t counter = first_step + k;
              if (increments) {
                increments(i, counter, dw);
              } else {
                fill_standard_normal(CounterStream(cfg.seed, i, static_cast<std::uint32_t>(counter)), dw);
                for (double& v : dw) v *= sqrt_dt;
              }
              if (detail::euler_maruyama_update(q, y, dw, cfg.dt, cfg.projection_epsilon, work, scratch))
                ++activations;
            }
          }
          return activations;
        },
        p);
  };

  for (std::uint64_t k0 = 0; k0 < total_steps;) {
    const std::uint64_t k1 = std::min(total_steps, k0 + cfg.output_every);
    std::uint64_t activations = 0;
    if (workers <= 1) {
      activations = advance_range(0, particles, k0, k1);
    } else {
      std::vector<std::uint64_t> counts(workers, 0);
      std::vector<std::exception_ptr> failures(workers);
      {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
          const std::size_t first = particles * w / workers;
          const std::size_t last = particles * (w + 1) / workers;
          pool.emplace_back([&, w, first, last] {
            try {
              counts[w] = advance_range(first, last, k0, k1);
            } catch (...) {
              failures[w] = std::current_exception();
            }
          });
        }
      }
      for (auto& f : failures)
        if (f) std::rethrow_exception(f);
      for (auto c : counts) activations += c;
    }
    e.step_count = first_step + k1;
    e.time = t0 + static_cast<double>(k1) * cfg.dt;
    emit(k1, static_cast<double>(activations) /
                 (static_cast<double>(particles) * static_cast<double>(k1 - k0)));
    k0 = k1;
  }
  return e;
}

}  // namespace dirsim
