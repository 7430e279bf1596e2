#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dirsim/coeff_map.hpp"
#include "dirsim/integrator.hpp"
#include "dirsim/processes.hpp"
#include "dirsim/random.hpp"
#include "dirsim/simplex.hpp"

namespace dirsim {

/// Mass fractions placed at a few fixed simplex points.
struct TripleDelta {
  std::vector<double> weights;
  std::vector<SimplexState> points;
};

/// Uniform over the axis-aligned box [corner, corner + widths] in the free
/// components, intersected with the simplex.
struct Box {
  std::vector<double> corner;
  std::vector<double> widths;
};

struct PointMass {
  SimplexState y;
};

using InitialCondition = std::variant<TripleDelta, Box, PointMass>;

enum class CoefficientSource { kSdeCoefficients, kTargetOmega, kProcessSpecific };

struct RunConfig {
  ProcessKind process;
  CoefficientSource source = CoefficientSource::kProcessSpecific;
  std::optional<DirichletParams> target_omega;
  std::size_t particles = 1;
  double dt = 0.05;
  double t_end = 1.0;
  std::uint64_t seed = 0;
  InitialCondition initial_condition;
  std::string output;
  std::size_t histogram_bins = 50;
  std::uint64_t output_every = 20;
  unsigned threads = 1;
  double projection_epsilon = 1e-12;
  double stationarity_window = 20.0;
  double stationarity_tol = 0.005;

  IntegratorConfig integrator() const {
    return IntegratorConfig{dt, t_end, seed, projection_epsilon, output_every, threads};
  }

  /// Cross-field checks; parse_config and the CLI overrides both end here.
  void validate() const {
    if (particles == 0) throw ConfigError("particles must be >= 1");
    integrator().validate();
    if (!(stationarity_window > 0.0)) throw ConfigError("stationarity.window must be positive");
    if (!(stationarity_tol > 0.0)) throw ConfigError("stationarity.tol must be positive");
    const std::size_t n = dimension(process);
    std::visit(
        [&](const auto& ic) {
          using T = std::decay_t<decltype(ic)>;
          if constexpr (std::is_same_v<T, TripleDelta>) {
            for (const auto& p : ic.points)
              if (p.dimension() != n) throw ConfigError("initial_condition.points: dimension differs from process");
          } else if constexpr (std::is_same_v<T, Box>) {
            if (ic.corner.size() != n - 1) throw ConfigError("initial_condition.corner: needs N-1 components");
          } else {
            if (ic.y.dimension() != n) throw ConfigError("initial_condition.y: dimension differs from process");
          }
        },
        initial_condition);
  }
};

namespace detail {

inline std::string location(std::string_view text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

// A JSON number, or a string "p/q" / "x" giving an exact fraction.
inline double read_real(const nlohmann::json& j, const std::string& field) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    auto parse = [&](std::string_view part) {
      double v = 0.0;
      const auto* end = part.data() + part.size();
      auto [ptr, ec] = std::from_chars(part.data(), end, v);
      if (ec != std::errc{} || ptr != end) throw ConfigError(field + ": cannot parse number '" + s + "'");
      return v;
    };
    const auto slash = s.find('/');
    if (slash == std::string::npos) return parse(s);
    const double den = parse(std::string_view(s).substr(slash + 1));
    if (den == 0.0) throw ConfigError(field + ": zero denominator");
    return parse(std::string_view(s).substr(0, slash)) / den;
  }
  throw ConfigError(field + ": expected a number or a fraction string");
}

inline std::vector<double> read_reals(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field + ": expected an array");
  std::vector<double> v;
  for (std::size_t i = 0; i < j.size(); ++i)
    v.push_back(read_real(j[i], field + "[" + std::to_string(i) + "]"));
  return v;
}

inline const nlohmann::json& require(const nlohmann::json& obj, const std::string& key,
                                     const std::string& prefix = "") {
  if (!obj.contains(key)) throw ConfigError("missing field '" + prefix + key + "'");
  return obj.at(key);
}

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<std::string_view> known,
                           const std::string& prefix) {
  for (const auto& item : obj.items())
    if (std::find(known.begin(), known.end(), item.key()) == known.end())
      throw ConfigError("unknown field '" + prefix + item.key() + "'");
}

template <class T>
T read_unsigned(const nlohmann::json& j, const std::string& field) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    throw ConfigError(field + ": expected a non-negative integer");
  return static_cast<T>(j.get<std::uint64_t>());
}

// Wraps library validation errors with the offending field name.
template <class F>
auto with_field(const std::string& field, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& err) {
    throw ConfigError(field + ": " + err.what());
  }
}

struct ParsedProcess {
  ProcessKind process;
  CoefficientSource source = CoefficientSource::kProcessSpecific;
  std::optional<DirichletParams> target_omega;
};

inline ParsedProcess parse_process(const nlohmann::json& doc) {
  ParsedProcess cfg{BetaUnivariate{1.0, 0.5, 1.0}};
  const auto& kind_node = require(doc, "process");
  if (!kind_node.is_string()) throw ConfigError("process: expected a string");
  const auto kind = kind_node.get<std::string>();
  // Process-specific top-level fields, each owned by one kind.
  static const std::pair<const char*, const char*> kOwners[] = {
      {"sde_coefficients", "dirichlet"}, {"target_omega", "dirichlet"}, {"kappa", "dirichlet"},
      {"omega", "wright_fisher"},        {"jacobi", "jacobi"},          {"beta", "beta"}};
  if (std::none_of(std::begin(kOwners), std::end(kOwners), [&](const auto& o) { return kind == o.second; }))
    throw ConfigError("process: unknown kind '" + kind + "' (expected dirichlet, wright_fisher, jacobi or beta)");
  for (const auto& [key, owner] : kOwners)
    if (kind != owner && doc.contains(key))
      throw ConfigError(std::string("'") + key + "' only applies to the " + owner + " process");
  if (kind == "dirichlet") {
    const bool direct = doc.contains("sde_coefficients");
    const bool target = doc.contains("target_omega");
    if (direct == target)
      throw ConfigError("dirichlet process needs exactly one of 'sde_coefficients' or 'target_omega'");
    SdeCoeffs c = [&] {
      if (direct) {
        if (doc.contains("kappa")) throw ConfigError("'kappa' belongs inside 'sde_coefficients' here");
        const auto& node = doc.at("sde_coefficients");
        reject_unknown(node, {"b", "kappa", "s"}, "sde_coefficients.");
        cfg.source = CoefficientSource::kSdeCoefficients;
        return with_field("sde_coefficients", [&] {
          return SdeCoeffs::make(read_reals(require(node, "b", "sde_coefficients."), "sde_coefficients.b"),
                                 read_reals(require(node, "kappa", "sde_coefficients."), "sde_coefficients.kappa"),
                                 read_reals(require(node, "s", "sde_coefficients."), "sde_coefficients.s"));
        });
      }
      cfg.source = CoefficientSource::kTargetOmega;
      auto omega = with_field("target_omega", [&] {
        return DirichletParams::make(read_reals(doc.at("target_omega"), "target_omega"));
      });
      const auto kappa = read_reals(require(doc, "kappa"), "kappa");
      cfg.target_omega = omega;
      return with_field("kappa", [&] { return inverse_coeffs(omega, kappa); });
    }();
    with_field("sde_coefficients", [&] { return forward_omega(c); });
    cfg.process = DirichletDiffusion{std::move(c)};
    return cfg;
  }
  if (kind == "wright_fisher") {
    auto omega = with_field("omega", [&] {
      return DirichletParams::make(read_reals(require(doc, "omega"), "omega"));
    });
    cfg.process = WrightFisher{WfCoeffs{std::move(omega)}};
    return cfg;
  }
  if (kind == "jacobi") {
    const auto& node = require(doc, "jacobi");
    reject_unknown(node, {"a", "c", "pi"}, "jacobi.");
    cfg.process = with_field("jacobi", [&] {
      return Jacobi{JacobiCoeffs::make(read_real(require(node, "a", "jacobi."), "jacobi.a"),
                                       read_real(require(node, "c", "jacobi."), "jacobi.c"),
                                       read_reals(require(node, "pi", "jacobi."), "jacobi.pi"))};
    });
    return cfg;
  }
  if (kind == "beta") {
    const auto& node = require(doc, "beta");
    reject_unknown(node, {"b", "s", "kappa"}, "beta.");
    cfg.process = with_field("beta", [&] {
      return BetaUnivariate::make(read_real(require(node, "b", "beta."), "beta.b"),
                                  read_real(require(node, "s", "beta."), "beta.s"),
                                  read_real(require(node, "kappa", "beta."), "beta.kappa"));
    });
    return cfg;
  }
  throw ConfigError("process: unhandled kind '" + kind + "'");
}

inline InitialCondition parse_initial_condition(const nlohmann::json& node) {
  const std::string p = "initial_condition.";
  const auto& type_node = require(node, "type", p);
  if (!type_node.is_string()) throw ConfigError(p + "type: expected a string");
  const auto type = type_node.get<std::string>();
  if (type == "triple_delta") {
    reject_unknown(node, {"type", "weights", "points"}, p);
    TripleDelta td;
    td.weights = read_reals(require(node, "weights", p), p + "weights");
    const auto& points = require(node, "points", p);
    if (!points.is_array()) throw ConfigError(p + "points: expected an array of states");
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto field = p + "points[" + std::to_string(i) + "]";
      td.points.push_back(with_field(field, [&] { return make_state(read_reals(points[i], field)); }));
    }
    if (td.weights.empty() || td.weights.size() != td.points.size())
      throw ConfigError(p + "weights and points must be non-empty and of equal length");
    double total = 0.0;
    for (double w : td.weights) {
      if (!(w >= 0.0)) throw ConfigError(p + "weights must be non-negative");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError(p + "weights must sum to 1");
    return td;
  }
  if (type == "box") {
    reject_unknown(node, {"type", "corner", "widths"}, p);
    Box box{read_reals(require(node, "corner", p), p + "corner"),
            read_reals(require(node, "widths", p), p + "widths")};
    if (box.corner.empty() || box.corner.size() != box.widths.size())
      throw ConfigError(p + "corner and widths must be non-empty and of equal length");
    return box;
  }
  if (type == "point") {
    reject_unknown(node, {"type", "y"}, p);
    return PointMass{with_field(p + "y", [&] { return make_state(read_reals(require(node, "y", p), p + "y")); })};
  }
  throw ConfigError(p + "type: unknown kind '" + type + "' (expected triple_delta, box or point)");
}

}  // namespace detail

/// Parses and validates a JSON run configuration.
inline RunConfig parse_config(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("malformed JSON at " + detail::location(text, e.byte == 0 ? 0 : e.byte - 1) +
                      ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  detail::reject_unknown(doc,
                         {"process", "sde_coefficients", "target_omega", "kappa", "omega", "jacobi",
                          "beta", "particles", "dt", "t_end", "seed", "initial_condition", "output",
                          "histogram_bins", "output_every", "threads", "projection_epsilon",
                          "stationarity"},
                         "");
  auto parsed = detail::parse_process(doc);
  RunConfig cfg{
      .process = std::move(parsed.process),
      .source = parsed.source,
      .target_omega = std::move(parsed.target_omega),
      .particles = detail::read_unsigned<std::size_t>(detail::require(doc, "particles"), "particles"),
      .dt = detail::read_real(detail::require(doc, "dt"), "dt"),
      .t_end = detail::read_real(detail::require(doc, "t_end"), "t_end"),
      .seed = doc.contains("seed") ? detail::read_unsigned<std::uint64_t>(doc.at("seed"), "seed") : 0,
      .initial_condition = detail::parse_initial_condition(detail::require(doc, "initial_condition")),
  };
  if (doc.contains("output")) {
    if (!doc.at("output").is_string()) throw ConfigError("output: expected a directory path string");
    cfg.output = doc.at("output").get<std::string>();
  }
  if (doc.contains("histogram_bins"))
    cfg.histogram_bins = detail::read_unsigned<std::size_t>(doc.at("histogram_bins"), "histogram_bins");
  if (doc.contains("output_every"))
    cfg.output_every = detail::read_unsigned<std::uint64_t>(doc.at("output_every"), "output_every");
  if (doc.contains("threads")) cfg.threads = detail::read_unsigned<unsigned>(doc.at("threads"), "threads");
  if (doc.contains("projection_epsilon"))
    cfg.projection_epsilon = detail::read_real(doc.at("projection_epsilon"), "projection_epsilon");
  if (doc.contains("stationarity")) {
    const auto& node = doc.at("stationarity");
    detail::reject_unknown(node, {"window", "tol"}, "stationarity.");
    if (node.contains("window")) cfg.stationarity_window = detail::read_real(node.at("window"), "stationarity.window");
    if (node.contains("tol")) cfg.stationarity_tol = detail::read_real(node.at("tol"), "stationarity.tol");
  }
  cfg.validate();
  return cfg;
}

/// Resolved configuration as JSON (coefficients after any omega inversion).
inline nlohmann::json to_json(const RunConfig& cfg) {
  using nlohmann::json;
  auto vec = [](std::span<const double> v) { return std::vector<double>(v.begin(), v.end()); };
  json j;
  std::visit(
      [&](const auto& q) {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, DirichletDiffusion>) {
          j["process"] = "dirichlet";
          if (cfg.target_omega) {
            j["target_omega"] = vec(cfg.target_omega->omega());
            j["kappa"] = vec(q.coeffs.kappa());
          } else {
            j["sde_coefficients"] = {{"b", vec(q.coeffs.b())}, {"kappa", vec(q.coeffs.kappa())}, {"s", vec(q.coeffs.s())}};
          }
        } else if constexpr (std::is_same_v<T, WrightFisher>) {
          j["process"] = "wright_fisher";
          j["omega"] = vec(q.coeffs.omega.omega());
        } else if constexpr (std::is_same_v<T, Jacobi>) {
          j["process"] = "jacobi";
          j["jacobi"] = {{"a", q.coeffs.a()}, {"c", q.coeffs.c()}, {"pi", vec(q.coeffs.pi())}};
        } else {
          j["process"] = "beta";
          j["beta"] = {{"b", q.b}, {"s", q.s}, {"kappa", q.kappa}};
        }
      },
      cfg.process);
  j["particles"] = cfg.particles;
  j["dt"] = cfg.dt;
  j["t_end"] = cfg.t_end;
  j["seed"] = cfg.seed;
  std::visit(
      [&](const auto& ic) {
        using T = std::decay_t<decltype(ic)>;
        if constexpr (std::is_same_v<T, TripleDelta>) {
          json points = json::array();
          for (const auto& p : ic.points) points.push_back(vec(p.free_components()));
          j["initial_condition"] = {{"type", "triple_delta"}, {"weights", ic.weights}, {"points", points}};
        } else if constexpr (std::is_same_v<T, Box>) {
          j["initial_condition"] = {{"type", "box"}, {"corner", ic.corner}, {"widths", ic.widths}};
        } else {
          j["initial_condition"] = {{"type", "point"}, {"y", vec(ic.y.free_components())}};
        }
      },
      cfg.initial_condition);
  j["output"] = cfg.output;
  j["histogram_bins"] = cfg.histogram_bins;
  j["output_every"] = cfg.output_every;
  j["projection_epsilon"] = cfg.projection_epsilon;
  j["stationarity"] = {{"window", cfg.stationarity_window}, {"tol", cfg.stationarity_tol}};
  return j;
}

namespace detail {

// Largest-remainder apportionment of n particles to the given weights.
inline std::vector<std::size_t> apportion(std::span<const double> weights, std::size_t n) {
  double total = 0.0;
  for (double w : weights) total += w;
  std::vector<std::size_t> counts(weights.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = weights[i] / total * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[i];
    remainders.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[remainders[k % remainders.size()].second];
  return counts;
}

}  // namespace detail

/// Initial ensemble at time 0. Box samples are drawn from the reserved
/// initial-condition counter stream, so they depend only on (seed, particle).
inline Ensemble build_initial_ensemble(const RunConfig& cfg) {
  const std::size_t n = dimension(cfg.process);
  return std::visit(
      [&](const auto& ic) -> Ensemble {
        using T = std::decay_t<decltype(ic)>;
        if constexpr (std::is_same_v<T, PointMass>) {
          return Ensemble(cfg.particles, ic.y);
        } else if constexpr (std::is_same_v<T, TripleDelta>) {
          const auto counts = detail::apportion(ic.weights, cfg.particles);
          std::vector<SimplexState> states;
          states.reserve(cfg.particles);
          for (std::size_t k = 0; k < counts.size(); ++k) states.insert(states.end(), counts[k], ic.points[k]);
          return Ensemble::from_states(states);
        } else {
          const std::size_t m = n - 1;
          if (ic.corner.size() != m) throw InfeasibleInitialCondition("box needs N-1 corner components");
          double corner_sum = 0.0;
          for (std::size_t a = 0; a < m; ++a) {
            if (!(ic.corner[a] >= 0.0 && ic.widths[a] > 0.0 && ic.corner[a] + ic.widths[a] <= 1.0))
              throw InfeasibleInitialCondition("box axis " + std::to_string(a) + " must lie within [0,1] with positive width");
            corner_sum += ic.corner[a];
          }
          if (!(corner_sum < 1.0)) throw InfeasibleInitialCondition("box does not intersect the simplex interior");
          constexpr std::uint32_t kMaxBlocks = 1u << 20;
          const std::uint32_t blocks_per_draw = static_cast<std::uint32_t>((m + 1) / 2);
          Ensemble e(cfg.particles, SimplexState::make(std::vector<double>(m, 0.0)));
          std::vector<double> y(m);
          for (std::size_t i = 0; i < cfg.particles; ++i) {
            const CounterStream stream(cfg.seed, i, kInitialConditionStep);
            bool accepted = false;
            for (std::uint32_t block = 0; !accepted && block + blocks_per_draw <= kMaxBlocks; block += blocks_per_draw) {
              double s = 0.0;
              for (std::size_t a = 0; a < m; ++a) {
                const auto w = stream.block(block + static_cast<std::uint32_t>(a / 2));
                const double u = a % 2 == 0 ? uniform_closed_open(w[0], w[1]) : uniform_closed_open(w[2], w[3]);
                y[a] = ic.corner[a] + ic.widths[a] * u;
                s += y[a];
              }
              accepted = s <= 1.0;
            }
            if (!accepted) throw InfeasibleInitialCondition("box rejection sampling did not converge");
            e.set_state(i, SimplexState::make(y));
          }
          return e;
        }
      },
      cfg.initial_condition);
}

}  // namespace dirsim
