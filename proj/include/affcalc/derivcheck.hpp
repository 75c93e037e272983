#ifndef AFFCALC_DERIVCHECK_HPP
#define AFFCALC_DERIVCHECK_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "affcalc/convex_point.hpp"
#include "affcalc/error.hpp"
#include "affcalc/functionals.hpp"

namespace affcalc {

enum class Verdict { converged, diverging, oscillating };

std::string_view verdict_name(Verdict v);

struct DerivativeReport {
  double estimate = 0.0;
  /// (t, [f(x_t) - f(x)] / t), t strictly decreasing.
  std::vector<std::pair<double, double>> step_ladder;
  double extrapolated_error = 0.0;
  Verdict verdict = Verdict::converged;
  /// Extrapolation that produced the estimate: "richardson" or "aitken".
  std::string method;
};

/// Step ladder t_k = t_min * 2^(ladder - k), k = 0..ladder. The defaults give
/// t_0 = 2^-4 halved 12 times.
struct LadderOptions {
  double t_min = 0x1p-16;
  int ladder = 12;
  double tolerance = 1e-6;
};

/// Extrapolates a ladder of difference quotients (t halving each step).
///
/// Two extrapolants are formed from the tail: 3-term Richardson, exact for
/// quotients polynomial in t, and Aitken's delta-squared, exact for a single
/// power-law error term c t^p with non-integer p. The one whose last two
/// values agree best is reported. The ladder is declared diverging when the
/// last three quotients each grow in magnitude by at least 2^0.1 and neither
/// extrapolant settles within tolerance.
DerivativeReport analyze_ladder(std::vector<std::pair<double, double>> ladder, double tolerance);

/// Affine directional derivative lim_{t->0+} [f((1-t)x + t y) - f(x)] / t
/// estimated on a step ladder.
template <ConvexPoint P, class F>
DerivativeReport numeric_directional(F&& f, const P& x, const P& y, LadderOptions opt = {}) {
  if (opt.ladder < 4 || !(opt.t_min > 0.0)) {
    throw Error(ErrorKind::BadParameter, "step ladder needs ladder >= 4 and t_min > 0");
  }
  auto evaluate = [&](const P& p) {
    double v;
    try {
      v = static_cast<double>(f(p));
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw Error(ErrorKind::EvaluationFailure, e.what());
    }
    if (!std::isfinite(v)) throw Error(ErrorKind::EvaluationFailure, "functional returned a non-finite value");
    return v;
  };
  const double fx = evaluate(x);
  std::vector<std::pair<double, double>> ladder;
  ladder.reserve(static_cast<std::size_t>(opt.ladder) + 1);
  for (int k = 0; k <= opt.ladder; ++k) {
    const double t = std::ldexp(opt.t_min, opt.ladder - k);
    ladder.emplace_back(t, (evaluate(mix_points(x, y, t)) - fx) / t);
  }
  return analyze_ladder(std::move(ladder), opt.tolerance);
}

struct AffinityResult {
  bool affine;
  double max_defect;
};

/// Default affinity threshold on the defect.
inline constexpr double kAffinityTolerance = 1e-6;

/// Checks D(x; mix(p, q, t)) = (1 - t) D(x; p) + t D(x; q) over random probe
/// pairs and t in {1/4, 1/2, 3/4}, all derivatives taken numerically.
/// Throws NonFiniteDerivative when a probe direction diverges.
template <ConvexPoint P, class F>
AffinityResult affinity_test(F&& f, const P& x, std::span<const P> probes, int trials,
                             std::uint64_t seed = 0, LadderOptions opt = {},
                             double threshold = kAffinityTolerance) {
  if (probes.size() < 2 || trials < 1) {
    throw Error(ErrorKind::BadParameter, "affinity test needs two probes and one trial");
  }
  auto derivative = [&](const P& y) {
    const auto report = numeric_directional(f, x, y, opt);
    if (report.verdict == Verdict::diverging) {
      throw Error(ErrorKind::NonFiniteDerivative, "directional derivative diverges along a probe");
    }
    return report.estimate;
  };
  std::vector<double> at_probe;
  at_probe.reserve(probes.size());
  for (const auto& p : probes) at_probe.push_back(derivative(p));

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, probes.size() - 1);
  double max_defect = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const std::size_t i = pick(rng);
    std::size_t j = pick(rng);
    if (j == i) j = (i + 1) % probes.size();
    for (double t : {0.25, 0.5, 0.75}) {
      const double mixed = derivative(mix_points(probes[i], probes[j], t));
      const double defect = std::abs(mixed - (1.0 - t) * at_probe[i] - t * at_probe[j]);
      max_defect = std::max(max_defect, defect);
    }
  }
  return {max_defect <= threshold, max_defect};
}

/// Convenience adapter: the functional as a point-evaluable callable.
inline auto as_function(const FunctionalSpec& spec) {
  return [&spec](const DiscreteMeasure& m) { return eval(spec, m); };
}

struct MeanValuePoint {
  double t_star;
  double residual;
};

/// Finds t in [0,1] with phi'(t) = f(y) - f(x) where phi(t) = f(x_t), using the
/// analytic differential: phi'(t) = DT(x_t; y) / (1 - t) = -DT(x_t; x) / t.
/// Scans `scan_nodes` equispaced nodes left to right and bisects the first
/// bracket. Throws NoBracket when the scan sees no sign change.
MeanValuePoint mean_value_point(const FunctionalSpec& spec, const DiscreteMeasure& x,
                                const DiscreteMeasure& y, int scan_nodes = 64,
                                double tolerance = 1e-8);

/// Gauss-Legendre rule on [0, 1] (Golub-Welsch).
std::pair<Vector, Vector> gauss_legendre(int nodes);

/// |f(y) - f(x) - int_0^1 DT(x_t; y) / (1 - t) dt| with a Gauss-Legendre rule.
double segment_integral_identity(const FunctionalSpec& spec, const DiscreteMeasure& x,
                                 const DiscreteMeasure& y, int nodes = 32);

enum class ShapeProperty { convex, quasiconvex, pseudoconvex, monotone_derivative };

std::string_view shape_property_name(ShapeProperty p);
ShapeProperty parse_shape_property(std::string_view name);

struct ShapeWitness {
  DiscreteMeasure x;
  DiscreteMeasure y;
  double fx;
  double fy;
  double dxy;  // Df(x; y)
  double dyx;  // Df(y; x)
};

struct ShapeReport {
  ShapeProperty property;
  bool holds;
  std::optional<ShapeWitness> witness;
  /// Index of the offending pair when holds is false.
  std::size_t pair_index = 0;
};

inline constexpr double kShapeTolerance = 1e-10;
inline constexpr double kShapeStrictTolerance = 1e-12;

/// Tests one shape property on each pair, in both orientations, and returns
/// the first violating pair as witness.
ShapeReport shape_probe(const FunctionalSpec& spec, ShapeProperty property,
                        std::span<const std::pair<DiscreteMeasure, DiscreteMeasure>> pairs,
                        double tol = kShapeTolerance, double tol_strict = kShapeStrictTolerance);

/// Re-evaluates the witness inequality; true when it is indeed violated.
bool witness_violates(ShapeProperty property, const ShapeWitness& w,
                      double tol = kShapeTolerance, double tol_strict = kShapeStrictTolerance);

}  // namespace affcalc

#endif  // AFFCALC_DERIVCHECK_HPP
