#include "affcalc/envelope.hpp"

#include <algorithm>
#include <cmath>

namespace affcalc {

namespace {

constexpr double kHalfTolerance = 1e-12;

// sup over s in [lo, hi] of int |s - theta| d mu - int |s - theta| d nu. The
// objective is piecewise linear with kinks at atoms, so the endpoints and the
// interior atoms of both measures cover every candidate maximizer.
double sup_on_interval(const MedianInterval& interval, const DiscreteMeasure& mu,
                       const DiscreteMeasure& nu) {
  auto gap = [&](double s) { return absolute_deviation(s, mu) - absolute_deviation(s, nu); };
  double best = std::max(gap(interval.lo), gap(interval.hi));
  for (const auto* m : {&mu, &nu}) {
    for (double s : m->locations()) {
      if (s > interval.lo && s < interval.hi) best = std::max(best, gap(s));
    }
  }
  return best;
}

}  // namespace

MedianInterval median_interval(const DiscreteMeasure& m) {
  if (!m.is_probability()) throw Error(ErrorKind::NotAProbability, "median needs a probability measure");
  const auto& loc = m.locations();
  const std::size_t n = m.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double upto = m.mass_upto(loc[i]);
    if (upto >= 0.5 - kHalfTolerance) {
      // F stays at 1/2 up to the next atom: every point in between is a median.
      if (std::abs(upto - 0.5) <= kHalfTolerance && i + 1 < n) return {loc[i], loc[i + 1]};
      return {loc[i], loc[i]};
    }
  }
  throw Error(ErrorKind::NotViable, "median interval is empty");
}

double absolute_deviation(double s, const DiscreteMeasure& mu) {
  return mu.integrate([s](double theta) { return std::abs(s - theta); });
}

double median_envelope_derivative(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return sup_on_interval(median_interval(mu), mu, nu);
}

EnvelopeProblem<double> counterexample_danskin() {
  EnvelopeProblem<double> p;
  p.name = "danskin_counterexample";
  p.objective = [](double s, double x) { return s == 0.0 ? 0.5 - x : -(x - s) * (x - s); };
  p.section_derivative = [](double s, double x, double y) {
    return s == 0.0 ? -(y - x) : -2.0 * (x - s) * (y - x);
  };
  p.solver = [](double x) -> SolutionSet {
    if (x < 0.0 || x > 1.0) throw Error(ErrorKind::DomainMismatch, "point outside [0, 1]");
    if (x <= 0.5) return std::vector<double>{0.0};
    return std::vector<double>{x};
  };
  return p;
}

EnvelopeProblem<DiscreteMeasure> median_problem() {
  EnvelopeProblem<DiscreteMeasure> p;
  p.name = "median_loss";
  p.objective = [](double s, const DiscreteMeasure& mu) { return -absolute_deviation(s, mu); };
  p.section_derivative = [](double s, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    return absolute_deviation(s, mu) - absolute_deviation(s, nu);
  };
  p.solver = [](const DiscreteMeasure& mu) -> SolutionSet { return median_interval(mu); };
  p.interval_sup = sup_on_interval;
  return p;
}

StationarityCertificate stationarity_certificate(const FunctionalSpec& spec,
                                                 const DiscreteMeasure& x_hat,
                                                 std::span<const DiscreteMeasure> generators) {
  if (generators.empty()) throw Error(ErrorKind::BadParameter, "stationarity needs generators");
  StationarityCertificate cert{analytic_directional(spec, x_hat, generators[0]), 0};
  for (std::size_t i = 1; i < generators.size(); ++i) {
    const double d = analytic_directional(spec, x_hat, generators[i]);
    if (d < cert.min_directional) cert = {d, i};
  }
  return cert;
}

}  // namespace affcalc
