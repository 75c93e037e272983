#ifndef AFFCALC_ENVELOPE_HPP
#define AFFCALC_ENVELOPE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "affcalc/derivcheck.hpp"
#include "affcalc/error.hpp"
#include "affcalc/functionals.hpp"

namespace affcalc {

/// Set of medians [lo, hi]: F(s) >= 1/2 and F(s-) <= 1/2.
struct MedianInterval {
  double lo;
  double hi;
};

MedianInterval median_interval(const DiscreteMeasure& m);

/// Solution set sigma(x): finitely many maximizers or a median interval.
using SolutionSet = std::variant<std::vector<double>, MedianInterval>;

/// Value function v(x) = sup_s f(s, x) together with its solution map.
///
/// With a nonempty `finite_domain` the sup is a max over that list. Otherwise
/// `solver` supplies sigma(x) and v(x) = f(s, x) for any s in sigma(x). Interval
/// solution sets need `interval_sup` to evaluate sup_{s in I} Df_s(x; y).
template <ConvexPoint Point>
struct EnvelopeProblem {
  std::string name;
  std::vector<double> finite_domain;
  std::function<double(double, const Point&)> objective;
  std::function<double(double, const Point&, const Point&)> section_derivative;
  std::function<SolutionSet(const Point&)> solver;
  std::function<double(const MedianInterval&, const Point&, const Point&)> interval_sup;
};

struct ValueAndSolutions {
  double value;
  SolutionSet solutions;
};

/// Maximizers within this distance of the max are kept in finite domains.
inline constexpr double kArgmaxTolerance = 1e-12;
/// Agreement threshold between the envelope formula and finite differences.
inline constexpr double kDanskinAgreement = 1e-4;

template <ConvexPoint Point>
ValueAndSolutions value_and_solutions(const EnvelopeProblem<Point>& p, const Point& x) {
  if (!p.finite_domain.empty()) {
    std::vector<double> values;
    values.reserve(p.finite_domain.size());
    for (double s : p.finite_domain) values.push_back(p.objective(s, x));
    const double best = *std::max_element(values.begin(), values.end());
    std::vector<double> argmax;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] >= best - kArgmaxTolerance) argmax.push_back(p.finite_domain[i]);
    }
    return {best, std::move(argmax)};
  }
  if (!p.solver) throw Error(ErrorKind::BadParameter, "envelope problem has neither domain nor solver");
  SolutionSet sigma = p.solver(x);
  if (const auto* list = std::get_if<std::vector<double>>(&sigma)) {
    if (list->empty()) throw Error(ErrorKind::NotViable, "solution set is empty");
    return {p.objective(list->front(), x), std::move(sigma)};
  }
  const auto& interval = std::get<MedianInterval>(sigma);
  if (!(interval.lo <= interval.hi)) throw Error(ErrorKind::NotViable, "solution interval is empty");
  return {p.objective(interval.lo, x), std::move(sigma)};
}

struct DanskinResult {
  double formula_value;
  double fd_value;
  bool agree;
  DerivativeReport fd_report;
};

/// sup over sigma(x) of the section derivatives, compared with a finite
/// difference derivative of v along the mixture path. `agree == false`
/// signals that the limsup condition behind the envelope formula fails (or
/// that the finite differences are not resolved; the report keeps the ladder).
template <ConvexPoint Point>
DanskinResult danskin_derivative(const EnvelopeProblem<Point>& p, const Point& x, const Point& y,
                                 LadderOptions opt = {}) {
  const auto at_x = value_and_solutions(p, x);
  double formula = -std::numeric_limits<double>::infinity();
  if (const auto* list = std::get_if<std::vector<double>>(&at_x.solutions)) {
    for (double s : *list) formula = std::max(formula, p.section_derivative(s, x, y));
  } else {
    if (!p.interval_sup) {
      throw Error(ErrorKind::BadParameter, "interval solution set needs an interval_sup handle");
    }
    formula = p.interval_sup(std::get<MedianInterval>(at_x.solutions), x, y);
  }
  auto value = [&p](const Point& z) { return value_and_solutions(p, z).value; };
  auto report = numeric_directional(value, x, y, opt);
  if (report.verdict == Verdict::diverging) {
    throw Error(ErrorKind::NonFiniteDerivative, "value function derivative diverges");
  }
  const double fd = report.estimate;
  return {formula, fd, std::abs(formula - fd) <= kDanskinAgreement, std::move(report)};
}

/// Counterexample on C = [0, 1] with S = {0} u (1/2, 1]:
/// f(s, x) = 1/2 - x for s = 0 and -(x - s)^2 otherwise. At x = 1/2 toward
/// y = 1 the envelope formula gives -1/2 while Dv(1/2; 1) = 0.
EnvelopeProblem<double> counterexample_danskin();

/// L*(mu) = sup_s -int |s - theta| d mu(theta), maximized on the median interval.
EnvelopeProblem<DiscreteMeasure> median_problem();

/// int |s - theta| d mu(theta).
double absolute_deviation(double s, const DiscreteMeasure& mu);

/// DL*(mu; nu) = sup over the medians s of mu of
/// int |s - theta| d mu - int |s - theta| d nu, by exact enumeration of the
/// piecewise-linear objective on the median interval.
double median_envelope_derivative(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

struct StationarityCertificate {
  double min_directional;
  std::size_t arg;
};

/// min over generators g of DT(x_hat; g); lowest index wins ties. Over the
/// convex hull of the generators this is the minimum of the (affine)
/// differential, which is zero at a minimizer.
StationarityCertificate stationarity_certificate(const FunctionalSpec& spec,
                                                 const DiscreteMeasure& x_hat,
                                                 std::span<const DiscreteMeasure> generators);

}  // namespace affcalc

#endif  // AFFCALC_ENVELOPE_HPP
