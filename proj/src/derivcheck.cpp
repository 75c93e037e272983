#include "affcalc/derivcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace affcalc {

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::converged: return "converged";
    case Verdict::diverging: return "diverging";
    case Verdict::oscillating: return "oscillating";
  }
  return "unknown";
}

namespace {

struct Extrapolant {
  double estimate;
  double error;
};

Extrapolant richardson_tail(const std::vector<double>& q) {
  const std::size_t n = q.size();
  auto level2 = [&](std::size_t k) {
    const double r1 = 2.0 * q[k] - q[k - 1];
    const double r1_prev = 2.0 * q[k - 1] - q[k - 2];
    return (4.0 * r1 - r1_prev) / 3.0;
  };
  const double last = level2(n - 1);
  return {last, std::abs(last - level2(n - 2))};
}

Extrapolant aitken_tail(const std::vector<double>& q) {
  const std::size_t n = q.size();
  auto accelerate = [&](std::size_t k) {
    const double d1 = q[k] - q[k - 1];
    const double d0 = q[k - 1] - q[k - 2];
    const double denom = d1 - d0;
    // Only a contracting difference sequence has a finite limit to jump to.
    if (d0 == 0.0 || denom == 0.0 || !(std::abs(d1) < std::abs(d0))) return q[k];
    return q[k] - d1 * d1 / denom;
  };
  const double last = accelerate(n - 1);
  return {last, std::abs(last - accelerate(n - 2))};
}

}  // namespace

DerivativeReport analyze_ladder(std::vector<std::pair<double, double>> ladder, double tolerance) {
  if (ladder.size() < 5) {
    throw Error(ErrorKind::BadParameter, "ladder analysis needs at least five quotients");
  }
  std::vector<double> q;
  q.reserve(ladder.size());
  for (const auto& step : ladder) q.push_back(step.second);

  DerivativeReport report;
  report.step_ladder = std::move(ladder);

  const auto rich = richardson_tail(q);
  const auto aitken = aitken_tail(q);
  const bool use_aitken = aitken.error < rich.error;
  const auto& best = use_aitken ? aitken : rich;
  report.method = use_aitken ? "aitken" : "richardson";
  report.estimate = best.estimate;
  report.extrapolated_error = best.error;

  const std::size_t n = q.size();
  const double growth = std::exp2(0.1);
  bool growing = true;
  for (std::size_t k = n - 3; k < n; ++k) {
    if (!(std::abs(q[k]) >= growth * std::abs(q[k - 1])) || q[k - 1] == 0.0) growing = false;
  }
  if (!std::isfinite(best.estimate)) {
    report.verdict = Verdict::diverging;
    report.estimate = q.back();
  } else if (best.error <= tolerance) {
    report.verdict = Verdict::converged;
  } else if (growing) {
    report.verdict = Verdict::diverging;
    report.estimate = q.back();
  } else {
    report.verdict = Verdict::oscillating;
  }
  return report;
}

namespace {

// phi'(t) - [f(y) - f(x)], switching between the two equivalent forms of
// phi'(t) so the division is never by a small number.
double mean_value_gap(const FunctionalSpec& spec, const DiscreteMeasure& x,
                      const DiscreteMeasure& y, double chord, double t) {
  const auto xt = mix(x, y, t);
  const double slope = t <= 0.5 ? analytic_directional(spec, xt, y) / (1.0 - t)
                                : -analytic_directional(spec, xt, x) / t;
  return slope - chord;
}

}  // namespace

MeanValuePoint mean_value_point(const FunctionalSpec& spec, const DiscreteMeasure& x,
                                const DiscreteMeasure& y, int scan_nodes, double tolerance) {
  if (scan_nodes < 3) throw Error(ErrorKind::BadParameter, "mean value scan needs at least 3 nodes");
  const double chord = eval(spec, y) - eval(spec, x);
  auto gap = [&](double t) { return mean_value_gap(spec, x, y, chord, t); };

  double prev_t = 0.0;
  double prev_g = gap(0.0);
  for (int i = 1; i < scan_nodes; ++i) {
    const double t = static_cast<double>(i) / (scan_nodes - 1);
    const double g = gap(t);
    if (prev_g * g < 0.0) {
      double lo = prev_t, hi = t, glo = prev_g;
      double best_t = std::abs(prev_g) < std::abs(g) ? prev_t : t;
      double best_g = std::min(std::abs(prev_g), std::abs(g));
      for (int iter = 0; iter < 200 && best_g > 0.0; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double gm = gap(mid);
        if (std::abs(gm) < best_g) {
          best_g = std::abs(gm);
          best_t = mid;
        }
        if ((glo < 0.0) == (gm < 0.0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      return {best_t, best_g};
    }
    if (t < 1.0 && std::abs(g) <= tolerance) return {t, std::abs(g)};
    prev_t = t;
    prev_g = g;
  }
  throw Error(ErrorKind::NoBracket, "no sign change of the mean value gap at " +
                                        std::to_string(scan_nodes) + " scan nodes");
}

std::pair<Vector, Vector> gauss_legendre(int nodes) {
  if (nodes < 1) throw Error(ErrorKind::BadParameter, "quadrature needs at least one node");
  const Eigen::Index n = nodes;
  Matrix jacobi = Matrix::Zero(n, n);
  for (Eigen::Index k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    const double beta = kk / std::sqrt(4.0 * kk * kk - 1.0);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(jacobi);
  Vector x = solver.eigenvalues();
  Vector w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    // One Newton step on P_n polishes the eigenvalue; weights from P_n'.
    double p0 = 1.0, p1 = x[i];
    auto legendre = [&](double z, double& pn, double& dpn) {
      double a = 1.0, b = z;
      if (n == 1) {
        pn = z;
        dpn = 1.0;
        return;
      }
      for (Eigen::Index k = 2; k <= n; ++k) {
        const double c = ((2.0 * k - 1.0) * z * b - (k - 1.0) * a) / k;
        a = b;
        b = c;
      }
      pn = b;
      dpn = n * (z * b - a) / (z * z - 1.0);
    };
    legendre(x[i], p0, p1);
    x[i] -= p0 / p1;
    legendre(x[i], p0, p1);
    w[i] = 2.0 / ((1.0 - x[i] * x[i]) * p1 * p1);
  }
  Vector t = (x.array() + 1.0) * 0.5;
  Vector wt = w * 0.5;
  return {t, wt};
}

double segment_integral_identity(const FunctionalSpec& spec, const DiscreteMeasure& x,
                                 const DiscreteMeasure& y, int nodes) {
  const auto [t, w] = gauss_legendre(nodes);
  double integral = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    integral += w[i] * analytic_directional(spec, mix(x, y, t[i]), y) / (1.0 - t[i]);
  }
  return std::abs(eval(spec, y) - eval(spec, x) - integral);
}

std::string_view shape_property_name(ShapeProperty p) {
  switch (p) {
    case ShapeProperty::convex: return "convex";
    case ShapeProperty::quasiconvex: return "quasiconvex";
    case ShapeProperty::pseudoconvex: return "pseudoconvex";
    case ShapeProperty::monotone_derivative: return "monotone_derivative";
  }
  return "unknown";
}

ShapeProperty parse_shape_property(std::string_view name) {
  if (name == "convex") return ShapeProperty::convex;
  if (name == "quasiconvex") return ShapeProperty::quasiconvex;
  if (name == "pseudoconvex") return ShapeProperty::pseudoconvex;
  if (name == "monotone_derivative") return ShapeProperty::monotone_derivative;
  throw Error(ErrorKind::BadParameter,
              "unknown shape property '" + std::string(name) +
                  "' (convex | quasiconvex | pseudoconvex | monotone_derivative)");
}

bool witness_violates(ShapeProperty property, const ShapeWitness& w, double tol,
                      double tol_strict) {
  switch (property) {
    case ShapeProperty::monotone_derivative: return w.dxy + w.dyx > tol;
    case ShapeProperty::convex: return w.fy < w.fx + w.dxy - tol;
    case ShapeProperty::quasiconvex: return w.fy <= w.fx && w.dxy > tol;
    case ShapeProperty::pseudoconvex: return w.fy < w.fx - tol && !(w.dxy < -tol_strict);
  }
  return false;
}

ShapeReport shape_probe(const FunctionalSpec& spec, ShapeProperty property,
                        std::span<const std::pair<DiscreteMeasure, DiscreteMeasure>> pairs,
                        double tol, double tol_strict) {
  ShapeReport report{property, true, std::nullopt};
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [x, y] = pairs[i];
    const double fx = eval(spec, x);
    const double fy = eval(spec, y);
    const double dxy = analytic_directional(spec, x, y);
    const double dyx = analytic_directional(spec, y, x);
    ShapeWitness forward{x, y, fx, fy, dxy, dyx};
    if (witness_violates(property, forward, tol, tol_strict)) {
      report.holds = false;
      report.witness = std::move(forward);
      report.pair_index = i;
      return report;
    }
    ShapeWitness backward{y, x, fy, fx, dyx, dxy};
    if (witness_violates(property, backward, tol, tol_strict)) {
      report.holds = false;
      report.witness = std::move(backward);
      report.pair_index = i;
      return report;
    }
  }
  return report;
}

}  // namespace affcalc
