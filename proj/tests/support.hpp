#ifndef AFFCALC_TESTS_SUPPORT_HPP
#define AFFCALC_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "affcalc/functionals.hpp"
#include "affcalc/measures.hpp"

namespace affcalc::testing {

/// Random probability measure with 1..max_atoms atoms on the lattice
/// lo + k * step inside [lo, hi]; lattice locations make shared atoms common.
inline DiscreteMeasure random_measure(std::mt19937_64& rng, double lo, double hi,
                                      int max_atoms = 8, double step = 0.125) {
  const int slots = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::uniform_int_distribution<int> count(1, max_atoms);
  std::uniform_int_distribution<int> slot(0, slots - 1);
  std::exponential_distribution<double> mass(1.0);
  const int n = count(rng);
  std::vector<std::pair<double, double>> atoms;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = mass(rng) + 1e-3;
    atoms.emplace_back(lo + step * slot(rng), w);
    total += w;
  }
  for (auto& a : atoms) a.second /= total;
  return make_discrete(std::move(atoms), MeasureKind::probability, true);
}

/// Random probability on a fixed finite grid (all grid points may carry mass).
inline DiscreteMeasure random_on_grid(std::mt19937_64& rng, const std::vector<double>& grid) {
  std::exponential_distribution<double> mass(1.0);
  std::bernoulli_distribution keep(0.6);
  std::vector<std::pair<double, double>> atoms;
  for (double x : grid) {
    if (keep(rng)) atoms.emplace_back(x, mass(rng) + 1e-3);
  }
  if (atoms.empty()) atoms.emplace_back(grid.front(), 1.0);
  double total = 0.0;
  for (const auto& a : atoms) total += a.second;
  for (auto& a : atoms) a.second /= total;
  return make_discrete(std::move(atoms), MeasureKind::probability, true);
}

/// Right-continuous CDF by direct summation over atoms.
inline double cdf_sum(const DiscreteMeasure& m, double x) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (m.location(i) <= x) s += m.weight(i);
  }
  return s;
}

/// int (G - F)^2 dx over [a, b] for step CDFs, by splitting at every atom.
inline double squared_cdf_gap_lebesgue(const DiscreteMeasure& f, const DiscreteMeasure& g,
                                       double a, double b) {
  std::vector<double> cuts{a, b};
  for (const auto* m : {&f, &g}) {
    for (Eigen::Index i = 0; i < m->size(); ++i) {
      const double x = m->location(i);
      if (x > a && x < b) cuts.push_back(x);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double d = cdf_sum(g, cuts[k]) - cdf_sum(f, cuts[k]);
    total += d * d * (cuts[k + 1] - cuts[k]);
  }
  return total;
}

/// Standard prospect setup used across tests: tilted gains, convex losses,
/// Lebesgue reference measure on [-2, 2].
inline FunctionalSpec standard_prospect() {
  return FunctionalSpec::prospect(WeightingFunction::tilt(0.3), WeightingFunction::power(2.0),
                                  DensityMeasure::lebesgue(-2.0, 2.0));
}

struct NamedSpec {
  std::string label;
  FunctionalSpec spec;
};

/// One instance of each built-in family exercised by the oracle suites.
inline std::vector<NamedSpec> builtin_specs() {
  std::vector<NamedSpec> out;
  out.push_back({"cdf_at", FunctionalSpec::cdf_at(0.3)});
  out.push_back({"moment", FunctionalSpec::moment(ScalarMap::square())});
  out.push_back({"quadratic", FunctionalSpec::quadratic(Kernel::min())});
  out.push_back({"mann_whitney", FunctionalSpec::mann_whitney()});
  out.push_back({"jump", FunctionalSpec::jump(2.0)});
  out.push_back({"prospect", standard_prospect()});
  out.push_back({"cramer_von_mises", FunctionalSpec::cramer_von_mises(DensityMeasure::uniform(0.0, 1.0))});
  return out;
}

}  // namespace affcalc::testing

#endif  // AFFCALC_TESTS_SUPPORT_HPP
