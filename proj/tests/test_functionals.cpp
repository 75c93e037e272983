#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "affcalc/derivcheck.hpp"
#include "affcalc/error.hpp"
#include "affcalc/functionals.hpp"
#include "support.hpp"

using namespace affcalc;
namespace fx = affcalc::testing;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an affcalc::Error";
  return ErrorKind::EvaluationFailure;
}

// Two-point difference quotient at a tiny step, an oracle independent of the
// library's extrapolation.
double forward_difference(const FunctionalSpec& spec, const DiscreteMeasure& m,
                          const DiscreteMeasure& dir, double t = 1e-7) {
  return (eval(spec, mix(m, dir, t)) - eval(spec, m)) / t;
}

// Prospect value by midpoint quadrature on a fine grid (Lebesgue reference).
double prospect_quadrature(const WeightingFunction& wp, const WeightingFunction& wm,
                           const DiscreteMeasure& m, double lo, double hi, int cells) {
  const double h = (hi - lo) / cells;
  double total = 0.0;
  for (int i = 0; i < cells; ++i) {
    const double x = lo + (i + 0.5) * h;
    const double f = fx::cdf_sum(m, x);
    total += x >= 0.0 ? wp.value(1.0 - f) * h : -wm.value(f) * h;
  }
  return total;
}

}  // namespace

TEST(Eval, Examples) {
  const auto cvm = FunctionalSpec::cramer_von_mises(DiscreteMeasure::uniform({0.0, 1.0}));
  EXPECT_EQ(eval(cvm, DiscreteMeasure::uniform({0.0, 1.0})), 0.0);
  EXPECT_DOUBLE_EQ(eval(FunctionalSpec::quadratic(Kernel::product()), DiscreteMeasure::uniform({0.0, 1.0})), 0.25);
  EXPECT_DOUBLE_EQ(eval(FunctionalSpec::jump(2.0), DiscreteMeasure::uniform({0.0, 1.0})), 0.5);
}

TEST(Eval, QuadraticMatchesDoubleSum) {
  std::mt19937_64 rng(21);
  const auto spec = FunctionalSpec::quadratic(Kernel::min());
  for (int i = 0; i < 50; ++i) {
    const auto m = fx::random_measure(rng, -1.0, 1.0);
    double oracle = 0.0;
    for (Eigen::Index a = 0; a < m.size(); ++a) {
      for (Eigen::Index b = 0; b < m.size(); ++b) {
        oracle += m.weight(a) * m.weight(b) * std::min(m.location(a), m.location(b));
      }
    }
    EXPECT_NEAR(eval(spec, m), oracle, 1e-14);
  }
}

TEST(Eval, CramerVonMisesDensityMatchesQuadrature) {
  std::mt19937_64 rng(22);
  const auto spec = FunctionalSpec::cramer_von_mises(DensityMeasure::uniform(0.0, 1.0));
  for (int i = 0; i < 20; ++i) {
    const auto m = fx::random_measure(rng, -0.5, 1.5);
    // int (F - u)^2 du over [0, 1] by a fine midpoint rule.
    const int cells = 200000;
    double oracle = 0.0;
    for (int k = 0; k < cells; ++k) {
      const double u = (k + 0.5) / cells;
      const double d = fx::cdf_sum(m, u) - u;
      oracle += d * d / cells;
    }
    EXPECT_NEAR(eval(spec, m), oracle, 1e-6);
  }
}

TEST(Eval, ProspectMatchesQuadrature) {
  std::mt19937_64 rng(23);
  const auto wp = WeightingFunction::tilt(0.3);
  const auto wm = WeightingFunction::power(2.0);
  const auto spec = fx::standard_prospect();
  for (int i = 0; i < 20; ++i) {
    const auto m = fx::random_measure(rng, -1.5, 1.5);
    EXPECT_NEAR(eval(spec, m), prospect_quadrature(wp, wm, m, -2.0, 2.0, 400000), 1e-5);
  }
}

TEST(Eval, MannWhitneySlots) {
  const auto mu = DiscreteMeasure::uniform({0.0, 2.0});
  const auto lambda = DiscreteMeasure::uniform({1.0, 3.0});
  // B(mu, lambda) = int F_mu d lambda = (1/2)(1/2) + (1/2)(1) = 3/4.
  EXPECT_DOUBLE_EQ(mann_whitney(mu, lambda), 0.75);
  EXPECT_DOUBLE_EQ(eval(FunctionalSpec::mann_whitney_first(lambda), mu), 0.75);
  EXPECT_DOUBLE_EQ(eval(FunctionalSpec::mann_whitney_second(mu), lambda), 0.75);
  EXPECT_DOUBLE_EQ(eval(FunctionalSpec::mann_whitney(), mu), mann_whitney(mu, mu));
}

TEST(Eval, RejectsSignedArgument) {
  const DiscreteMeasure s({{0.0, 2.0}, {1.0, -1.0}}, MeasureKind::signed_measure);
  EXPECT_EQ(kind_of([&] { eval(FunctionalSpec::moment(ScalarMap::identity()), s); }),
            ErrorKind::NotAProbability);
}

TEST(Spec, Validation) {
  try {
    FunctionalSpec::jump(0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BadParameter);
    EXPECT_NE(std::string(e.what()).find("alpha > 1"), std::string::npos);
  }
  EXPECT_EQ(kind_of([] { FunctionalSpec::jump(1.0); }), ErrorKind::BadParameter);
  EXPECT_EQ(kind_of([] { FunctionalSpec::cramer_von_mises(DensityMeasure::lebesgue(0.0, 2.0)); }),
            ErrorKind::NotAProbability);
  EXPECT_EQ(kind_of([] { WeightingFunction::tilt(1.5); }), ErrorKind::BadParameter);
  EXPECT_EQ(kind_of([] { WeightingFunction::power(0.5); }), ErrorKind::BadParameter);
  EXPECT_EQ(kind_of([] { FunctionalSpec::quadratic(Kernel::product().with_bound(0.5)); }),
            ErrorKind::BadParameter);
}

TEST(Spec, AffineFlags) {
  EXPECT_TRUE(FunctionalSpec::cdf_at(0.0).is_affine());
  EXPECT_TRUE(FunctionalSpec::moment(ScalarMap::square()).is_affine());
  EXPECT_TRUE(FunctionalSpec::neg_abs_loss(0.0).is_affine());
  EXPECT_FALSE(FunctionalSpec::mann_whitney().is_affine());
  EXPECT_TRUE(FunctionalSpec::mann_whitney_first(DiscreteMeasure::dirac(0.0)).is_affine());
  EXPECT_FALSE(FunctionalSpec::jump(2.0).is_affine());
}

TEST(Kernel, TableCsv) {
  std::stringstream ss(",0,1\n0,0,0.5\n1,0.5,1\n");
  const auto k = Kernel::read_table_csv(ss);
  EXPECT_EQ(k(0.0, 1.0), 0.5);
  EXPECT_EQ(k(1.0, 1.0), 1.0);
  EXPECT_EQ(kind_of([&] { k(0.5, 1.0); }), ErrorKind::DomainMismatch);
  std::stringstream asym(",0,1\n0,0,0.5\n1,0.4,1\n");
  EXPECT_EQ(kind_of([&] {
              const auto t = Kernel::read_table_csv(asym);
              t.validate(std::vector<double>{0.0, 1.0});
            }),
            ErrorKind::BadParameter);
}

TEST(AnalyticDirectional, Examples) {
  EXPECT_DOUBLE_EQ(analytic_directional(FunctionalSpec::quadratic(Kernel::product()), DiscreteMeasure::dirac(1.0),
                                        DiscreteMeasure::dirac(0.0)),
                   -2.0);
  EXPECT_DOUBLE_EQ(analytic_directional(FunctionalSpec::cdf_at(0.4), DiscreteMeasure::dirac(0.0),
                                        DiscreteMeasure::dirac(1.0)),
                   -1.0);
  const auto prospect = FunctionalSpec::prospect(WeightingFunction::identity(), WeightingFunction::identity(),
                                                 DensityMeasure::lebesgue(-1.0, 1.0));
  EXPECT_NEAR(analytic_directional(prospect, DiscreteMeasure::dirac(0.0), DiscreteMeasure::dirac(0.5)), 0.5,
              1e-15);
  EXPECT_NEAR(eval(prospect, DiscreteMeasure::dirac(0.5)) - eval(prospect, DiscreteMeasure::dirac(0.0)), 0.5,
              1e-15);
}

TEST(AnalyticDirectional, AgreesWithForwardDifferences) {
  std::mt19937_64 rng(24);
  for (const auto& [label, spec] : fx::builtin_specs()) {
    for (int i = 0; i < 30; ++i) {
      const auto m = fx::random_measure(rng, -1.5, 1.5);
      const auto d = fx::random_measure(rng, -1.5, 1.5);
      const double a = analytic_directional(spec, m, d);
      EXPECT_NEAR(a, forward_difference(spec, m, d), 1e-5 * (1.0 + std::abs(a))) << label;
    }
  }
}

TEST(AnalyticDirectional, CramerVonMisesClosedForm) {
  // DT = 2 int (F - F0)(G - F) dF0, checked by midpoint quadrature.
  std::mt19937_64 rng(25);
  const auto spec = FunctionalSpec::cramer_von_mises(DensityMeasure::uniform(0.0, 1.0));
  for (int i = 0; i < 10; ++i) {
    const auto f = fx::random_measure(rng, -0.25, 1.25);
    const auto g = fx::random_measure(rng, -0.25, 1.25);
    const int cells = 200000;
    double oracle = 0.0;
    for (int k = 0; k < cells; ++k) {
      const double u = (k + 0.5) / cells;
      const double fu = fx::cdf_sum(f, u);
      oracle += 2.0 * (fu - u) * (fx::cdf_sum(g, u) - fu) / cells;
    }
    EXPECT_NEAR(analytic_directional(spec, f, g), oracle, 1e-6);
  }
}

TEST(AnalyticDirectional, VanishesAtCramerVonMisesMinimizer) {
  const auto f0 = DiscreteMeasure::uniform({0.0, 0.5, 1.0});
  const auto spec = FunctionalSpec::cramer_von_mises(f0);
  std::mt19937_64 rng(26);
  for (int i = 0; i < 20; ++i) {
    EXPECT_NEAR(analytic_directional(spec, f0, fx::random_measure(rng, -1.0, 2.0)), 0.0, 1e-15);
  }
}

TEST(Influence, QuadraticProductExample) {
  const auto spec = FunctionalSpec::quadratic(Kernel::product());
  const std::vector<double> grid{0.0, 1.0};
  const auto u = influence(spec, DiscreteMeasure::uniform({0.0, 1.0}), grid);
  EXPECT_DOUBLE_EQ(u.at(0.0), -0.5);
  EXPECT_DOUBLE_EQ(u.at(1.0), 0.5);
  EXPECT_EQ(kind_of([&] { u.at(0.5); }), ErrorKind::DomainMismatch);
}

TEST(Influence, ZeroAtCramerVonMisesMinimizer) {
  const auto f0 = DiscreteMeasure::uniform({0.0, 1.0, 2.0});
  const std::vector<double> grid{-1.0, 0.5, 3.0};
  const auto u = influence(FunctionalSpec::cramer_von_mises(f0), f0, grid);
  for (Eigen::Index i = 0; i < u.values.size(); ++i) EXPECT_NEAR(u.values[i], 0.0, 1e-15);
}

TEST(Influence, GridIncludesSupport) {
  const auto m = DiscreteMeasure::uniform({0.25, 0.75});
  const std::vector<double> grid{0.0, 1.0};
  const auto u = influence(FunctionalSpec::moment(ScalarMap::square()), m, grid);
  EXPECT_EQ(u.grid, (std::vector<double>{0.0, 0.25, 0.75, 1.0}));
  EXPECT_NEAR(u.integrate(m), 0.0, 1e-16);
}

TEST(MannWhitney, GradientReconstructsBiaffineDerivative) {
  std::mt19937_64 rng(27);
  for (int i = 0; i < 50; ++i) {
    const auto mu = fx::random_measure(rng, -1.0, 1.0);
    const auto lambda = fx::random_measure(rng, -1.0, 1.0);
    const auto mu1 = fx::random_measure(rng, -1.0, 1.0);
    const auto lambda1 = fx::random_measure(rng, -1.0, 1.0);
    std::vector<double> grid = merge_points(union_support(mu, lambda), union_support(mu1, lambda1));
    const auto g = mann_whitney_gradient(mu, lambda, grid);
    auto integrate = [&](const Vector& values, const DiscreteMeasure& m) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < m.size(); ++k) {
        const auto it = std::find(grid.begin(), grid.end(), m.location(k));
        s += m.weight(k) * values[it - grid.begin()];
      }
      return s;
    };
    const double rebuilt = integrate(g.first, mu1) - integrate(g.first, mu) + integrate(g.second, lambda1) -
                           integrate(g.second, lambda);
    EXPECT_NEAR(rebuilt, mann_whitney_directional(mu, lambda, mu1, lambda1), 1e-14);
  }
}

TEST(MannWhitney, GradientOffAtomsIsMinusCdf) {
  const auto lambda = DiscreteMeasure::uniform({0.0, 1.0});
  const auto mu = DiscreteMeasure::dirac(0.5);
  const std::vector<double> grid{-1.0, 0.5, 2.0};
  const auto g = mann_whitney_gradient(mu, lambda, grid);
  EXPECT_EQ(g.first[0], -0.0);
  EXPECT_EQ(g.first[1], -0.5);
  EXPECT_EQ(g.first[2], -1.0);
  EXPECT_EQ(g.second[1], 1.0);
}

TEST(Prospect, GradientIsIntegralOfPhi) {
  const spec::Prospect p{WeightingFunction::tilt(0.3), WeightingFunction::power(2.0),
                         DensityMeasure::lebesgue(-2.0, 2.0)};
  const auto mu = DiscreteMeasure::uniform({-1.0, 0.5, 1.25});
  for (double x : {-1.5, -0.25, 0.0, 0.75, 1.9}) {
    const int cells = 200000;
    const double h = (x + 2.0) / cells;
    double oracle = 0.0;
    for (int k = 0; k < cells; ++k) oracle += prospect_phi(p, mu, -2.0 + (k + 0.5) * h) * h;
    EXPECT_NEAR(prospect_gradient(p, mu, x), oracle, 1e-4);
  }
}

TEST(Prospect, AtomOutsideCarrierIsDomainMismatch) {
  const auto spec = fx::standard_prospect();
  EXPECT_EQ(kind_of([&] { eval(spec, DiscreteMeasure::dirac(3.0)); }), ErrorKind::DomainMismatch);
}

TEST(Prospect, SureDominanceOfFirstOrderShift) {
  const spec::Prospect p{WeightingFunction::tilt(0.3), WeightingFunction::power(2.0),
                         DensityMeasure::lebesgue(-2.0, 2.0)};
  const auto a = DiscreteMeasure::uniform({0.0, 1.0});
  const auto b = DiscreteMeasure::uniform({-0.5, 0.5});
  const std::vector<DiscreteMeasure> probes{DiscreteMeasure::dirac(0.0), DiscreteMeasure::uniform({-1.0, 1.0}),
                                            DiscreteMeasure::uniform({-1.5, 0.25, 1.5})};
  EXPECT_TRUE(prospect_sure_dominance(p, a, b, probes));
  EXPECT_FALSE(prospect_sure_dominance(p, b, a, probes));
}

TEST(Dominance, Examples) {
  const auto spec = FunctionalSpec::quadratic(Kernel::product());
  const std::vector<DiscreteMeasure> probes{DiscreteMeasure::dirac(0.0), DiscreteMeasure::dirac(0.5),
                                            DiscreteMeasure::dirac(1.0), DiscreteMeasure::uniform({0.0, 1.0})};
  const std::vector<double> alphas{0.01, 0.5, 1.0};
  const auto d0 = DiscreteMeasure::dirac(0.0);
  const auto d1 = DiscreteMeasure::dirac(1.0);
  auto v = dominance_test(spec, d1, d0, probes, alphas);
  EXPECT_TRUE(v.direct);
  EXPECT_TRUE(v.local_utility);
  v = dominance_test(spec, d1, d1, probes, alphas);
  EXPECT_TRUE(v.direct);
  EXPECT_TRUE(v.local_utility);
  v = dominance_test(spec, d0, d1, probes, alphas);
  EXPECT_FALSE(v.direct);
  EXPECT_FALSE(v.local_utility);
}
