#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "affcalc/derivcheck.hpp"
#include "affcalc/error.hpp"
#include "support.hpp"

using namespace affcalc;
namespace fx = affcalc::testing;

namespace {

auto cobb_douglas(double a, double b) {
  return [a, b](const Eigen::Vector2d& x) { return std::pow(x[0], a) * std::pow(x[1], b); };
}

}  // namespace

TEST(NumericDirectional, QuadraticExample) {
  const auto spec = FunctionalSpec::quadratic(Kernel::product());
  const auto r = numeric_directional(as_function(spec), DiscreteMeasure::dirac(1.0), DiscreteMeasure::dirac(0.0));
  EXPECT_EQ(r.verdict, Verdict::converged);
  EXPECT_NEAR(r.estimate, -2.0, 1e-8);
  ASSERT_EQ(r.step_ladder.size(), 13u);
  EXPECT_EQ(r.step_ladder.front().first, 0x1p-4);
  EXPECT_EQ(r.step_ladder.back().first, 0x1p-16);
}

TEST(NumericDirectional, ScalarAndVectorPoints) {
  auto cube = [](double x) { return x * x * x; };
  // D(x; y) = f'(x) (y - x) = 3 * 4 * (3 - 2) at x = 2.
  EXPECT_NEAR(numeric_directional(cube, 2.0, 3.0).estimate, 12.0, 1e-9);
  const Eigen::Vector2d x(1.0, 2.0), y(2.0, 1.0);
  auto norm2 = [](const Eigen::Vector2d& v) { return v.squaredNorm(); };
  EXPECT_NEAR(numeric_directional(norm2, x, y).estimate, 2.0 * x.dot(y - x), 1e-9);
}

TEST(NumericDirectional, CobbDouglasRegimes) {
  const Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  const Eigen::Vector2d ones(1.0, 1.0);
  const auto unit = numeric_directional(cobb_douglas(0.5, 0.5), origin, ones);
  EXPECT_EQ(unit.verdict, Verdict::converged);
  EXPECT_NEAR(unit.estimate, 1.0, 1e-12);
  EXPECT_EQ(numeric_directional(cobb_douglas(0.3, 0.3), origin, ones).verdict, Verdict::diverging);
  const auto high = numeric_directional(cobb_douglas(0.75, 0.75), origin, ones);
  EXPECT_EQ(high.verdict, Verdict::converged);
  EXPECT_EQ(high.method, "aitken");
  EXPECT_NEAR(high.estimate, 0.0, 1e-12);
}

TEST(NumericDirectional, OscillatingQuotients) {
  // t sin(1/t) has quotients sin(1/t): bounded, no limit.
  auto f = [](double x) { return x == 0.0 ? 0.0 : x * std::sin(1.0 / x); };
  EXPECT_EQ(numeric_directional(f, 0.0, 1.0).verdict, Verdict::oscillating);
}

TEST(NumericDirectional, WrapsForeignExceptionsAndNonFiniteValues) {
  auto throws = [](double) -> double { throw std::runtime_error("boom"); };
  try {
    numeric_directional(throws, 0.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EvaluationFailure);
  }
  auto nan = [](double x) { return x > 0.0 ? std::nan("") : 0.0; };
  try {
    numeric_directional(nan, 0.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EvaluationFailure);
  }
}

TEST(NumericDirectional, RejectsBadLadder) {
  auto f = [](double x) { return x; };
  LadderOptions opt;
  opt.ladder = 3;
  EXPECT_THROW(numeric_directional(f, 0.0, 1.0, opt), Error);
}

TEST(AffinityTest, Examples) {
  const Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  std::vector<Eigen::Vector2d> probes{{1.0, 1.0}, {2.0, 0.5}, {0.3, 1.7}, {1.2, 0.4}};
  EXPECT_FALSE(affinity_test(cobb_douglas(0.5, 0.5), origin, std::span<const Eigen::Vector2d>(probes), 10).affine);
  const auto high = affinity_test(cobb_douglas(0.75, 0.75), origin, std::span<const Eigen::Vector2d>(probes), 10);
  EXPECT_TRUE(high.affine);
  EXPECT_LE(high.max_defect, 1e-8);
  EXPECT_THROW(affinity_test(cobb_douglas(0.3, 0.3), origin, std::span<const Eigen::Vector2d>(probes), 10), Error);

  const auto spec = FunctionalSpec::quadratic(Kernel::product());
  std::vector<DiscreteMeasure> measures{DiscreteMeasure::dirac(0.0), DiscreteMeasure::dirac(1.0),
                                        DiscreteMeasure::uniform({0.25, 0.5}), DiscreteMeasure::dirac(0.8)};
  const auto q = affinity_test(as_function(spec), DiscreteMeasure::uniform({0.0, 1.0}),
                               std::span<const DiscreteMeasure>(measures), 10);
  EXPECT_TRUE(q.affine);
  EXPECT_LE(q.max_defect, 1e-8);
}

TEST(MeanValuePoint, Examples) {
  const auto spec = FunctionalSpec::quadratic(Kernel::product());
  const auto r = mean_value_point(spec, DiscreteMeasure::dirac(0.0), DiscreteMeasure::dirac(1.0));
  EXPECT_NEAR(r.t_star, 0.5, 1e-10);
  EXPECT_LE(r.residual, 1e-10);
  const auto m = DiscreteMeasure::uniform({0.0, 1.0});
  EXPECT_EQ(mean_value_point(spec, m, m).residual, 0.0);
  const auto moment = FunctionalSpec::moment(ScalarMap::square());
  EXPECT_LE(mean_value_point(moment, DiscreteMeasure::dirac(0.0), DiscreteMeasure::dirac(2.0)).residual, 1e-12);
}

TEST(MeanValuePoint, SatisfiesDefiningEquation) {
  // Independent check of phi'(t*) = f(y) - f(x) by central differences of phi.
  std::mt19937_64 rng(31);
  for (const auto& [label, spec] : fx::builtin_specs()) {
    for (int i = 0; i < 5; ++i) {
      const auto x = fx::random_measure(rng, -1.5, 1.5);
      const auto y = fx::random_measure(rng, -1.5, 1.5);
      const auto r = mean_value_point(spec, x, y);
      const double h = 1e-5;
      const double lo = std::max(0.0, r.t_star - h), hi = std::min(1.0, r.t_star + h);
      const double slope = (eval(spec, mix(x, y, hi)) - eval(spec, mix(x, y, lo))) / (hi - lo);
      EXPECT_NEAR(slope, eval(spec, y) - eval(spec, x), 1e-6) << label;
    }
  }
}

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  const auto [t, w] = gauss_legendre(8);
  EXPECT_NEAR(w.sum(), 1.0, 1e-15);
  for (int p = 0; p <= 15; ++p) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < t.size(); ++i) s += w[i] * std::pow(t[i], p);
    EXPECT_NEAR(s, 1.0 / (p + 1), 1e-15) << p;
  }
}

TEST(SegmentIntegralIdentity, Examples) {
  const auto spec = FunctionalSpec::quadratic(Kernel::product());
  EXPECT_LE(segment_integral_identity(spec, DiscreteMeasure::dirac(0.0), DiscreteMeasure::dirac(1.0), 32), 1e-12);
  const auto m = DiscreteMeasure::uniform({0.0, 1.0});
  EXPECT_EQ(segment_integral_identity(spec, m, m, 32), 0.0);
  const auto prospect = FunctionalSpec::prospect(WeightingFunction::identity(), WeightingFunction::identity(),
                                                 DensityMeasure::lebesgue(-1.0, 1.0));
  EXPECT_LE(segment_integral_identity(prospect, DiscreteMeasure::dirac(-0.5), DiscreteMeasure::uniform({0.2, 0.9}), 32),
            1e-10);
}

TEST(ShapeProbe, ConvexFunctionalsHoldEverywhere) {
  std::mt19937_64 rng(32);
  std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>> pairs;
  for (int i = 0; i < 100; ++i) {
    pairs.emplace_back(fx::random_measure(rng, -0.5, 1.5), fx::random_measure(rng, -0.5, 1.5));
  }
  const auto cvm = FunctionalSpec::cramer_von_mises(DensityMeasure::uniform(0.0, 1.0));
  EXPECT_TRUE(shape_probe(cvm, ShapeProperty::monotone_derivative, pairs).holds);
  EXPECT_TRUE(shape_probe(FunctionalSpec::quadratic(Kernel::product()), ShapeProperty::convex, pairs).holds);
}

TEST(ShapeProbe, NegatedQuadraticWitness) {
  const auto spec = FunctionalSpec::quadratic(Kernel::product(-1.0));
  const std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>> pairs{
      {DiscreteMeasure::dirac(0.0), DiscreteMeasure::dirac(1.0)}};
  const auto r = shape_probe(spec, ShapeProperty::monotone_derivative, pairs);
  ASSERT_FALSE(r.holds);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_DOUBLE_EQ(r.witness->dxy, 0.0);
  EXPECT_DOUBLE_EQ(r.witness->dyx, 2.0);
  EXPECT_TRUE(witness_violates(ShapeProperty::monotone_derivative, *r.witness));
  EXPECT_FALSE(shape_probe(spec, ShapeProperty::convex, pairs).holds);
}

TEST(ShapeProbe, ParsesPropertyNames) {
  EXPECT_EQ(parse_shape_property("pseudoconvex"), ShapeProperty::pseudoconvex);
  EXPECT_EQ(shape_property_name(ShapeProperty::quasiconvex), "quasiconvex");
  EXPECT_THROW(parse_shape_property("concave"), Error);
}
