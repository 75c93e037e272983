#ifndef AFFCALC_FUNCTIONALS_HPP
#define AFFCALC_FUNCTIONALS_HPP

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "affcalc/measures.hpp"

namespace affcalc {

/// A scalar function together with the name it is reported under.
struct ScalarMap {
  std::string name;
  std::function<double(double)> fn;

  double operator()(double x) const { return fn(x); }

  static ScalarMap identity();
  static ScalarMap square();
  static ScalarMap absolute();
  /// Looks up identity | square | abs | cube | exp | sin by name.
  static ScalarMap named(std::string_view name);
};

/// Symmetric bounded kernel psi(x, y) for quadratic functionals.
class Kernel {
 public:
  enum class Form { product, min, max_of, table };

  /// psi(x, y) = scale * x * y.
  static Kernel product(double scale = 1.0);
  /// psi(x, y) = min(x, y).
  static Kernel min();
  /// psi(x, y) = max(f(x), f(y)).
  static Kernel max_of(ScalarMap f);
  /// Values on grid x grid; evaluation off the grid is a DomainMismatch.
  static Kernel table(std::vector<double> grid, Matrix values);
  /// Header `,g1,...,gk`, then one row `gi,v_i1,...,v_ik` per grid point.
  static Kernel read_table_csv(std::istream& in);

  Form form() const { return form_; }
  std::string describe() const;
  double bound() const { return bound_; }
  Kernel with_bound(double bound) const;

  double operator()(double x, double y) const;
  /// Matrix of psi(xs[i], ys[j]).
  Matrix gram(const Vector& xs, const Vector& ys) const;

  /// Throws BadParameter unless psi is symmetric to 1e-12 and |psi| <= bound
  /// on grid x grid.
  void validate(std::span<const double> grid) const;

 private:
  Kernel(Form form) : form_(form) {}

  Form form_;
  double scale_ = 1.0;
  ScalarMap f_;
  std::vector<double> grid_;
  Matrix table_;
  double bound_ = std::numeric_limits<double>::infinity();
};

/// Increasing C^1 probability weighting w: [0,1] -> [0,1] with w(0)=0, w(1)=1.
struct WeightingFunction {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> derivative;

  static WeightingFunction identity();
  /// p^gamma, gamma >= 1.
  static WeightingFunction power(double gamma);
  /// p + c p (1 - p), |c| < 1.
  static WeightingFunction tilt(double c);

  /// Throws BadParameter unless w(0)=0, w(1)=1 and w strictly increases on a
  /// 101-point grid.
  void validate() const;
};

namespace spec {

struct CdfAt {
  double x0;
};

struct Moment {
  ScalarMap g;
};

struct Quadratic {
  Kernel kernel;
};

/// B(mu, lambda) = int F_mu d lambda. `diagonal` evaluates B(m, m); the
/// other slots hold the partner measure fixed.
struct MannWhitney {
  enum class Slot { diagonal, first, second };
  Slot slot = Slot::diagonal;
  std::optional<DiscreteMeasure> partner;
};

struct Jump {
  double alpha;
};

struct Prospect {
  WeightingFunction w_plus;
  WeightingFunction w_minus;
  DensityMeasure rho;
};

struct CramerVonMises {
  std::variant<DensityMeasure, DiscreteMeasure> f0;
};

/// Section U(s, mu) = -int |s - theta| d mu(theta).
struct NegAbsLoss {
  double s;
};

}  // namespace spec

/// One of the built-in statistical functionals with its parameters.
/// Construction validates the variant's parameter constraints.
class FunctionalSpec {
 public:
  using Variant = std::variant<spec::CdfAt, spec::Moment, spec::Quadratic, spec::MannWhitney,
                               spec::Jump, spec::Prospect, spec::CramerVonMises,
                               spec::NegAbsLoss>;

  explicit FunctionalSpec(Variant form);

  static FunctionalSpec cdf_at(double x0);
  static FunctionalSpec moment(ScalarMap g);
  static FunctionalSpec quadratic(Kernel kernel);
  static FunctionalSpec mann_whitney();
  static FunctionalSpec mann_whitney_first(DiscreteMeasure lambda);
  static FunctionalSpec mann_whitney_second(DiscreteMeasure mu);
  static FunctionalSpec jump(double alpha);
  static FunctionalSpec prospect(WeightingFunction w_plus, WeightingFunction w_minus,
                                 DensityMeasure rho);
  static FunctionalSpec cramer_von_mises(DensityMeasure f0);
  static FunctionalSpec cramer_von_mises(DiscreteMeasure f0);
  static FunctionalSpec neg_abs_loss(double s);

  const Variant& form() const { return form_; }
  std::string_view name() const;

  /// True for functionals that are affine in the measure (the differential
  /// is then T(dir) - T(m)).
  bool is_affine() const;

 private:
  Variant form_;
};

double eval(const FunctionalSpec& spec, const DiscreteMeasure& m);

/// Closed-form affine directional derivative DT(m; dir).
double analytic_directional(const FunctionalSpec& spec, const DiscreteMeasure& m,
                            const DiscreteMeasure& dir);

/// Normalized affine gradient sampled on a grid.
struct InfluenceTable {
  std::vector<double> grid;
  Vector values;
  DiscreteMeasure base;

  /// Value at a grid point; DomainMismatch off the grid.
  double at(double x) const;
  /// int u d(measure); the measure's support must lie on the grid.
  double integrate(const DiscreteMeasure& measure) const;
};

/// u(x) = DT(m; delta_x) shifted so that int u dm = 0. The table grid is the
/// sorted union of `grid` and the support of m.
InfluenceTable influence(const FunctionalSpec& spec, const DiscreteMeasure& m,
                         std::span<const double> grid);

struct DominanceVerdict {
  bool direct;
  bool local_utility;
};

/// Tolerance used by both sides of the dominance comparison.
inline constexpr double kDominanceTolerance = 1e-10;

/// Sure-comparison test of a against b. `direct` compares mixtures with every
/// probe at every alpha; `local_utility` compares the probes' influence
/// functions integrated against a and b.
DominanceVerdict dominance_test(const FunctionalSpec& spec, const DiscreteMeasure& a,
                                const DiscreteMeasure& b,
                                std::span<const DiscreteMeasure> probes,
                                std::span<const double> alpha_grid);

// Mann-Whitney biaffine form on pairs.

double mann_whitney(const DiscreteMeasure& mu, const DiscreteMeasure& lambda);

/// DB(mu, lambda; mu1, lambda1) = B(mu, lambda1) + B(mu1, lambda) - 2 B(mu, lambda).
double mann_whitney_directional(const DiscreteMeasure& mu, const DiscreteMeasure& lambda,
                                const DiscreteMeasure& mu1, const DiscreteMeasure& lambda1);

struct MannWhitneyGradient {
  std::vector<double> grid;
  Vector first;   // -F_lambda(x-), equal to -F_lambda(x) off the atoms of lambda
  Vector second;  // F_mu(x)
};

/// Gradient pair (-F_lambda, F_mu). With atoms, the first component uses the
/// left limit so that DB = int first d(mu1 - mu) + int second d(lambda1 - lambda)
/// holds exactly for finite-support directions.
MannWhitneyGradient mann_whitney_gradient(const DiscreteMeasure& mu,
                                          const DiscreteMeasure& lambda,
                                          std::span<const double> grid);

// Prospect-theory pieces.

/// phi_mu(x): w+'(1 - F_mu(x)) for x >= 0, w-'(F_mu(x)) otherwise.
double prospect_phi(const spec::Prospect& p, const DiscreteMeasure& mu, double x);
/// Phi_mu(x) = int_{(-inf, x]} phi_mu d rho.
double prospect_gradient(const spec::Prospect& p, const DiscreteMeasure& mu, double x);

/// Characterization of sure dominance through the probes' weighting
/// densities: for every probe nu,
/// int phi_nu (1 - F_a) d rho >= int phi_nu (1 - F_b) d rho.
bool prospect_sure_dominance(const spec::Prospect& p, const DiscreteMeasure& a,
                             const DiscreteMeasure& b,
                             std::span<const DiscreteMeasure> probes);

}  // namespace affcalc

#endif  // AFFCALC_FUNCTIONALS_HPP
