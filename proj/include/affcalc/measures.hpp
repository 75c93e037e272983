#ifndef AFFCALC_MEASURES_HPP
#define AFFCALC_MEASURES_HPP

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace affcalc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class MeasureKind { probability, signed_measure };

/// Absolute tolerance on total mass for probability measures.
inline constexpr double kProbabilityTolerance = 1e-12;

/// Finite-support measure on the real line.
///
/// Atoms are stored sorted by location with duplicates merged additively and
/// exact-zero weights dropped, so two measures describing the same set
/// function compare equal atom by atom. Immutable after construction.
class DiscreteMeasure {
 public:
  DiscreteMeasure(std::vector<std::pair<double, double>> atoms,
                  MeasureKind kind = MeasureKind::probability);

  static DiscreteMeasure dirac(double location);
  /// Equal weights on the given (not necessarily distinct) points.
  static DiscreteMeasure uniform(std::span<const double> points);
  static DiscreteMeasure uniform(std::initializer_list<double> points);

  Eigen::Index size() const { return locations_.size(); }
  bool empty() const { return locations_.size() == 0; }
  const Vector& locations() const { return locations_; }
  const Vector& weights() const { return weights_; }
  double location(Eigen::Index i) const { return locations_[i]; }
  double weight(Eigen::Index i) const { return weights_[i]; }
  MeasureKind kind() const { return kind_; }
  bool is_probability() const { return kind_ == MeasureKind::probability; }
  double total_mass() const;

  /// Mass of the atom at x, zero off the support.
  double mass_at(double x) const;
  /// mu((-inf, x]) and mu((-inf, x)).
  double mass_upto(double x) const;
  double mass_below(double x) const;

  /// Integral of g against the measure.
  double integrate(const std::function<double(double)>& g) const;

  std::vector<double> support() const;
  std::vector<std::pair<double, double>> atoms() const;

  bool operator==(const DiscreteMeasure& other) const;

 private:
  void build_cumulative();

  Vector locations_;
  Vector weights_;
  Vector cumulative_;  // cumulative_[i] = sum of weights_[0..i]
  MeasureKind kind_;
};

/// Piecewise-constant density on [breakpoints.front(), breakpoints.back()].
class DensityMeasure {
 public:
  DensityMeasure(std::vector<double> breakpoints, std::vector<double> densities);

  /// Uniform probability on [a, b].
  static DensityMeasure uniform(double a, double b);
  /// Lebesgue measure restricted to [a, b].
  static DensityMeasure lebesgue(double a, double b);

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& densities() const { return densities_; }
  std::size_t pieces() const { return densities_.size(); }
  double lower() const { return breakpoints_.front(); }
  double upper() const { return breakpoints_.back(); }
  double mass() const { return cumulative_.back(); }
  bool is_probability() const;

  /// rho((-inf, x]); continuous in x.
  double cdf(double x) const;
  /// Density at x (right-continuous convention at breakpoints, zero outside).
  double density_at(double x) const;

 private:
  std::vector<double> breakpoints_;
  std::vector<double> densities_;
  std::vector<double> cumulative_;  // mass up to breakpoint i
};

struct CdfValue {
  double value;
  double left_limit;
};

/// Sorts atoms and merges duplicates. With `renormalize` the weights are
/// divided by their total before the probability checks run.
DiscreteMeasure make_discrete(std::vector<std::pair<double, double>> atoms,
                              MeasureKind kind = MeasureKind::probability,
                              bool renormalize = false);

CdfValue cdf(const DiscreteMeasure& m, double x);

/// (1 - t) x + t y.
DiscreteMeasure mix(const DiscreteMeasure& x, const DiscreteMeasure& y, double t);

/// Convex combination sum_j lambda_j m_j; lambda must lie in the simplex.
DiscreteMeasure combine(std::span<const DiscreteMeasure> measures,
                        std::span<const double> lambda);

DiscreteMeasure empirical(std::span<const double> samples);

/// Sorted union of the two supports.
std::vector<double> union_support(const DiscreteMeasure& a, const DiscreteMeasure& b);
std::vector<double> merge_points(std::vector<double> a, std::span<const double> b);

enum class MetricKind { kolmogorov, total_variation, levy_prokhorov };

/// Bisection tolerance of the Levy-Prokhorov computation.
inline constexpr double kLevyTolerance = 1e-10;

double metric(MetricKind kind, const DiscreteMeasure& a, const DiscreteMeasure& b);

MetricKind parse_metric_kind(std::string_view name);
std::string_view metric_name(MetricKind kind);

// CSV ingestion and serialization.

/// One real per line; blank lines and '#' comments are skipped.
std::vector<double> read_samples(std::istream& in);
std::vector<double> read_samples_file(const std::string& path);

/// Two-column CSV with header `location,weight`.
DiscreteMeasure read_measure_csv(std::istream& in,
                                 MeasureKind kind = MeasureKind::probability);
DiscreteMeasure read_measure_csv_file(const std::string& path,
                                      MeasureKind kind = MeasureKind::probability);
void write_measure_csv(std::ostream& out, const DiscreteMeasure& m);

/// Inline literal `loc:weight,loc:weight,...`.
DiscreteMeasure parse_measure_literal(std::string_view text,
                                      MeasureKind kind = MeasureKind::probability);

/// Shortest decimal that round-trips to the same double.
std::string format_real(double value);

}  // namespace affcalc

#endif  // AFFCALC_MEASURES_HPP
