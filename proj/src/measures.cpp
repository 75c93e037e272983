#include "affcalc/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "affcalc/error.hpp"

namespace affcalc {

namespace {

std::string describe(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(std::vector<std::pair<double, double>> atoms,
                                 MeasureKind kind)
    : kind_(kind) {
  if (atoms.empty()) {
    throw Error(ErrorKind::BadParameter, "measure needs at least one atom");
  }
  for (const auto& [x, w] : atoms) {
    if (!std::isfinite(x) || !std::isfinite(w)) {
      throw Error(ErrorKind::BadParameter, "atom location and weight must be finite");
    }
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<std::pair<double, double>> merged;
  merged.reserve(atoms.size());
  for (const auto& atom : atoms) {
    if (!merged.empty() && merged.back().first == atom.first) {
      merged.back().second += atom.second;
    } else {
      merged.push_back(atom);
    }
  }
  std::erase_if(merged, [](const auto& a) { return a.second == 0.0; });

  locations_.resize(static_cast<Eigen::Index>(merged.size()));
  weights_.resize(static_cast<Eigen::Index>(merged.size()));
  for (std::size_t i = 0; i < merged.size(); ++i) {
    locations_[static_cast<Eigen::Index>(i)] = merged[i].first;
    weights_[static_cast<Eigen::Index>(i)] = merged[i].second;
  }

  if (kind_ == MeasureKind::probability) {
    for (Eigen::Index i = 0; i < weights_.size(); ++i) {
      if (weights_[i] < 0.0) {
        throw Error(ErrorKind::NotAProbability,
                    "negative weight " + describe(weights_[i]) + " at " +
                        describe(locations_[i]));
      }
    }
    const double total = weights_.sum();
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
      throw Error(ErrorKind::NotAProbability,
                  "total mass " + describe(total) + " differs from 1");
    }
  }
  build_cumulative();
}

void DiscreteMeasure::build_cumulative() {
  cumulative_.resize(weights_.size());
  double running = 0.0;
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    running += weights_[i];
    cumulative_[i] = running;
  }
}

DiscreteMeasure DiscreteMeasure::dirac(double location) {
  return DiscreteMeasure({{location, 1.0}});
}

DiscreteMeasure DiscreteMeasure::uniform(std::span<const double> points) {
  if (points.empty()) throw Error(ErrorKind::BadParameter, "uniform over no points");
  std::vector<std::pair<double, double>> atoms;
  const double w = 1.0 / static_cast<double>(points.size());
  for (double p : points) atoms.emplace_back(p, w);
  return DiscreteMeasure(std::move(atoms));
}

DiscreteMeasure DiscreteMeasure::uniform(std::initializer_list<double> points) {
  return uniform(std::span<const double>(points.begin(), points.size()));
}

double DiscreteMeasure::total_mass() const {
  return cumulative_.size() == 0 ? 0.0 : cumulative_[cumulative_.size() - 1];
}

double DiscreteMeasure::mass_at(double x) const {
  const double* begin = locations_.data();
  const double* end = begin + locations_.size();
  const double* it = std::lower_bound(begin, end, x);
  if (it != end && *it == x) return weights_[it - begin];
  return 0.0;
}

double DiscreteMeasure::mass_upto(double x) const {
  const double* begin = locations_.data();
  const auto idx = std::upper_bound(begin, begin + locations_.size(), x) - begin;
  return idx == 0 ? 0.0 : cumulative_[idx - 1];
}

double DiscreteMeasure::mass_below(double x) const {
  const double* begin = locations_.data();
  const auto idx = std::lower_bound(begin, begin + locations_.size(), x) - begin;
  return idx == 0 ? 0.0 : cumulative_[idx - 1];
}

double DiscreteMeasure::integrate(const std::function<double(double)>& g) const {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < size(); ++i) sum += weights_[i] * g(locations_[i]);
  return sum;
}

std::vector<double> DiscreteMeasure::support() const {
  return {locations_.data(), locations_.data() + locations_.size()};
}

std::vector<std::pair<double, double>> DiscreteMeasure::atoms() const {
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (Eigen::Index i = 0; i < size(); ++i) out.emplace_back(locations_[i], weights_[i]);
  return out;
}

bool DiscreteMeasure::operator==(const DiscreteMeasure& other) const {
  return kind_ == other.kind_ && locations_ == other.locations_ &&
         weights_ == other.weights_;
}

DensityMeasure::DensityMeasure(std::vector<double> breakpoints,
                               std::vector<double> densities)
    : breakpoints_(std::move(breakpoints)), densities_(std::move(densities)) {
  if (breakpoints_.size() < 2 || densities_.size() + 1 != breakpoints_.size()) {
    throw Error(ErrorKind::BadParameter,
                "density measure needs k+1 breakpoints for k densities (k >= 1)");
  }
  for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i] < breakpoints_[i + 1]) || !std::isfinite(breakpoints_[i + 1]) ||
        !std::isfinite(breakpoints_[i])) {
      throw Error(ErrorKind::BadParameter, "breakpoints must be finite and strictly increasing");
    }
  }
  for (double d : densities_) {
    if (!(d >= 0.0) || !std::isfinite(d)) {
      throw Error(ErrorKind::BadParameter, "densities must be finite and nonnegative");
    }
  }
  cumulative_.resize(breakpoints_.size());
  cumulative_[0] = 0.0;
  for (std::size_t i = 0; i < densities_.size(); ++i) {
    cumulative_[i + 1] =
        cumulative_[i] + densities_[i] * (breakpoints_[i + 1] - breakpoints_[i]);
  }
}

DensityMeasure DensityMeasure::uniform(double a, double b) {
  return DensityMeasure({a, b}, {1.0 / (b - a)});
}

DensityMeasure DensityMeasure::lebesgue(double a, double b) {
  return DensityMeasure({a, b}, {1.0});
}

bool DensityMeasure::is_probability() const {
  return std::abs(mass() - 1.0) <= kProbabilityTolerance;
}

double DensityMeasure::cdf(double x) const {
  if (x <= lower()) return 0.0;
  if (x >= upper()) return mass();
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  const auto i = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
  return cumulative_[i] + densities_[i] * (x - breakpoints_[i]);
}

double DensityMeasure::density_at(double x) const {
  if (x < lower() || x >= upper()) return 0.0;
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  return densities_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
}

DiscreteMeasure make_discrete(std::vector<std::pair<double, double>> atoms,
                              MeasureKind kind, bool renormalize) {
  if (renormalize) {
    double total = 0.0;
    for (const auto& a : atoms) total += a.second;
    if (!(total > 0.0) || !std::isfinite(total)) {
      throw Error(ErrorKind::NotAProbability, "cannot renormalize nonpositive total mass");
    }
    for (auto& a : atoms) a.second /= total;
  }
  return DiscreteMeasure(std::move(atoms), kind);
}

CdfValue cdf(const DiscreteMeasure& m, double x) {
  return {m.mass_upto(x), m.mass_below(x)};
}

DiscreteMeasure mix(const DiscreteMeasure& x, const DiscreteMeasure& y, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw Error(ErrorKind::BadParameter, "mixture weight t=" + describe(t) + " outside [0,1]");
  }
  if (!x.is_probability() || !y.is_probability()) {
    throw Error(ErrorKind::NotAProbability, "mixtures are formed between probability measures");
  }
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(static_cast<std::size_t>(x.size() + y.size()));
  // Walk both sorted supports so shared atoms get (1-t) w_x + t w_y in one step.
  Eigen::Index i = 0, j = 0;
  while (i < x.size() || j < y.size()) {
    if (j >= y.size() || (i < x.size() && x.location(i) < y.location(j))) {
      atoms.emplace_back(x.location(i), (1.0 - t) * x.weight(i));
      ++i;
    } else if (i >= x.size() || y.location(j) < x.location(i)) {
      atoms.emplace_back(y.location(j), t * y.weight(j));
      ++j;
    } else {
      atoms.emplace_back(x.location(i), (1.0 - t) * x.weight(i) + t * y.weight(j));
      ++i;
      ++j;
    }
  }
  return DiscreteMeasure(std::move(atoms));
}

DiscreteMeasure combine(std::span<const DiscreteMeasure> measures,
                        std::span<const double> lambda) {
  if (measures.empty() || measures.size() != lambda.size()) {
    throw Error(ErrorKind::BadParameter, "combine needs one coefficient per measure");
  }
  double total = 0.0;
  for (double l : lambda) {
    if (!(l >= 0.0)) throw Error(ErrorKind::BadParameter, "negative mixture coefficient");
    total += l;
  }
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    throw Error(ErrorKind::BadParameter, "mixture coefficients must sum to 1");
  }
  std::vector<std::pair<double, double>> atoms;
  for (std::size_t k = 0; k < measures.size(); ++k) {
    if (!measures[k].is_probability()) {
      throw Error(ErrorKind::NotAProbability, "mixtures are formed between probability measures");
    }
    for (Eigen::Index i = 0; i < measures[k].size(); ++i) {
      atoms.emplace_back(measures[k].location(i), lambda[k] * measures[k].weight(i));
    }
  }
  return make_discrete(std::move(atoms), MeasureKind::probability, true);
}

DiscreteMeasure empirical(std::span<const double> samples) {
  if (samples.empty()) throw Error(ErrorKind::EmptySample, "empirical distribution of no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<std::pair<double, double>> atoms;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    atoms.emplace_back(sorted[i], static_cast<double>(j - i) / n);
    i = j;
  }
  return DiscreteMeasure(std::move(atoms));
}

std::vector<double> merge_points(std::vector<double> a, std::span<const double> b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

std::vector<double> union_support(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  const auto sb = b.support();
  return merge_points(a.support(), sb);
}

namespace {

double kolmogorov_distance(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  double sup = 0.0;
  for (double x : union_support(a, b)) {
    sup = std::max(sup, std::abs(a.mass_upto(x) - b.mass_upto(x)));
  }
  return sup;
}

double total_variation_distance(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  double sum = 0.0;
  for (double x : union_support(a, b)) sum += std::abs(a.mass_at(x) - b.mass_at(x));
  return 0.5 * sum;
}

// F_a(x - eps) - eps <= F_b(x) <= F_a(x + eps) + eps for every x. Both
// differences are right-continuous step functions that only jump up at atoms
// of b (right inequality) or at atoms of a shifted by eps (left inequality),
// so checking those points is exhaustive.
bool levy_sandwich_holds(const DiscreteMeasure& a, const DiscreteMeasure& b, double eps) {
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    const double x = b.location(j);
    if (b.mass_upto(x) > a.mass_upto(x + eps) + eps) return false;
  }
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double x = a.location(i);
    if (a.mass_upto(x) - eps > b.mass_upto(x + eps)) return false;
  }
  return true;
}

double levy_distance(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  double lo = 0.0;
  double hi = 1.0;
  if (levy_sandwich_holds(a, b, 0.0)) return 0.0;
  while (hi - lo > kLevyTolerance * 1e-2) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (levy_sandwich_holds(a, b, mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace

double metric(MetricKind kind, const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (!a.is_probability() || !b.is_probability()) {
    throw Error(ErrorKind::NotAProbability, "metrics are defined between probability measures");
  }
  switch (kind) {
    case MetricKind::kolmogorov: return kolmogorov_distance(a, b);
    case MetricKind::total_variation: return total_variation_distance(a, b);
    case MetricKind::levy_prokhorov: {
      // The sandwich is checked in both directions so the result is symmetric
      // even when bisection stops between the two one-sided thresholds.
      return std::max(levy_distance(a, b), levy_distance(b, a));
    }
  }
  return 0.0;
}

MetricKind parse_metric_kind(std::string_view name) {
  if (name == "kolmogorov") return MetricKind::kolmogorov;
  if (name == "total_variation") return MetricKind::total_variation;
  if (name == "levy_prokhorov") return MetricKind::levy_prokhorov;
  throw Error(ErrorKind::BadParameter, "unknown metric '" + std::string(name) +
                                           "' (kolmogorov | total_variation | levy_prokhorov)");
}

std::string_view metric_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::kolmogorov: return "kolmogorov";
    case MetricKind::total_variation: return "total_variation";
    case MetricKind::levy_prokhorov: return "levy_prokhorov";
  }
  return "unknown";
}

}  // namespace affcalc
