#include "affcalc/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "affcalc/error.hpp"

namespace affcalc {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RemainderReport finish(MetricKind kind, std::vector<RemainderSample> samples) {
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].distance < samples[i - 1].distance)) {
      throw Error(ErrorKind::BadParameter, "remainder path distances must strictly decrease");
    }
  }
  RemainderReport report{kind, std::move(samples), 0.0, std::nullopt};
  report.fitted_slope = fit_loglog_slope(report.samples);
  for (auto it = report.samples.rbegin(); it != report.samples.rend(); ++it) {
    if (it->distance > 0.0) {
      report.limit_ratio = it->remainder / it->distance;
      break;
    }
  }
  return report;
}

}  // namespace

double influence_variance(const FunctionalSpec& spec, const DiscreteMeasure& f) {
  const auto table = influence(spec, f, f.support());
  double total = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double u = table.at(f.location(i));
    total += f.weight(i) * u * u;
  }
  return total;
}

double counter_uniform(std::uint64_t seed, std::uint64_t rep, std::uint64_t index) {
  const std::uint64_t key = splitmix64(seed ^ splitmix64(rep ^ 0x5851f42d4c957f2dULL));
  return static_cast<double>(splitmix64(key + index * 0x9e3779b97f4a7c15ULL) >> 11) * 0x1p-53;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double ks_distance_normal(std::vector<double> sample) {
  if (sample.empty()) throw Error(ErrorKind::EmptySample, "KS distance needs a sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double cdf = normal_cdf(sample[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  return std::clamp(d, 0.0, 1.0);
}

CltReport clt_experiment(const FunctionalSpec& spec, const DiscreteMeasure& f, int n, int reps,
                         std::uint64_t seed) {
  if (n < 100) throw Error(ErrorKind::BadParameter, "CLT experiment needs n >= 100");
  if (reps < 100) throw Error(ErrorKind::BadParameter, "CLT experiment needs at least 100 replications");
  if (!f.is_probability()) throw Error(ErrorKind::NotAProbability, "sampling law must be a probability");
  const double sigma2 = influence_variance(spec, f);
  if (!(sigma2 > kDegenerateVariance)) {
    throw Error(ErrorKind::DegenerateVariance,
                "influence variance " + format_real(sigma2) + " is zero; the sqrt(n) limit is degenerate");
  }
  const double sigma = std::sqrt(sigma2);
  const double t_f = eval(spec, f);
  const double root_n = std::sqrt(static_cast<double>(n));

  const auto atoms_f = static_cast<std::size_t>(f.size());
  std::vector<double> cumulative(atoms_f);
  double running = 0.0;
  for (std::size_t i = 0; i < atoms_f; ++i) {
    running += f.weight(static_cast<Eigen::Index>(i));
    cumulative[i] = running;
  }
  cumulative.back() = std::numeric_limits<double>::infinity();

  CltReport report{n, reps, seed, sigma2, 0.0, 0.0, 0.0, {}};
  report.statistics.reserve(static_cast<std::size_t>(reps));
  std::vector<double> counts(atoms_f);
  for (int rep = 0; rep < reps; ++rep) {
    std::fill(counts.begin(), counts.end(), 0.0);
    for (int j = 0; j < n; ++j) {
      const double u = counter_uniform(seed, static_cast<std::uint64_t>(rep), static_cast<std::uint64_t>(j));
      const auto k = std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin();
      counts[static_cast<std::size_t>(k)] += 1.0;
    }
    std::vector<std::pair<double, double>> atoms;
    atoms.reserve(atoms_f);
    for (std::size_t i = 0; i < atoms_f; ++i) {
      if (counts[i] > 0.0) atoms.emplace_back(f.location(static_cast<Eigen::Index>(i)), counts[i] / n);
    }
    const auto fn = make_discrete(std::move(atoms), MeasureKind::probability, true);
    report.statistics.push_back(root_n * (eval(spec, fn) - t_f) / sigma);
  }

  double sum = 0.0;
  for (double s : report.statistics) sum += s;
  report.mean = sum / reps;
  double ss = 0.0;
  for (double s : report.statistics) ss += (s - report.mean) * (s - report.mean);
  report.variance = ss / (reps - 1);
  report.ks_distance = ks_distance_normal(report.statistics);
  return report;
}

double fit_loglog_slope(std::span<const RemainderSample> samples) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int count = 0;
  for (const auto& s : samples) {
    if (!(s.distance > 0.0) || s.remainder == 0.0) continue;
    const double x = std::log(s.distance);
    const double y = std::log(std::abs(s.remainder));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  const double denom = count * sxx - sx * sx;
  if (count < 2 || denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (count * sxy - sx * sy) / denom;
}

RemainderReport remainder_probe(const FunctionalSpec& spec, const DiscreteMeasure& base,
                                MetricKind metric_kind, std::span<const DiscreteMeasure> path) {
  const double t_base = eval(spec, base);
  std::vector<RemainderSample> samples;
  samples.reserve(path.size());
  for (const auto& g : path) {
    const double r = eval(spec, g) - t_base - analytic_directional(spec, base, g);
    samples.push_back({metric(metric_kind, base, g), r});
  }
  return finish(metric_kind, std::move(samples));
}

RemainderReport remainder_probe(const FunctionalSpec& spec, MetricKind metric_kind,
                                std::span<const std::pair<DiscreteMeasure, DiscreteMeasure>> path) {
  std::vector<RemainderSample> samples;
  samples.reserve(path.size());
  for (const auto& [f, g] : path) {
    const double r = eval(spec, g) - eval(spec, f) - analytic_directional(spec, f, g);
    samples.push_back({metric(metric_kind, f, g), r});
  }
  return finish(metric_kind, std::move(samples));
}

}  // namespace affcalc
