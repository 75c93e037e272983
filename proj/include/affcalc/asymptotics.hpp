#ifndef AFFCALC_ASYMPTOTICS_HPP
#define AFFCALC_ASYMPTOTICS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "affcalc/functionals.hpp"
#include "affcalc/measures.hpp"

namespace affcalc {

/// sigma^2 = int u^2 dF with u the normalized influence function at F.
double influence_variance(const FunctionalSpec& spec, const DiscreteMeasure& f);

/// Variances at or below this are treated as zero.
inline constexpr double kDegenerateVariance = 1e-14;

struct CltReport {
  int n;
  int replications;
  std::uint64_t seed;
  double sigma2_analytic;
  double mean;
  double variance;
  double ks_distance;
  /// sqrt(n) (T(F_n) - T(F)) / sigma, in replication order.
  std::vector<double> statistics;
};

/// Uniform double in [0, 1) for draw `index` of replication `rep`. Each
/// (seed, rep) pair is an independent counter-based stream.
double counter_uniform(std::uint64_t seed, std::uint64_t rep, std::uint64_t index);

/// Standard normal CDF.
double normal_cdf(double z);

/// One-sample Kolmogorov-Smirnov distance between the sample and N(0, 1).
double ks_distance_normal(std::vector<double> sample);

/// Monte Carlo check of sqrt(n) (T(F_n) - T(F)) -> N(0, sigma^2): `reps`
/// samples of size `n` drawn from f by inverse-CDF sampling.
CltReport clt_experiment(const FunctionalSpec& spec, const DiscreteMeasure& f, int n, int reps,
                         std::uint64_t seed);

struct RemainderSample {
  double distance;
  double remainder;
};

struct RemainderReport {
  MetricKind metric_kind;
  std::vector<RemainderSample> samples;
  /// Least-squares slope of log|R| against log distance; NaN with fewer than
  /// two usable points.
  double fitted_slope;
  /// R / distance at the smallest positive distance.
  std::optional<double> limit_ratio;
};

/// Log-log least-squares slope over samples with distance > 0 and R != 0.
double fit_loglog_slope(std::span<const RemainderSample> samples);

/// R(G) = T(G) - T(base) - DT(base; G) paired with metric(base, G) along a
/// path approaching the base. Distances must strictly decrease.
RemainderReport remainder_probe(const FunctionalSpec& spec, const DiscreteMeasure& base,
                                MetricKind metric_kind, std::span<const DiscreteMeasure> path);

/// Two-sided variant: R = T(G_k) - T(F_k) - DT(F_k; G_k) against
/// metric(F_k, G_k) with both measures moving.
RemainderReport remainder_probe(const FunctionalSpec& spec, MetricKind metric_kind,
                                std::span<const std::pair<DiscreteMeasure, DiscreteMeasure>> path);

}  // namespace affcalc

#endif  // AFFCALC_ASYMPTOTICS_HPP
