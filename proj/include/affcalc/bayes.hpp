#ifndef AFFCALC_BAYES_HPP
#define AFFCALC_BAYES_HPP

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "affcalc/functionals.hpp"
#include "affcalc/measures.hpp"

namespace affcalc {

/// Row-stochastic table P(x | theta): one row per parameter, one column per
/// observation label.
class LikelihoodTable {
 public:
  LikelihoodTable(std::vector<double> parameters, std::vector<std::string> observations,
                  Matrix probabilities);

  /// Header `theta,label1,...,labelk`, then one row `theta,p1,...,pk` per parameter.
  static LikelihoodTable read_csv(std::istream& in);
  static LikelihoodTable read_csv_file(const std::string& path);

  const std::vector<double>& parameters() const { return parameters_; }
  const std::vector<std::string>& observations() const { return observations_; }
  const Matrix& probabilities() const { return probabilities_; }

  /// Column of an observation label; DomainMismatch for unknown labels.
  Eigen::Index column(std::string_view label) const;
  /// P(obs | theta); DomainMismatch when theta is not a parameter.
  double likelihood(double theta, Eigen::Index column) const;

 private:
  std::vector<double> parameters_;
  std::vector<std::string> observations_;
  Matrix probabilities_;
};

/// Convex hull of finitely many probability measures.
struct PriorClass {
  std::vector<DiscreteMeasure> generators;

  /// BadParameter without generators, NotAProbability for signed ones.
  void validate() const;
};

/// sum_theta P(obs | theta) mu(theta).
double marginal_likelihood(const DiscreteMeasure& prior, const LikelihoodTable& lik,
                           std::string_view obs);

/// Bayes update of a discrete prior. ZeroMarginal when P(obs) = 0.
DiscreteMeasure posterior(const DiscreteMeasure& prior, const LikelihoodTable& lik,
                          std::string_view obs);

/// Directional derivative of mu -> T(mu_x) toward nu. Along the mixture path
/// the posterior moves on the segment from mu_x to nu_x with speed
/// m_nu / m_mu, so D rho(mu; nu) = (m_nu / m_mu) DT(mu_x; nu_x).
double posterior_functional_directional(const FunctionalSpec& spec, const DiscreteMeasure& mu,
                                        const DiscreteMeasure& nu, const LikelihoodTable& lik,
                                        std::string_view obs);

struct RangeEndpoint {
  double value;
  /// min (for lo) or -max (for hi) over generators of D rho(prior; g).
  double certificate;
  std::vector<double> weights;
  int iterations;
  bool converged;
};

struct RangeResult {
  RangeEndpoint lo;
  RangeEndpoint hi;
  /// Certificates pass but a generator value falls outside [lo, hi]: the
  /// first-order condition holds at a point that is not a global optimum.
  bool certificate_only;
};

struct RangeOptions {
  int max_iters = 500;
  /// Stop once the certificate is at least -stop_tolerance.
  double stop_tolerance = 1e-8;
};

/// Range of mu -> eval(spec, posterior(mu)) over the hull of the generators by
/// conditional gradient with an exact line search. Endpoints that miss the
/// stopping rule after max_iters come back with converged = false.
RangeResult posterior_functional_range(const PriorClass& cls, const FunctionalSpec& spec,
                                       const LikelihoodTable& lik, std::string_view obs,
                                       RangeOptions opt = {});

enum class Loss { absolute };

Loss parse_loss(std::string_view name);

/// Bayes risk inf_s int loss(s, theta) d mu(theta).
double posterior_loss(const DiscreteMeasure& prior, Loss loss = Loss::absolute);

/// Directional derivative of the absolute-loss Bayes risk:
/// inf over medians s of mu of int |s - theta| d nu - int |s - theta| d mu.
double posterior_loss_derivative(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

}  // namespace affcalc

#endif  // AFFCALC_BAYES_HPP
