#include "affcalc/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "affcalc/envelope.hpp"
#include "affcalc/error.hpp"

namespace affcalc {

namespace {

constexpr double kRowTolerance = 1e-12;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::ParseError, "cannot parse likelihood cell '" + s + "'");
  }
}

// Posterior-functional evaluations for one (spec, likelihood, obs) triple.
struct Composed {
  const FunctionalSpec& spec;
  const LikelihoodTable& lik;
  std::string_view obs;

  double value(const DiscreteMeasure& prior) const { return eval(spec, posterior(prior, lik, obs)); }
  double directional(const DiscreteMeasure& mu, const DiscreteMeasure& nu) const {
    return posterior_functional_directional(spec, mu, nu, lik, obs);
  }
};

DiscreteMeasure prior_at(const PriorClass& cls, const std::vector<double>& weights) {
  return combine(cls.generators, weights);
}

// Minimizes sign * rho over the hull. sign = +1 for lo, -1 for hi.
RangeEndpoint conditional_gradient(const PriorClass& cls, const Composed& rho, double sign,
                                   const RangeOptions& opt) {
  const std::size_t k = cls.generators.size();
  std::vector<double> vertex_value(k, std::numeric_limits<double>::infinity());
  std::size_t start = k;
  for (std::size_t i = 0; i < k; ++i) {
    if (marginal_likelihood(cls.generators[i], rho.lik, rho.obs) <= 0.0) continue;
    vertex_value[i] = sign * rho.value(cls.generators[i]);
    if (start == k || vertex_value[i] < vertex_value[start]) start = i;
  }
  if (start == k) throw Error(ErrorKind::ZeroMarginal, "observation has zero probability under every generator");

  std::vector<double> weights(k, 0.0);
  weights[start] = 1.0;
  double current = vertex_value[start];
  DiscreteMeasure prior = cls.generators[start];

  auto certificate = [&](std::size_t& arg) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) {
      const double d = sign * rho.directional(prior, cls.generators[i]);
      if (d < best) {
        best = d;
        arg = i;
      }
    }
    return best;
  };

  int iter = 0;
  std::size_t arg = 0;
  double cert = certificate(arg);
  while (cert < -opt.stop_tolerance && iter < opt.max_iters) {
    ++iter;
    const auto& target = cls.generators[arg];
    auto along = [&](double gamma) { return sign * rho.value(mix(prior, target, gamma)); };
    // Golden-section search on [0, 1]; gamma = 1 is compared separately since
    // linear-fractional profiles peak at an endpoint.
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0, b = 1.0;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = along(c), fd = along(d);
    for (int step = 0; step < 80 && b - a > 1e-14; ++step) {
      if (fc <= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - inv_phi * (b - a);
        fc = along(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + inv_phi * (b - a);
        fd = along(d);
      }
    }
    double gamma = fc <= fd ? c : d;
    double f_gamma = std::min(fc, fd);
    const double f_one = along(1.0);
    if (f_one <= f_gamma) {
      gamma = 1.0;
      f_gamma = f_one;
    }
    if (!(f_gamma < current)) break;
    for (std::size_t i = 0; i < k; ++i) weights[i] *= 1.0 - gamma;
    weights[arg] += gamma;
    prior = prior_at(cls, weights);
    current = sign * rho.value(prior);
    cert = certificate(arg);
  }
  return {sign * current, cert, std::move(weights), iter, cert >= -opt.stop_tolerance};
}

}  // namespace

LikelihoodTable::LikelihoodTable(std::vector<double> parameters,
                                 std::vector<std::string> observations, Matrix probabilities)
    : parameters_(std::move(parameters)),
      observations_(std::move(observations)),
      probabilities_(std::move(probabilities)) {
  const auto rows = static_cast<Eigen::Index>(parameters_.size());
  const auto cols = static_cast<Eigen::Index>(observations_.size());
  if (rows == 0 || cols == 0) throw Error(ErrorKind::BadParameter, "likelihood table is empty");
  if (probabilities_.rows() != rows || probabilities_.cols() != cols) {
    throw Error(ErrorKind::BadParameter, "likelihood matrix shape does not match its labels");
  }
  std::vector<double> sorted = parameters_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorKind::BadParameter, "likelihood parameters must be distinct");
  }
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!probabilities_.row(i).allFinite() || (probabilities_.row(i).array() < 0.0).any()) {
      throw Error(ErrorKind::NotAProbability, "likelihood entries must be finite and nonnegative");
    }
    if (std::abs(probabilities_.row(i).sum() - 1.0) > kRowTolerance) {
      throw Error(ErrorKind::NotAProbability,
                  "likelihood row for theta=" + format_real(parameters_[static_cast<std::size_t>(i)]) +
                      " does not sum to 1");
    }
  }
}

LikelihoodTable LikelihoodTable::read_csv(std::istream& in) {
  std::string line;
  std::vector<std::string> labels;
  std::vector<double> params;
  std::vector<std::vector<double>> rows;
  bool header_seen = false;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split_csv(line);
    if (!header_seen) {
      if (cells.size() < 2 || cells[0] != "theta") {
        throw Error(ErrorKind::ParseError, "likelihood CSV must start with 'theta,<labels>'");
      }
      labels.assign(cells.begin() + 1, cells.end());
      header_seen = true;
      continue;
    }
    if (cells.size() != labels.size() + 1) {
      throw Error(ErrorKind::ParseError, "likelihood CSV row width does not match the header");
    }
    params.push_back(parse_cell(cells[0]));
    std::vector<double> row;
    for (std::size_t j = 1; j < cells.size(); ++j) row.push_back(parse_cell(cells[j]));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorKind::ParseError, "likelihood CSV has no rows");
  Matrix p(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < labels.size(); ++j) {
      p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return LikelihoodTable(std::move(params), std::move(labels), std::move(p));
}

LikelihoodTable LikelihoodTable::read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + path + "'");
  return read_csv(in);
}

Eigen::Index LikelihoodTable::column(std::string_view label) const {
  const auto it = std::find(observations_.begin(), observations_.end(), label);
  if (it == observations_.end()) {
    throw Error(ErrorKind::DomainMismatch, "unknown observation '" + std::string(label) + "'");
  }
  return static_cast<Eigen::Index>(it - observations_.begin());
}

double LikelihoodTable::likelihood(double theta, Eigen::Index col) const {
  const auto it = std::find(parameters_.begin(), parameters_.end(), theta);
  if (it == parameters_.end()) {
    throw Error(ErrorKind::DomainMismatch,
                "prior atom theta=" + format_real(theta) + " is not a likelihood parameter");
  }
  return probabilities_(static_cast<Eigen::Index>(it - parameters_.begin()), col);
}

void PriorClass::validate() const {
  if (generators.empty()) throw Error(ErrorKind::BadParameter, "prior class needs a generator");
  for (const auto& g : generators) {
    if (!g.is_probability()) throw Error(ErrorKind::NotAProbability, "prior generators must be probabilities");
  }
}

double marginal_likelihood(const DiscreteMeasure& prior, const LikelihoodTable& lik,
                           std::string_view obs) {
  const auto col = lik.column(obs);
  double total = 0.0;
  for (Eigen::Index i = 0; i < prior.size(); ++i) {
    total += lik.likelihood(prior.location(i), col) * prior.weight(i);
  }
  return total;
}

DiscreteMeasure posterior(const DiscreteMeasure& prior, const LikelihoodTable& lik,
                          std::string_view obs) {
  if (!prior.is_probability()) throw Error(ErrorKind::NotAProbability, "prior must be a probability");
  const auto col = lik.column(obs);
  std::vector<std::pair<double, double>> atoms;
  double total = 0.0;
  for (Eigen::Index i = 0; i < prior.size(); ++i) {
    const double w = lik.likelihood(prior.location(i), col) * prior.weight(i);
    atoms.emplace_back(prior.location(i), w);
    total += w;
  }
  if (!(total > 0.0)) {
    throw Error(ErrorKind::ZeroMarginal, "observation '" + std::string(obs) + "' has zero marginal likelihood");
  }
  for (auto& atom : atoms) atom.second /= total;
  return make_discrete(std::move(atoms), MeasureKind::probability, true);
}

double posterior_functional_directional(const FunctionalSpec& spec, const DiscreteMeasure& mu,
                                        const DiscreteMeasure& nu, const LikelihoodTable& lik,
                                        std::string_view obs) {
  const double m_mu = marginal_likelihood(mu, lik, obs);
  if (!(m_mu > 0.0)) {
    throw Error(ErrorKind::ZeroMarginal, "observation '" + std::string(obs) + "' has zero marginal likelihood");
  }
  const double m_nu = marginal_likelihood(nu, lik, obs);
  if (m_nu == 0.0) return 0.0;
  return m_nu / m_mu * analytic_directional(spec, posterior(mu, lik, obs), posterior(nu, lik, obs));
}

RangeResult posterior_functional_range(const PriorClass& cls, const FunctionalSpec& spec,
                                       const LikelihoodTable& lik, std::string_view obs,
                                       RangeOptions opt) {
  cls.validate();
  if (opt.max_iters < 0) throw Error(ErrorKind::BadParameter, "max_iters must be nonnegative");
  const Composed rho{spec, lik, obs};
  RangeResult result{conditional_gradient(cls, rho, 1.0, opt),
                     conditional_gradient(cls, rho, -1.0, opt), false};
  constexpr double kSandwichSlack = 1e-10;
  for (const auto& g : cls.generators) {
    if (marginal_likelihood(g, lik, obs) <= 0.0) continue;
    const double v = rho.value(g);
    if (v < result.lo.value - kSandwichSlack || v > result.hi.value + kSandwichSlack) {
      result.certificate_only = true;
    }
  }
  return result;
}

Loss parse_loss(std::string_view name) {
  if (name == "absolute") return Loss::absolute;
  throw Error(ErrorKind::BadParameter, "unknown loss '" + std::string(name) + "' (absolute)");
}

double posterior_loss(const DiscreteMeasure& prior, Loss loss) {
  switch (loss) {
    case Loss::absolute: return absolute_deviation(median_interval(prior).lo, prior);
  }
  return 0.0;
}

double posterior_loss_derivative(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return -median_envelope_derivative(mu, nu);
}

}  // namespace affcalc
