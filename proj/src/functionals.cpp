#include "affcalc/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>

#include "affcalc/error.hpp"

namespace affcalc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void require_probability(const DiscreteMeasure& m, std::string_view what) {
  if (!m.is_probability()) {
    throw Error(ErrorKind::NotAProbability, std::string(what) + " must be a probability measure");
  }
}

// Sorted cut points for step integration against rho: rho's breakpoints plus
// the extra points that fall inside its carrier.
std::vector<double> carrier_cuts(const DensityMeasure& rho, std::span<const double> extra) {
  std::vector<double> cuts = rho.breakpoints();
  for (double x : extra) {
    if (x > rho.lower() && x < rho.upper()) cuts.push_back(x);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

// int value d rho for a function that is constant on each [cuts[k], cuts[k+1]).
template <class F>
double step_integral(const DensityMeasure& rho, const std::vector<double>& cuts, F&& value) {
  CompensatedSum sum;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double d = rho.density_at(cuts[k]);
    if (d == 0.0) continue;
    sum.add(value(cuts[k]) * d * (cuts[k + 1] - cuts[k]));
  }
  return sum.value();
}

void require_within_carrier(const spec::Prospect& p, const DiscreteMeasure& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (m.location(i) < p.rho.lower() || m.location(i) > p.rho.upper()) {
      std::ostringstream os;
      os << "atom at " << m.location(i) << " lies outside the reference carrier ["
         << p.rho.lower() << ", " << p.rho.upper() << "]";
      throw Error(ErrorKind::DomainMismatch, os.str());
    }
  }
}

double phi_at(const spec::Prospect& p, const DiscreteMeasure& mu, double x) {
  const double f = mu.mass_upto(x);
  return x >= 0.0 ? p.w_plus.derivative(1.0 - f) : p.w_minus.derivative(f);
}

double prospect_value(const spec::Prospect& p, const DiscreteMeasure& mu) {
  require_within_carrier(p, mu);
  auto extra = mu.support();
  extra.push_back(0.0);
  const auto cuts = carrier_cuts(p.rho, extra);
  return step_integral(p.rho, cuts, [&](double x) {
    const double f = mu.mass_upto(x);
    return x >= 0.0 ? p.w_plus.value(1.0 - f) : -p.w_minus.value(f);
  });
}

// Phi_mu evaluated at each of `points` via one sweep over the cut points.
std::vector<double> prospect_gradient_at(const spec::Prospect& p, const DiscreteMeasure& mu,
                                         std::span<const double> points) {
  auto extra = mu.support();
  extra.push_back(0.0);
  extra.insert(extra.end(), points.begin(), points.end());
  const auto cuts = carrier_cuts(p.rho, extra);
  std::vector<double> running(cuts.size(), 0.0);
  CompensatedSum sum;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double d = p.rho.density_at(cuts[k]);
    if (d != 0.0) sum.add(phi_at(p, mu, cuts[k]) * d * (cuts[k + 1] - cuts[k]));
    running[k + 1] = sum.value();
  }
  std::vector<double> out;
  out.reserve(points.size());
  for (double x : points) {
    if (x <= cuts.front()) {
      out.push_back(0.0);
    } else if (x >= cuts.back()) {
      out.push_back(running.back());
    } else {
      const auto it = std::lower_bound(cuts.begin(), cuts.end(), x);
      out.push_back(running[static_cast<std::size_t>(it - cuts.begin())]);
    }
  }
  return out;
}

double prospect_derivative(const spec::Prospect& p, const DiscreteMeasure& m,
                           const DiscreteMeasure& dir) {
  require_within_carrier(p, m);
  require_within_carrier(p, dir);
  const auto points = union_support(m, dir);
  const auto phi = prospect_gradient_at(p, m, points);
  CompensatedSum sum;
  for (std::size_t i = 0; i < points.size(); ++i) {
    sum.add(phi[i] * (dir.mass_at(points[i]) - m.mass_at(points[i])));
  }
  return sum.value();
}

// Quadratic functional B(x, y) = int int psi dx dy.
double bilinear(const Kernel& k, const DiscreteMeasure& x, const DiscreteMeasure& y) {
  return x.weights().dot(k.gram(x.locations(), y.locations()) * y.weights());
}

// CvM pieces. Against a density F0 every integrand below is a polynomial in
// u = F0(x), which is linear on each cut interval, so the integrals are exact.
struct CvmSegments {
  std::vector<double> cuts;
  std::vector<double> u;  // F0 at the cuts
};

CvmSegments cvm_segments(const DensityMeasure& f0, std::span<const double> atoms) {
  CvmSegments seg;
  seg.cuts = carrier_cuts(f0, atoms);
  seg.u.reserve(seg.cuts.size());
  for (double c : seg.cuts) seg.u.push_back(f0.cdf(c));
  return seg;
}

double cvm_value(const spec::CramerVonMises& c, const DiscreteMeasure& f) {
  return std::visit(
      overloaded{
          [&](const DensityMeasure& f0) {
            const auto seg = cvm_segments(f0, f.support());
            CompensatedSum sum;
            for (std::size_t k = 0; k + 1 < seg.cuts.size(); ++k) {
              const double level = f.mass_upto(seg.cuts[k]);
              const double a = level - seg.u[k];
              const double b = level - seg.u[k + 1];
              sum.add((a * a * a - b * b * b) / 3.0);
            }
            return sum.value();
          },
          [&](const DiscreteMeasure& f0) {
            CompensatedSum sum;
            for (Eigen::Index j = 0; j < f0.size(); ++j) {
              const double x = f0.location(j);
              const double diff = f.mass_upto(x) - f0.mass_upto(x);
              sum.add(f0.weight(j) * diff * diff);
            }
            return sum.value();
          }},
      c.f0);
}

// DT(F; G) = 2 int (F - F0)(G - F) dF0.
double cvm_derivative(const spec::CramerVonMises& c, const DiscreteMeasure& f,
                      const DiscreteMeasure& g) {
  return std::visit(
      overloaded{
          [&](const DensityMeasure& f0) {
            const auto seg = cvm_segments(f0, union_support(f, g));
            CompensatedSum sum;
            for (std::size_t k = 0; k + 1 < seg.cuts.size(); ++k) {
              const double level = f.mass_upto(seg.cuts[k]);
              const double step = g.mass_upto(seg.cuts[k]) - level;
              if (step == 0.0) continue;
              const double a = level - seg.u[k];
              const double b = level - seg.u[k + 1];
              sum.add(step * (a * a - b * b));
            }
            return sum.value();
          },
          [&](const DiscreteMeasure& f0) {
            CompensatedSum sum;
            for (Eigen::Index j = 0; j < f0.size(); ++j) {
              const double x = f0.location(j);
              const double fx = f.mass_upto(x);
              sum.add(2.0 * f0.weight(j) * (fx - f0.mass_upto(x)) * (g.mass_upto(x) - fx));
            }
            return sum.value();
          }},
      c.f0);
}

double abs_loss(double s, const DiscreteMeasure& m) {
  CompensatedSum sum;
  for (Eigen::Index i = 0; i < m.size(); ++i) sum.add(m.weight(i) * std::abs(s - m.location(i)));
  return sum.value();
}

double jump_value(double alpha, const DiscreteMeasure& m) {
  CompensatedSum sum;
  for (Eigen::Index i = 0; i < m.size(); ++i) sum.add(std::pow(m.weight(i), alpha));
  return sum.value();
}

}  // namespace

// ---------------------------------------------------------------------------
// ScalarMap, Kernel, WeightingFunction

ScalarMap ScalarMap::identity() { return {"identity", [](double x) { return x; }}; }
ScalarMap ScalarMap::square() { return {"square", [](double x) { return x * x; }}; }
ScalarMap ScalarMap::absolute() { return {"abs", [](double x) { return std::abs(x); }}; }

ScalarMap ScalarMap::named(std::string_view name) {
  if (name == "identity") return identity();
  if (name == "square") return square();
  if (name == "abs") return absolute();
  if (name == "cube") return {"cube", [](double x) { return x * x * x; }};
  if (name == "exp") return {"exp", [](double x) { return std::exp(x); }};
  if (name == "sin") return {"sin", [](double x) { return std::sin(x); }};
  throw Error(ErrorKind::BadParameter, "unknown scalar function '" + std::string(name) +
                                           "' (identity | square | abs | cube | exp | sin)");
}

Kernel Kernel::product(double scale) {
  Kernel k(Form::product);
  k.scale_ = scale;
  return k;
}

Kernel Kernel::min() { return Kernel(Form::min); }

Kernel Kernel::max_of(ScalarMap f) {
  Kernel k(Form::max_of);
  k.f_ = std::move(f);
  return k;
}

Kernel Kernel::table(std::vector<double> grid, Matrix values) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  if (n == 0 || values.rows() != n || values.cols() != n) {
    throw Error(ErrorKind::BadParameter, "kernel table must be square over its grid");
  }
  if (!std::is_sorted(grid.begin(), grid.end()) ||
      std::adjacent_find(grid.begin(), grid.end()) != grid.end()) {
    throw Error(ErrorKind::BadParameter, "kernel grid must be strictly increasing");
  }
  Kernel k(Form::table);
  k.grid_ = std::move(grid);
  k.table_ = std::move(values);
  k.bound_ = k.table_.cwiseAbs().maxCoeff();
  k.validate(k.grid_);
  return k;
}

Kernel Kernel::read_table_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::vector<double> header;
  std::string line;
  bool first = true;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  auto to_real = [](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (s.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorKind::ParseError, "cannot parse kernel table cell '" + s + "'");
    }
  };
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split(line);
    if (first) {
      if (cells.size() < 2) throw Error(ErrorKind::ParseError, "kernel table header too short");
      for (std::size_t i = 1; i < cells.size(); ++i) header.push_back(to_real(cells[i]));
      first = false;
      continue;
    }
    if (cells.size() != header.size() + 1) {
      throw Error(ErrorKind::ParseError, "kernel table row width does not match header");
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(to_real(c));
    rows.push_back(std::move(row));
  }
  if (rows.size() != header.size()) {
    throw Error(ErrorKind::ParseError, "kernel table must have one row per grid point");
  }
  Matrix values(static_cast<Eigen::Index>(header.size()), static_cast<Eigen::Index>(header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i][0] != header[i]) {
      throw Error(ErrorKind::ParseError, "kernel table row labels must match the header grid");
    }
    for (std::size_t j = 0; j < header.size(); ++j) {
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j + 1];
    }
  }
  return table(std::move(header), std::move(values));
}

std::string Kernel::describe() const {
  switch (form_) {
    case Form::product:
      return scale_ == 1.0 ? "product" : "product(scale=" + format_real(scale_) + ")";
    case Form::min: return "min";
    case Form::max_of: return "max_of(" + f_.name + ")";
    case Form::table: return "table(" + std::to_string(grid_.size()) + " points)";
  }
  return "kernel";
}

Kernel Kernel::with_bound(double bound) const {
  Kernel k = *this;
  k.bound_ = bound;
  return k;
}

double Kernel::operator()(double x, double y) const {
  switch (form_) {
    case Form::product: return scale_ * x * y;
    case Form::min: return std::min(x, y);
    case Form::max_of: return std::max(f_(x), f_(y));
    case Form::table: {
      auto index = [&](double v) {
        const auto it = std::lower_bound(grid_.begin(), grid_.end(), v - 1e-12 * std::max(1.0, std::abs(v)));
        if (it == grid_.end() || std::abs(*it - v) > 1e-12 * std::max(1.0, std::abs(v))) {
          std::ostringstream os;
          os << "point " << v << " is not on the kernel table grid";
          throw Error(ErrorKind::DomainMismatch, os.str());
        }
        return static_cast<Eigen::Index>(it - grid_.begin());
      };
      return table_(index(x), index(y));
    }
  }
  return 0.0;
}

Matrix Kernel::gram(const Vector& xs, const Vector& ys) const {
  Matrix g(xs.size(), ys.size());
  if (form_ == Form::product) {
    g.noalias() = scale_ * xs * ys.transpose();
    return g;
  }
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    for (Eigen::Index j = 0; j < ys.size(); ++j) g(i, j) = (*this)(xs[i], ys[j]);
  }
  return g;
}

void Kernel::validate(std::span<const double> grid) const {
  for (double x : grid) {
    for (double y : grid) {
      const double a = (*this)(x, y);
      const double b = (*this)(y, x);
      if (std::abs(a - b) > 1e-12) {
        throw Error(ErrorKind::BadParameter, "kernel " + describe() + " is not symmetric");
      }
      if (std::abs(a) > bound_) {
        throw Error(ErrorKind::BadParameter,
                    "kernel " + describe() + " exceeds its bound " + format_real(bound_));
      }
    }
  }
}

WeightingFunction WeightingFunction::identity() {
  return {"identity", [](double p) { return p; }, [](double) { return 1.0; }};
}

WeightingFunction WeightingFunction::power(double gamma) {
  if (!(gamma >= 1.0)) {
    throw Error(ErrorKind::BadParameter, "power weighting needs gamma >= 1 to be C^1 on [0,1]");
  }
  return {"power(" + format_real(gamma) + ")", [gamma](double p) { return std::pow(p, gamma); },
          [gamma](double p) { return gamma * std::pow(p, gamma - 1.0); }};
}

WeightingFunction WeightingFunction::tilt(double c) {
  if (!(std::abs(c) < 1.0)) {
    throw Error(ErrorKind::BadParameter, "tilt weighting needs |c| < 1 to stay increasing");
  }
  return {"tilt(" + format_real(c) + ")", [c](double p) { return p + c * p * (1.0 - p); },
          [c](double p) { return 1.0 + c * (1.0 - 2.0 * p); }};
}

void WeightingFunction::validate() const {
  if (!value || !derivative) throw Error(ErrorKind::BadParameter, "weighting function is empty");
  if (std::abs(value(0.0)) > 1e-12 || std::abs(value(1.0) - 1.0) > 1e-12) {
    throw Error(ErrorKind::BadParameter, "weighting " + name + " must map 0 to 0 and 1 to 1");
  }
  double prev = value(0.0);
  for (int i = 1; i <= 100; ++i) {
    const double cur = value(i / 100.0);
    if (!(cur > prev)) {
      throw Error(ErrorKind::BadParameter, "weighting " + name + " is not strictly increasing");
    }
    prev = cur;
  }
}

// ---------------------------------------------------------------------------
// FunctionalSpec

FunctionalSpec::FunctionalSpec(Variant form) : form_(std::move(form)) {
  std::visit(
      overloaded{
          [](const spec::CdfAt& c) {
            if (!std::isfinite(c.x0)) throw Error(ErrorKind::BadParameter, "cdf_at needs finite x0");
          },
          [](const spec::Moment& m) {
            if (!m.g.fn) throw Error(ErrorKind::BadParameter, "moment needs a function g");
          },
          [](const spec::Quadratic& q) {
            if (q.kernel.form() != Kernel::Form::table) {
              std::vector<double> grid;
              for (int i = 0; i <= 16; ++i) grid.push_back(-2.0 + 0.25 * i);
              q.kernel.validate(grid);
            }
          },
          [](const spec::MannWhitney& mw) {
            if (mw.slot != spec::MannWhitney::Slot::diagonal) {
              if (!mw.partner) {
                throw Error(ErrorKind::BadParameter, "mann_whitney slot needs a partner measure");
              }
              require_probability(*mw.partner, "mann_whitney partner");
            }
          },
          [](const spec::Jump& j) {
            if (!(j.alpha > 1.0) || !std::isfinite(j.alpha)) {
              throw Error(ErrorKind::BadParameter,
                          "jump functional requires alpha > 1 (got alpha=" + format_real(j.alpha) +
                              ")");
            }
          },
          [](const spec::Prospect& p) {
            p.w_plus.validate();
            p.w_minus.validate();
            if (!(p.rho.mass() > 0.0)) {
              throw Error(ErrorKind::BadParameter, "prospect reference measure has no mass");
            }
          },
          [](const spec::CramerVonMises& c) {
            const bool ok = std::visit(
                overloaded{[](const DensityMeasure& d) { return d.is_probability(); },
                           [](const DiscreteMeasure& d) { return d.is_probability(); }},
                c.f0);
            if (!ok) throw Error(ErrorKind::NotAProbability, "cramer_von_mises F0 must have mass 1");
          },
          [](const spec::NegAbsLoss& n) {
            if (!std::isfinite(n.s)) throw Error(ErrorKind::BadParameter, "neg_abs_loss needs finite s");
          }},
      form_);
}

FunctionalSpec FunctionalSpec::cdf_at(double x0) { return FunctionalSpec(spec::CdfAt{x0}); }
FunctionalSpec FunctionalSpec::moment(ScalarMap g) { return FunctionalSpec(spec::Moment{std::move(g)}); }
FunctionalSpec FunctionalSpec::quadratic(Kernel kernel) {
  return FunctionalSpec(spec::Quadratic{std::move(kernel)});
}
FunctionalSpec FunctionalSpec::mann_whitney() { return FunctionalSpec(spec::MannWhitney{}); }
FunctionalSpec FunctionalSpec::mann_whitney_first(DiscreteMeasure lambda) {
  return FunctionalSpec(spec::MannWhitney{spec::MannWhitney::Slot::first, std::move(lambda)});
}
FunctionalSpec FunctionalSpec::mann_whitney_second(DiscreteMeasure mu) {
  return FunctionalSpec(spec::MannWhitney{spec::MannWhitney::Slot::second, std::move(mu)});
}
FunctionalSpec FunctionalSpec::jump(double alpha) { return FunctionalSpec(spec::Jump{alpha}); }
FunctionalSpec FunctionalSpec::prospect(WeightingFunction w_plus, WeightingFunction w_minus,
                                        DensityMeasure rho) {
  return FunctionalSpec(spec::Prospect{std::move(w_plus), std::move(w_minus), std::move(rho)});
}
FunctionalSpec FunctionalSpec::cramer_von_mises(DensityMeasure f0) {
  return FunctionalSpec(spec::CramerVonMises{std::move(f0)});
}
FunctionalSpec FunctionalSpec::cramer_von_mises(DiscreteMeasure f0) {
  return FunctionalSpec(spec::CramerVonMises{std::move(f0)});
}
FunctionalSpec FunctionalSpec::neg_abs_loss(double s) { return FunctionalSpec(spec::NegAbsLoss{s}); }

std::string_view FunctionalSpec::name() const {
  return std::visit(overloaded{[](const spec::CdfAt&) { return "cdf_at"; },
                               [](const spec::Moment&) { return "moment"; },
                               [](const spec::Quadratic&) { return "quadratic"; },
                               [](const spec::MannWhitney&) { return "mann_whitney"; },
                               [](const spec::Jump&) { return "jump"; },
                               [](const spec::Prospect&) { return "prospect"; },
                               [](const spec::CramerVonMises&) { return "cramer_von_mises"; },
                               [](const spec::NegAbsLoss&) { return "neg_abs_loss"; }},
                    form_);
}

bool FunctionalSpec::is_affine() const {
  if (std::holds_alternative<spec::CdfAt>(form_) || std::holds_alternative<spec::Moment>(form_) ||
      std::holds_alternative<spec::NegAbsLoss>(form_)) {
    return true;
  }
  if (const auto* mw = std::get_if<spec::MannWhitney>(&form_)) {
    return mw->slot != spec::MannWhitney::Slot::diagonal;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Evaluation and derivatives

double eval(const FunctionalSpec& spec, const DiscreteMeasure& m) {
  require_probability(m, "evaluation argument");
  return std::visit(
      overloaded{
          [&](const spec::CdfAt& c) { return m.mass_upto(c.x0); },
          [&](const spec::Moment& mo) { return m.integrate(mo.g.fn); },
          [&](const spec::Quadratic& q) { return bilinear(q.kernel, m, m); },
          [&](const spec::MannWhitney& mw) {
            switch (mw.slot) {
              case spec::MannWhitney::Slot::first: return mann_whitney(m, *mw.partner);
              case spec::MannWhitney::Slot::second: return mann_whitney(*mw.partner, m);
              default: return mann_whitney(m, m);
            }
          },
          [&](const spec::Jump& j) { return jump_value(j.alpha, m); },
          [&](const spec::Prospect& p) { return prospect_value(p, m); },
          [&](const spec::CramerVonMises& c) { return cvm_value(c, m); },
          [&](const spec::NegAbsLoss& n) { return -abs_loss(n.s, m); }},
      spec.form());
}

double analytic_directional(const FunctionalSpec& spec, const DiscreteMeasure& m,
                            const DiscreteMeasure& dir) {
  require_probability(m, "base measure");
  require_probability(dir, "direction");
  return std::visit(
      overloaded{
          [&](const spec::CdfAt& c) { return dir.mass_upto(c.x0) - m.mass_upto(c.x0); },
          [&](const spec::Moment& mo) { return dir.integrate(mo.g.fn) - m.integrate(mo.g.fn); },
          [&](const spec::Quadratic& q) {
            // DQ(x; y) = 2 B_S(x, y) - 2 Q(x); psi is symmetric so B_S = B.
            return 2.0 * bilinear(q.kernel, m, dir) - 2.0 * bilinear(q.kernel, m, m);
          },
          [&](const spec::MannWhitney& mw) {
            switch (mw.slot) {
              case spec::MannWhitney::Slot::first:
                return mann_whitney(dir, *mw.partner) - mann_whitney(m, *mw.partner);
              case spec::MannWhitney::Slot::second:
                return mann_whitney(*mw.partner, dir) - mann_whitney(*mw.partner, m);
              default: return mann_whitney_directional(m, m, dir, dir);
            }
          },
          [&](const spec::Jump& j) {
            // sum_x alpha p_x^(alpha-1) (q_x - p_x); atoms with p_x = 0 contribute 0.
            CompensatedSum sum;
            for (Eigen::Index i = 0; i < m.size(); ++i) {
              const double p = m.weight(i);
              sum.add(j.alpha * std::pow(p, j.alpha - 1.0) * (dir.mass_at(m.location(i)) - p));
            }
            return sum.value();
          },
          [&](const spec::Prospect& p) { return prospect_derivative(p, m, dir); },
          [&](const spec::CramerVonMises& c) { return cvm_derivative(c, m, dir); },
          [&](const spec::NegAbsLoss& n) { return abs_loss(n.s, m) - abs_loss(n.s, dir); }},
      spec.form());
}

double InfluenceTable::at(double x) const {
  const auto it = std::lower_bound(grid.begin(), grid.end(), x);
  if (it == grid.end() || *it != x) {
    std::ostringstream os;
    os << "point " << x << " is not on the influence grid";
    throw Error(ErrorKind::DomainMismatch, os.str());
  }
  return values[it - grid.begin()];
}

double InfluenceTable::integrate(const DiscreteMeasure& measure) const {
  CompensatedSum sum;
  for (Eigen::Index i = 0; i < measure.size(); ++i) {
    sum.add(measure.weight(i) * at(measure.location(i)));
  }
  return sum.value();
}

InfluenceTable influence(const FunctionalSpec& spec, const DiscreteMeasure& m,
                         std::span<const double> grid) {
  auto points = merge_points(m.support(), grid);
  Vector values(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    values[static_cast<Eigen::Index>(i)] =
        analytic_directional(spec, m, DiscreteMeasure::dirac(points[i]));
  }
  InfluenceTable table{std::move(points), std::move(values), m};
  // The raw values already integrate to DT(m; m) = 0 up to rounding; remove
  // the residue so the normalization holds to working precision.
  const double shift = table.integrate(m);
  table.values.array() -= shift;
  return table;
}

DominanceVerdict dominance_test(const FunctionalSpec& spec, const DiscreteMeasure& a,
                                const DiscreteMeasure& b,
                                std::span<const DiscreteMeasure> probes,
                                std::span<const double> alpha_grid) {
  if (probes.empty()) throw Error(ErrorKind::BadParameter, "dominance test needs probe measures");
  DominanceVerdict verdict{true, true};
  const auto grid = union_support(a, b);
  for (const auto& nu : probes) {
    for (double alpha : alpha_grid) {
      const double lhs = eval(spec, mix(nu, a, alpha));
      const double rhs = eval(spec, mix(nu, b, alpha));
      if (lhs < rhs - kDominanceTolerance) verdict.direct = false;
    }
    const auto u = influence(spec, nu, grid);
    if (u.integrate(a) < u.integrate(b) - kDominanceTolerance) verdict.local_utility = false;
  }
  return verdict;
}

double mann_whitney(const DiscreteMeasure& mu, const DiscreteMeasure& lambda) {
  CompensatedSum sum;
  for (Eigen::Index j = 0; j < lambda.size(); ++j) {
    sum.add(lambda.weight(j) * mu.mass_upto(lambda.location(j)));
  }
  return sum.value();
}

double mann_whitney_directional(const DiscreteMeasure& mu, const DiscreteMeasure& lambda,
                                const DiscreteMeasure& mu1, const DiscreteMeasure& lambda1) {
  return mann_whitney(mu, lambda1) + mann_whitney(mu1, lambda) - 2.0 * mann_whitney(mu, lambda);
}

MannWhitneyGradient mann_whitney_gradient(const DiscreteMeasure& mu,
                                          const DiscreteMeasure& lambda,
                                          std::span<const double> grid) {
  MannWhitneyGradient g;
  g.grid.assign(grid.begin(), grid.end());
  g.first.resize(static_cast<Eigen::Index>(grid.size()));
  g.second.resize(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    g.first[k] = -lambda.mass_below(grid[i]);
    g.second[k] = mu.mass_upto(grid[i]);
  }
  return g;
}

double prospect_phi(const spec::Prospect& p, const DiscreteMeasure& mu, double x) {
  return phi_at(p, mu, x);
}

double prospect_gradient(const spec::Prospect& p, const DiscreteMeasure& mu, double x) {
  const double pts[] = {x};
  return prospect_gradient_at(p, mu, pts).front();
}

bool prospect_sure_dominance(const spec::Prospect& p, const DiscreteMeasure& a,
                             const DiscreteMeasure& b,
                             std::span<const DiscreteMeasure> probes) {
  for (const auto& nu : probes) {
    auto extra = union_support(a, b);
    const auto nu_support = nu.support();
    extra = merge_points(std::move(extra), nu_support);
    extra.push_back(0.0);
    const auto cuts = carrier_cuts(p.rho, extra);
    const double lhs =
        step_integral(p.rho, cuts, [&](double x) { return phi_at(p, nu, x) * (1.0 - a.mass_upto(x)); });
    const double rhs =
        step_integral(p.rho, cuts, [&](double x) { return phi_at(p, nu, x) * (1.0 - b.mass_upto(x)); });
    if (lhs < rhs - kDominanceTolerance) return false;
  }
  return true;
}

}  // namespace affcalc
