#include "affcalc/cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "affcalc/asymptotics.hpp"
#include "affcalc/bayes.hpp"
#include "affcalc/derivcheck.hpp"
#include "affcalc/envelope.hpp"
#include "affcalc/error.hpp"

namespace affcalc::cli {

namespace {

struct Flag {
  const char* name;
  const char* help;
};

// Single-valued settings, shared by the flag parser and the config reader.
constexpr Flag kFlags[] = {
    {"functional",
     "functional name: cdf_at | moment | quadratic | mann_whitney | jump | prospect | "
     "cramer_von_mises | neg_abs_loss"},
    {"measure", "base measure: CSV path (location,weight) or literal loc:w,loc:w"},
    {"direction", "direction measure, same formats as --measure"},
    {"out", "write the report to this file instead of stdout"},
    {"seed", "random seed (default 0)"},
    {"tol", "tolerance: ladder convergence for deriv/envelope (default 1e-6), "
            "certificate stop rule for robust-range (default 1e-8)"},
    {"t-min", "smallest finite-difference step (default 2^-16)"},
    {"ladder", "number of step halvings (default 12)"},
    {"grid", "influence grid: a,b,c or lin:lo:hi:count (default: support of --measure)"},
    {"property", "shape property: convex | quasiconvex | pseudoconvex | monotone_derivative"},
    {"random-pairs", "extra random pairs on the joint support for probe (default 0)"},
    {"fixture", "envelope problem: counterexample_danskin | median (default median)"},
    {"x", "counterexample base point (default 0.5)"},
    {"y", "counterexample direction point (default 1)"},
    {"likelihood", "likelihood CSV: header theta,<labels>, one row per parameter"},
    {"obs", "observed label"},
    {"max-iters", "conditional-gradient iteration cap (default 500)"},
    {"loss", "posterior loss: absolute (default)"},
    {"n", "sample size for clt (default 2000)"},
    {"reps", "replications for clt (default 2000)"},
    {"metric", "remainder metric: kolmogorov | total_variation | levy_prokhorov (default kolmogorov)"},
    {"path", "remainder path: mixture (toward --direction) | shift (translate the base) "
             "(default mixture)"},
    {"steps", "remainder path length, step k uses 2^-k (default 12)"},
};

constexpr double kDefaultRangeTolerance = 1e-8;

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorKind::BadParameter, msg); }

double parse_real(std::string_view text, const std::string& what) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw Error(ErrorKind::ParseError, "cannot parse " + what + " '" + std::string(text) + "'");
  }
  return v;
}

long long parse_integer(std::string_view text, const std::string& what) {
  long long v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw Error(ErrorKind::ParseError, "cannot parse integer " + what + " '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.emplace_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::pair<std::string, std::string> split_param(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorKind::ParseError, "parameter must be key=value, got '" + kv + "'");
  }
  return {kv.substr(0, eq), kv.substr(eq + 1)};
}

WeightingFunction parse_weighting(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts[0] == "identity" && parts.size() == 1) return WeightingFunction::identity();
  if (parts[0] == "power" && parts.size() == 2) return WeightingFunction::power(parse_real(parts[1], "gamma"));
  if (parts[0] == "tilt" && parts.size() == 2) return WeightingFunction::tilt(parse_real(parts[1], "tilt"));
  bad("weighting must be identity | power:<gamma> | tilt:<c>, got '" + text + "'");
}

// lebesgue:a:b or uniform:a:b; nullopt for anything else.
std::optional<DensityMeasure> parse_density(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3 || (parts[0] != "lebesgue" && parts[0] != "uniform")) return std::nullopt;
  const double a = parse_real(parts[1], "interval end");
  const double b = parse_real(parts[2], "interval end");
  return parts[0] == "lebesgue" ? DensityMeasure::lebesgue(a, b) : DensityMeasure::uniform(a, b);
}

std::vector<double> parse_grid(const std::string& text) {
  if (text.rfind("lin:", 0) == 0) {
    const auto parts = split(text, ':');
    if (parts.size() != 4) bad("linear grid is lin:<lo>:<hi>:<count>");
    const double lo = parse_real(parts[1], "grid end");
    const double hi = parse_real(parts[2], "grid end");
    const long long count = parse_integer(parts[3], "grid count");
    if (count < 2 || !(lo < hi)) bad("linear grid needs lo < hi and count >= 2");
    std::vector<double> grid;
    for (long long i = 0; i < count; ++i) {
      grid.push_back(i == count - 1 ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    return grid;
  }
  std::vector<double> grid;
  for (const auto& item : split(text, ',')) grid.push_back(parse_real(item, "grid point"));
  return grid;
}

void write_report(const RunConfig& cfg, const Report& report, std::ostream& out) {
  const std::string text = report.str();
  if (cfg.has("out")) {
    std::ofstream file(cfg.values.at("out"), std::ios::binary);
    if (!file) throw Error(ErrorKind::ParseError, "cannot write '" + cfg.values.at("out") + "'");
    file << text;
    if (!file) throw Error(ErrorKind::ParseError, "cannot write '" + cfg.values.at("out") + "'");
  } else {
    out << text;
  }
}

FunctionalSpec functional_of(const RunConfig& cfg) {
  return parse_functional(cfg.require("functional"), cfg.params);
}

LadderOptions ladder_of(const RunConfig& cfg) {
  LadderOptions opt;
  opt.tolerance = cfg.real("tol", opt.tolerance);
  opt.t_min = cfg.real("t-min", opt.t_min);
  opt.ladder = static_cast<int>(cfg.integer("ladder", opt.ladder));
  return opt;
}

// Uniform stream used for the random probe pairs.
DiscreteMeasure random_on(const std::vector<double>& support, std::uint64_t seed, std::uint64_t stream) {
  std::vector<std::pair<double, double>> atoms;
  double total = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    const double w = -std::log1p(-counter_uniform(seed, stream, i));
    atoms.emplace_back(support[i], w);
    total += w;
  }
  if (!(total > 0.0)) return DiscreteMeasure::dirac(support.front());
  for (auto& a : atoms) a.second /= total;
  return make_discrete(std::move(atoms), MeasureKind::probability, true);
}

int cmd_eval(const RunConfig& cfg, Report& r) {
  const auto spec = functional_of(cfg);
  const auto m = load_measure(cfg.require("measure"));
  r.field("command", "eval").field("functional", std::string(spec.name())).field("value", eval(spec, m));
  return kExitOk;
}

int cmd_deriv(const RunConfig& cfg, Report& r, std::string& diagnostic) {
  const auto spec = functional_of(cfg);
  const auto m = load_measure(cfg.require("measure"));
  const auto dir = load_measure(cfg.require("direction"));
  const double analytic = analytic_directional(spec, m, dir);
  const auto fd = numeric_directional(as_function(spec), m, dir, ladder_of(cfg));
  r.field("command", "deriv").field("functional", std::string(spec.name()));
  r.line()
      .field("analytic", analytic)
      .field("fd", fd.estimate)
      .field("fd_error", fd.extrapolated_error)
      .field("abs_diff", std::abs(fd.estimate - analytic));
  r.line().field("verdict", std::string(verdict_name(fd.verdict))).field("method", fd.method);
  r.table({"t", "quotient"});
  for (const auto& [t, q] : fd.step_ladder) r.row({t, q});
  if (fd.verdict == Verdict::diverging) {
    diagnostic = "error: NonFiniteDerivative: difference quotients diverge";
    return kExitNumeric;
  }
  return kExitOk;
}

int cmd_influence(const RunConfig& cfg, Report& r) {
  const auto spec = functional_of(cfg);
  const auto m = load_measure(cfg.require("measure"));
  const auto grid = cfg.has("grid") ? parse_grid(cfg.values.at("grid")) : m.support();
  const auto u = influence(spec, m, grid);
  r.field("command", "influence").field("functional", std::string(spec.name()));
  r.line().field("variance", influence_variance(spec, m)).field("normalization", u.integrate(m));
  r.table({"x", "u"});
  for (std::size_t i = 0; i < u.grid.size(); ++i) r.row({u.grid[i], u.values[static_cast<Eigen::Index>(i)]});
  return kExitOk;
}

int cmd_probe(const RunConfig& cfg, Report& r) {
  const auto spec = functional_of(cfg);
  const auto property = parse_shape_property(cfg.require("property"));
  const auto x = load_measure(cfg.require("measure"));
  const auto y = load_measure(cfg.require("direction"));
  const auto seed = static_cast<std::uint64_t>(cfg.integer("seed", 0));
  const long long extra = cfg.integer("random-pairs", 0);
  if (extra < 0) bad("random-pairs must be nonnegative");
  std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>> pairs{{x, y}};
  const auto support = union_support(x, y);
  for (long long k = 0; k < extra; ++k) {
    pairs.emplace_back(random_on(support, seed, static_cast<std::uint64_t>(2 * k)),
                       random_on(support, seed, static_cast<std::uint64_t>(2 * k + 1)));
  }
  const auto rep = shape_probe(spec, property, pairs);
  r.field("command", "probe").field("functional", std::string(spec.name()));
  r.line()
      .field("property", std::string(shape_property_name(property)))
      .field("holds", rep.holds)
      .field("pairs", static_cast<long long>(pairs.size()))
      .field("seed", static_cast<long long>(seed));
  if (rep.witness) {
    const auto& w = *rep.witness;
    r.line()
        .field("pair_index", static_cast<long long>(rep.pair_index))
        .field("witness_x", measure_literal(w.x))
        .field("witness_y", measure_literal(w.y));
    r.line()
        .field("fx", w.fx)
        .field("fy", w.fy)
        .field("dxy", w.dxy)
        .field("dyx", w.dyx)
        .field("dxy_plus_dyx", w.dxy + w.dyx);
  }
  return kExitOk;
}

int cmd_envelope(const RunConfig& cfg, Report& r) {
  const auto fixture = cfg.get("fixture", "median");
  const auto opt = ladder_of(cfg);
  if (fixture == "counterexample_danskin") {
    const auto problem = counterexample_danskin();
    const double x = cfg.real("x", 0.5);
    const double y = cfg.real("y", 1.0);
    const auto d = danskin_derivative(problem, x, y, opt);
    r.field("formula", d.formula_value).field("fd", d.fd_value).field("agree", d.agree);
    r.line()
        .field("fixture", fixture)
        .field("x", x)
        .field("y", y)
        .field("value", value_and_solutions(problem, x).value)
        .field("verdict", std::string(verdict_name(d.fd_report.verdict)));
    return kExitOk;
  }
  if (fixture != "median") bad("unknown envelope fixture '" + fixture + "' (counterexample_danskin | median)");
  const auto problem = median_problem();
  const auto mu = load_measure(cfg.require("measure"));
  const auto nu = load_measure(cfg.require("direction"));
  const auto d = danskin_derivative(problem, mu, nu, opt);
  const auto interval = median_interval(mu);
  r.field("formula", d.formula_value).field("fd", d.fd_value).field("agree", d.agree);
  r.line()
      .field("fixture", fixture)
      .field("value", value_and_solutions(problem, mu).value)
      .field("median_lo", interval.lo)
      .field("median_hi", interval.hi)
      .field("verdict", std::string(verdict_name(d.fd_report.verdict)));
  return kExitOk;
}

int cmd_robust_range(const RunConfig& cfg, Report& r, std::string& diagnostic) {
  const auto spec = functional_of(cfg);
  if (cfg.generators.empty()) bad("robust-range needs at least one --generator");
  PriorClass cls;
  for (const auto& g : cfg.generators) cls.generators.push_back(load_measure(g));
  const auto lik = LikelihoodTable::read_csv_file(cfg.require("likelihood"));
  const auto obs = cfg.require("obs");
  RangeOptions opt;
  opt.max_iters = static_cast<int>(cfg.integer("max-iters", opt.max_iters));
  opt.stop_tolerance = cfg.real("tol", kDefaultRangeTolerance);
  const auto res = posterior_functional_range(cls, spec, lik, obs, opt);
  r.field("command", "robust-range").field("functional", std::string(spec.name())).field("obs", obs);
  r.line()
      .field("lo", res.lo.value)
      .field("hi", res.hi.value)
      .field("lo_cert", res.lo.certificate)
      .field("hi_cert", res.hi.certificate);
  r.line()
      .field("lo_iterations", res.lo.iterations)
      .field("hi_iterations", res.hi.iterations)
      .field("converged", res.lo.converged && res.hi.converged)
      .field("certificate_only", res.certificate_only);
  r.table({"generator", "lo_weight", "hi_weight"});
  for (std::size_t i = 0; i < cls.generators.size(); ++i) {
    r.row({static_cast<double>(i), res.lo.weights[i], res.hi.weights[i]});
  }
  if (!(res.lo.converged && res.hi.converged)) {
    diagnostic = "error: NoConvergence: certificate still below -tol after " +
                 std::to_string(opt.max_iters) + " iterations";
    return kExitNumeric;
  }
  return kExitOk;
}

int cmd_posterior_loss(const RunConfig& cfg, Report& r) {
  const auto loss = parse_loss(cfg.get("loss", "absolute"));
  auto prior = load_measure(cfg.require("measure"));
  if (cfg.has("likelihood") != cfg.has("obs")) bad("posterior-loss needs both --likelihood and --obs, or neither");
  if (cfg.has("likelihood")) {
    prior = posterior(prior, LikelihoodTable::read_csv_file(cfg.values.at("likelihood")), cfg.values.at("obs"));
  }
  const auto interval = median_interval(prior);
  r.field("command", "posterior-loss").field("loss", cfg.get("loss", "absolute"));
  r.line()
      .field("value", posterior_loss(prior, loss))
      .field("median_lo", interval.lo)
      .field("median_hi", interval.hi);
  if (cfg.has("direction")) {
    r.line().field("derivative", posterior_loss_derivative(prior, load_measure(cfg.values.at("direction"))));
  }
  return kExitOk;
}

int cmd_clt(const RunConfig& cfg, Report& r) {
  const auto spec = functional_of(cfg);
  const auto f = load_measure(cfg.require("measure"));
  const auto n = cfg.integer("n", 2000);
  const auto reps = cfg.integer("reps", 2000);
  if (n > 100000000 || reps > 100000000) bad("n and reps are capped at 1e8");
  const auto seed = static_cast<std::uint64_t>(cfg.integer("seed", 0));
  const auto rep = clt_experiment(spec, f, static_cast<int>(n), static_cast<int>(reps), seed);
  r.field("command", "clt").field("functional", std::string(spec.name()));
  r.line()
      .field("n", rep.n)
      .field("reps", rep.replications)
      .field("seed", static_cast<long long>(rep.seed));
  r.line()
      .field("sigma2", rep.sigma2_analytic)
      .field("mean", rep.mean)
      .field("variance", rep.variance)
      .field("ks", rep.ks_distance);
  r.table({"rep", "statistic"});
  for (std::size_t i = 0; i < rep.statistics.size(); ++i) r.row({static_cast<double>(i), rep.statistics[i]});
  return kExitOk;
}

int cmd_remainder(const RunConfig& cfg, Report& r) {
  const auto spec = functional_of(cfg);
  const auto base = load_measure(cfg.require("measure"));
  const auto kind = parse_metric_kind(cfg.get("metric", "kolmogorov"));
  const auto path_kind = cfg.get("path", "mixture");
  const auto steps = cfg.integer("steps", 12);
  if (steps < 2 || steps > 60) bad("steps must lie in [2, 60]");
  std::vector<DiscreteMeasure> path;
  if (path_kind == "mixture") {
    const auto dir = load_measure(cfg.require("direction"));
    for (long long k = 1; k <= steps; ++k) path.push_back(mix(base, dir, std::ldexp(1.0, static_cast<int>(-k))));
  } else if (path_kind == "shift") {
    for (long long k = 1; k <= steps; ++k) {
      const double h = std::ldexp(1.0, static_cast<int>(-k));
      auto atoms = base.atoms();
      for (auto& a : atoms) a.first += h;
      path.push_back(make_discrete(std::move(atoms)));
    }
  } else {
    bad("unknown remainder path '" + path_kind + "' (mixture | shift)");
  }
  const auto rep = remainder_probe(spec, base, kind, path);
  r.field("command", "remainder").field("functional", std::string(spec.name()));
  r.line()
      .field("metric", std::string(metric_name(kind)))
      .field("path", path_kind)
      .field("slope", rep.fitted_slope);
  if (rep.limit_ratio) r.field("limit_ratio", *rep.limit_ratio);
  r.table({"distance", "remainder"});
  for (const auto& s : rep.samples) r.row({s.distance, s.remainder});
  return kExitOk;
}

std::string json_scalar(const nlohmann::json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number_float()) return format_real(v.get<double>());
  throw Error(ErrorKind::ParseError, "config key '" + key + "' must be a scalar");
}

}  // namespace

const std::string& RunConfig::require(const std::string& key) const {
  const auto it = values.find(key);
  if (it == values.end()) bad("command '" + command + "' needs --" + key);
  return it->second;
}

std::string RunConfig::get(const std::string& key, const std::string& fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

double RunConfig::real(const std::string& key, double fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : parse_real(it->second, key);
}

double RunConfig::real(const std::string& key) const { return parse_real(require(key), key); }

long long RunConfig::integer(const std::string& key, long long fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : parse_integer(it->second, key);
}

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"eval",         "deriv",          "influence",
                                              "probe",        "envelope",       "robust-range",
                                              "posterior-loss", "clt",          "remainder"};
  return names;
}

RunConfig load_config(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::ParseError, "config must be a JSON object");
  RunConfig cfg;
  for (const auto& [key, value] : doc.items()) {
    if (key == "command") {
      cfg.command = json_scalar(value, key);
    } else if (key == "functional" && value.is_object()) {
      for (const auto& [pk, pv] : value.items()) {
        if (pk == "name") {
          cfg.values["functional"] = json_scalar(pv, "functional.name");
        } else {
          cfg.params[pk] = json_scalar(pv, "functional." + pk);
        }
      }
    } else if (key == "param") {
      if (!value.is_object()) throw Error(ErrorKind::ParseError, "config key 'param' must be an object");
      for (const auto& [pk, pv] : value.items()) cfg.params[pk] = json_scalar(pv, "param." + pk);
    } else if (key == "generator") {
      if (!value.is_array()) throw Error(ErrorKind::ParseError, "config key 'generator' must be an array");
      for (const auto& g : value) cfg.generators.push_back(json_scalar(g, "generator"));
    } else {
      bool known = false;
      for (const auto& f : kFlags) known = known || key == f.name;
      if (!known) throw Error(ErrorKind::ParseError, "unknown config key '" + key + "'");
      cfg.values[key] = json_scalar(value, key);
    }
  }
  return cfg;
}

FunctionalSpec parse_functional(std::string_view name, const std::map<std::string, std::string>& params) {
  auto allow = [&](std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : params) {
      bool ok = false;
      for (const char* key : keys) ok = ok || k == key;
      if (!ok) bad("functional '" + std::string(name) + "' has no parameter '" + k + "'");
    }
  };
  auto get = [&](const char* key, const std::string& fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  auto need = [&](const char* key) {
    const auto it = params.find(key);
    if (it == params.end()) bad("functional '" + std::string(name) + "' needs --param " + key + "=...");
    return it->second;
  };

  if (name == "cdf_at") {
    allow({"x0"});
    return FunctionalSpec::cdf_at(parse_real(need("x0"), "x0"));
  }
  if (name == "moment") {
    allow({"g"});
    return FunctionalSpec::moment(ScalarMap::named(get("g", "identity")));
  }
  if (name == "quadratic") {
    allow({"kernel", "scale", "f", "table", "bound"});
    const auto kernel_name = get("kernel", "product");
    Kernel kernel = Kernel::min();
    if (kernel_name == "product") {
      kernel = Kernel::product(parse_real(get("scale", "1"), "scale"));
    } else if (kernel_name == "min") {
      kernel = Kernel::min();
    } else if (kernel_name == "max_of") {
      kernel = Kernel::max_of(ScalarMap::named(get("f", "identity")));
    } else if (kernel_name == "table") {
      const auto path = need("table");
      std::ifstream in(path);
      if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + path + "'");
      kernel = Kernel::read_table_csv(in);
    } else {
      bad("unknown kernel '" + kernel_name + "' (product | min | max_of | table)");
    }
    if (params.count("bound")) kernel = kernel.with_bound(parse_real(params.at("bound"), "bound"));
    if (kernel.form() == Kernel::Form::table) kernel.validate(std::vector<double>{});
    return FunctionalSpec::quadratic(std::move(kernel));
  }
  if (name == "mann_whitney") {
    allow({"slot", "partner"});
    const auto slot = get("slot", "diagonal");
    if (slot == "diagonal") {
      if (params.count("partner")) bad("mann_whitney diagonal slot takes no partner");
      return FunctionalSpec::mann_whitney();
    }
    if (slot == "first") return FunctionalSpec::mann_whitney_first(load_measure(need("partner")));
    if (slot == "second") return FunctionalSpec::mann_whitney_second(load_measure(need("partner")));
    bad("unknown mann_whitney slot '" + slot + "' (diagonal | first | second)");
  }
  if (name == "jump") {
    allow({"alpha"});
    return FunctionalSpec::jump(parse_real(need("alpha"), "alpha"));
  }
  if (name == "prospect") {
    allow({"w_plus", "w_minus", "rho"});
    const auto rho = parse_density(need("rho"));
    if (!rho) bad("prospect rho must be lebesgue:<a>:<b> or uniform:<a>:<b>");
    return FunctionalSpec::prospect(parse_weighting(get("w_plus", "identity")),
                                    parse_weighting(get("w_minus", "identity")), *rho);
  }
  if (name == "cramer_von_mises") {
    allow({"f0"});
    const auto f0 = get("f0", "uniform:0:1");
    if (auto density = parse_density(f0)) return FunctionalSpec::cramer_von_mises(*density);
    return FunctionalSpec::cramer_von_mises(load_measure(f0));
  }
  if (name == "neg_abs_loss") {
    allow({"s"});
    return FunctionalSpec::neg_abs_loss(parse_real(need("s"), "s"));
  }
  bad("unknown functional '" + std::string(name) +
      "' (cdf_at | moment | quadratic | mann_whitney | jump | prospect | cramer_von_mises | "
      "neg_abs_loss)");
}

DiscreteMeasure load_measure(const std::string& text) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(text, ec)) return read_measure_csv_file(text);
  return parse_measure_literal(text);
}

std::string measure_literal(const DiscreteMeasure& m) {
  std::string s;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (i > 0) s += ',';
    s += format_real(m.location(i)) + ':' + format_real(m.weight(i));
  }
  return s;
}

Report& Report::line() {
  lines_.emplace_back();
  return *this;
}

Report& Report::field(const std::string& key, const std::string& value) {
  if (lines_.empty()) lines_.emplace_back();
  lines_.back().emplace_back(key, value);
  return *this;
}

Report& Report::field(const std::string& key, const char* value) { return field(key, std::string(value)); }
Report& Report::field(const std::string& key, double value) { return field(key, format_real(value)); }
Report& Report::field(const std::string& key, long long value) { return field(key, std::to_string(value)); }
Report& Report::field(const std::string& key, int value) { return field(key, std::to_string(value)); }
Report& Report::field(const std::string& key, bool value) { return field(key, std::string(value ? "true" : "false")); }

Report& Report::table(std::vector<std::string> header) {
  header_ = std::move(header);
  return *this;
}

Report& Report::row(const std::vector<double>& values) {
  rows_.push_back(values);
  return *this;
}

std::string Report::str() const {
  std::string s;
  for (const auto& line : lines_) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (i > 0) s += ' ';
      s += line[i].first + '=' + line[i].second;
    }
    s += '\n';
  }
  if (!header_.empty()) {
    s += '\n';
    for (std::size_t i = 0; i < header_.size(); ++i) s += (i ? "," : "") + header_[i];
    s += '\n';
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + format_real(row[i]);
      s += '\n';
    }
  }
  return s;
}

ParsedReport parse_report(std::string_view text) {
  ParsedReport parsed;
  bool in_table = false;
  for (const auto& raw : split(text, '\n')) {
    if (raw.empty()) {
      in_table = in_table || !parsed.fields.empty();
      continue;
    }
    if (!in_table) {
      for (const auto& token : split(raw, ' ')) {
        const auto [k, v] = split_param(token);
        parsed.fields[k] = v;
      }
    } else if (parsed.header.empty()) {
      parsed.header = split(raw, ',');
    } else {
      std::vector<double> row;
      for (const auto& cell : split(raw, ',')) row.push_back(parse_real(cell, "report cell"));
      parsed.rows.push_back(std::move(row));
    }
  }
  return parsed;
}

int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    Report report;
    std::string diagnostic;
    int code = kExitOk;
    const auto& c = cfg.command;
    if (c == "eval") {
      code = cmd_eval(cfg, report);
    } else if (c == "deriv") {
      code = cmd_deriv(cfg, report, diagnostic);
    } else if (c == "influence") {
      code = cmd_influence(cfg, report);
    } else if (c == "probe") {
      code = cmd_probe(cfg, report);
    } else if (c == "envelope") {
      code = cmd_envelope(cfg, report);
    } else if (c == "robust-range") {
      code = cmd_robust_range(cfg, report, diagnostic);
    } else if (c == "posterior-loss") {
      code = cmd_posterior_loss(cfg, report);
    } else if (c == "clt") {
      code = cmd_clt(cfg, report);
    } else if (c == "remainder") {
      code = cmd_remainder(cfg, report);
    } else if (c.empty()) {
      bad("no command given");
    } else {
      bad("unknown command '" + c + "'");
    }
    write_report(cfg, report, out);
    if (!diagnostic.empty()) err << diagnostic << '\n';
    return code;
  } catch (const Error& e) {
    err << "error: " << e.name() << ": " << e.what() << '\n';
    return is_validation_error(e.kind()) ? kExitValidation : kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: EvaluationFailure: " << e.what() << '\n';
    return kExitNumeric;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Affine directional derivatives of statistical functionals.\n"
               "Reports are key=value lines, then an optional CSV table after a blank line.\n"
               "Exit codes: 0 success, 2 invalid input, 3 numeric failure.",
               "affcalc"};
  std::string command;
  std::string config_path;
  std::vector<std::string> param_flags;
  std::vector<std::string> generator_flags;
  std::map<std::string, std::string> storage;
  std::map<std::string, CLI::Option*> options;

  std::string command_help = "command:";
  for (const auto& name : commands()) command_help += " " + name;
  app.add_option("command", command, command_help);
  app.add_option("--config", config_path, "JSON config; flags override its values");
  auto* param_opt = app.add_option("--param", param_flags, "functional parameter key=value (repeatable)");
  auto* generator_opt =
      app.add_option("--generator", generator_flags, "prior class generator measure (repeatable)");
  for (const auto& f : kFlags) options[f.name] = app.add_option(std::string("--") + f.name, storage[f.name], f.help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: ParseError: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw Error(ErrorKind::ParseError, "cannot open config '" + config_path + "'");
      cfg = load_config(in);
    }
    if (!command.empty()) cfg.command = command;
    for (const auto& [name, opt] : options) {
      if (opt->count() > 0) cfg.values[name] = storage[name];
    }
    if (param_opt->count() > 0) {
      for (const auto& kv : param_flags) {
        const auto [k, v] = split_param(kv);
        cfg.params[k] = v;
      }
    }
    if (generator_opt->count() > 0) cfg.generators = generator_flags;
    return dispatch(cfg, out, err);
  } catch (const Error& e) {
    err << "error: " << e.name() << ": " << e.what() << '\n';
    return is_validation_error(e.kind()) ? kExitValidation : kExitNumeric;
  }
}

}  // namespace affcalc::cli
