#ifndef AFFCALC_CLI_HPP
#define AFFCALC_CLI_HPP

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "affcalc/functionals.hpp"
#include "affcalc/measures.hpp"

namespace affcalc::cli {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumeric = 3;

/// Fully merged settings for one run: config file values overridden by flags.
/// Keys are the long flag names without dashes.
struct RunConfig {
  std::string command;
  std::map<std::string, std::string> values;
  /// Functional parameters given as key=value.
  std::map<std::string, std::string> params;
  /// Prior class generators (robust-range).
  std::vector<std::string> generators;

  bool has(const std::string& key) const { return values.count(key) > 0; }
  const std::string& require(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double real(const std::string& key, double fallback) const;
  double real(const std::string& key) const;
  long long integer(const std::string& key, long long fallback) const;
};

/// Commands understood by dispatch.
const std::vector<std::string>& commands();

/// Reads a JSON config object. Unknown keys are a ParseError.
RunConfig load_config(std::istream& in);

/// Builds a functional from its name and parameters. Unknown names or
/// parameters are a BadParameter.
FunctionalSpec parse_functional(std::string_view name,
                                const std::map<std::string, std::string>& params);

/// Measure from a CSV path when the file exists, otherwise from a
/// `loc:weight,...` literal.
DiscreteMeasure load_measure(const std::string& text);

/// `loc:weight,...` with full-precision numbers.
std::string measure_literal(const DiscreteMeasure& m);

/// Line-oriented report: lines of space-separated key=value fields, then an
/// optional CSV table after a blank line.
class Report {
 public:
  Report& line();
  Report& field(const std::string& key, const std::string& value);
  Report& field(const std::string& key, const char* value);
  Report& field(const std::string& key, double value);
  Report& field(const std::string& key, long long value);
  Report& field(const std::string& key, int value);
  Report& field(const std::string& key, bool value);
  Report& table(std::vector<std::string> header);
  Report& row(const std::vector<double>& values);
  std::string str() const;

 private:
  std::vector<std::vector<std::pair<std::string, std::string>>> lines_;
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

struct ParsedReport {
  std::map<std::string, std::string> fields;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Reads a report back; numeric table cells are parsed at full precision.
ParsedReport parse_report(std::string_view text);

/// Runs one command. The report goes to the --out file or to `out`;
/// diagnostics go to `err` as a single `error: <Kind>: <message>` line.
int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses flags (and an optional --config file) and dispatches.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace affcalc::cli

#endif  // AFFCALC_CLI_HPP
