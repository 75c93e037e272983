#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "affcalc/error.hpp"
#include "affcalc/measures.hpp"

namespace affcalc {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_real(std::string_view text, std::string_view context) {
  text = trim(text);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw Error(ErrorKind::ParseError,
                "cannot parse real '" + std::string(text) + "' in " + std::string(context));
  }
  return value;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + path + "'");
  return in;
}

}  // namespace

std::vector<double> read_samples(std::istream& in) {
  std::vector<double> samples;
  std::string line;
  while (std::getline(in, line)) {
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    samples.push_back(parse_real(body, "sample file"));
  }
  return samples;
}

std::vector<double> read_samples_file(const std::string& path) {
  auto in = open_or_throw(path);
  return read_samples(in);
}

DiscreteMeasure read_measure_csv(std::istream& in, MeasureKind kind) {
  std::string line;
  bool header_seen = false;
  std::vector<std::pair<double, double>> atoms;
  while (std::getline(in, line)) {
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    if (!header_seen) {
      if (body != "location,weight") {
        throw Error(ErrorKind::ParseError, "measure CSV must start with 'location,weight'");
      }
      header_seen = true;
      continue;
    }
    const auto comma = body.find(',');
    if (comma == std::string_view::npos || body.find(',', comma + 1) != std::string_view::npos) {
      throw Error(ErrorKind::ParseError, "measure CSV row needs two columns: '" +
                                             std::string(body) + "'");
    }
    atoms.emplace_back(parse_real(body.substr(0, comma), "measure CSV"),
                       parse_real(body.substr(comma + 1), "measure CSV"));
  }
  if (atoms.empty()) throw Error(ErrorKind::ParseError, "measure CSV has no rows");
  return DiscreteMeasure(std::move(atoms), kind);
}

DiscreteMeasure read_measure_csv_file(const std::string& path, MeasureKind kind) {
  auto in = open_or_throw(path);
  return read_measure_csv(in, kind);
}

void write_measure_csv(std::ostream& out, const DiscreteMeasure& m) {
  out << "location,weight\n";
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    out << format_real(m.location(i)) << ',' << format_real(m.weight(i)) << '\n';
  }
}

DiscreteMeasure parse_measure_literal(std::string_view text, MeasureKind kind) {
  std::vector<std::pair<double, double>> atoms;
  text = trim(text);
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = trim(text.substr(0, comma));
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw Error(ErrorKind::ParseError,
                  "measure literal items are 'location:weight', got '" + std::string(item) + "'");
    }
    atoms.emplace_back(parse_real(item.substr(0, colon), "measure literal"),
                       parse_real(item.substr(colon + 1), "measure literal"));
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  if (atoms.empty()) throw Error(ErrorKind::ParseError, "empty measure literal");
  return DiscreteMeasure(std::move(atoms), kind);
}

std::string format_real(double value) {
  if (value == 0.0) value = 0.0;  // drop the sign of negative zero
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  std::string s(buf, ptr);
  if (std::isfinite(value) && s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

}  // namespace affcalc
