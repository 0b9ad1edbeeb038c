#pragma once

// Signal files and measure configs.
//
// Signal file: first line is n, followed by n lines "re,im", each value
// printed with 17 significant digits so a write/read cycle is lossless.
//
// Measure config (JSON):
//   {"locations": [...], "intensities": [...], "r": 2, "n": 64,
//    "alpha": 0.1, "noise_kind": "complex_gaussian", "seed": 7}

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "specest/error.hpp"
#include "specest/signal_model.hpp"

namespace specest {

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_signal(std::ostream& os, const MeasurementSeries& g) {
  os << g.n() << '\n';
  for (const auto& s : g.samples) os << format_double(s.real()) << ',' << format_double(s.imag()) << '\n';
}

inline void write_signal_file(const std::string& path, const MeasurementSeries& g) {
  std::ofstream os(path);
  if (!os) throw Error(Errc::IoError, "cannot open '" + path + "' for writing");
  write_signal(os, g);
  if (!os) throw Error(Errc::IoError, "write failed for '" + path + "'");
}

namespace detail {

inline double parse_number(const std::string& tok, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
  if (used == 0 || used != tok.size() || !std::isfinite(v))
    throw Error(Errc::ParseError, "line " + std::to_string(line) + ": bad number '" + tok + "'");
  return v;
}

}  // namespace detail

inline MeasurementSeries read_signal(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(Errc::ParseError, "empty signal file");
  long long n = 0;
  try {
    std::size_t used = 0;
    n = std::stoll(line, &used);
    if (used != line.size() && line.find_first_not_of(" \t\r", used) != std::string::npos)
      throw Error(Errc::ParseError, "trailing text after n");
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw Error(Errc::ParseError, "first line must be the sample count");
  }
  if (n < 1) throw Error(Errc::ParseError, "sample count must be positive");

  MeasurementSeries g;
  g.samples.reserve(static_cast<std::size_t>(n));
  for (long long j = 0; j < n; ++j) {
    if (!std::getline(is, line))
      throw Error(Errc::ParseError, "truncated: expected " + std::to_string(n) + " samples, got " + std::to_string(j));
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(Errc::ParseError, "line " + std::to_string(j + 2) + ": expected re,im");
    const auto ln = static_cast<std::size_t>(j + 2);
    g.samples.emplace_back(detail::parse_number(line.substr(0, comma), ln),
                           detail::parse_number(line.substr(comma + 1), ln));
  }
  while (std::getline(is, line))
    if (line.find_first_not_of(" \t\r") != std::string::npos)
      throw Error(Errc::ParseError, "extra data after " + std::to_string(n) + " samples");
  return g;
}

inline MeasurementSeries read_signal_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(Errc::IoError, "cannot open '" + path + "'");
  return read_signal(is);
}

struct MeasureConfig {
  std::vector<double> locations;
  std::vector<double> intensities;
  std::size_t r = 1;
  std::size_t n = 0;
  NoiseSpec noise;

  SpectralMeasure measure() const { return SpectralMeasure::create(locations, intensities, r); }
};

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw Error(Errc::ConfigInvalid, std::string("missing field '") + key + "'");
  return j.at(key);
}

template <class T>
T get_field(const nlohmann::json& j, const char* key) {
  try {
    return require(j, key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(Errc::ConfigInvalid, std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace detail

/// Parses and validates a measure config. `require_n` is false for scaling
/// configs, which carry an n grid instead.
inline MeasureConfig parse_measure_config(const nlohmann::json& j, bool require_n = true) {
  if (!j.is_object()) throw Error(Errc::ConfigInvalid, "config must be a JSON object");
  MeasureConfig c;
  c.locations = detail::get_field<std::vector<double>>(j, "locations");
  c.intensities = detail::get_field<std::vector<double>>(j, "intensities");
  const auto r = detail::get_field<long long>(j, "r");
  if (r < 1 || static_cast<std::size_t>(r) > c.locations.size())
    throw Error(Errc::ConfigInvalid, "field 'r' must satisfy 1 <= r <= number of locations");
  c.r = static_cast<std::size_t>(r);
  if (require_n || j.contains("n")) {
    const auto n = detail::get_field<long long>(j, "n");
    if (n < 1) throw Error(Errc::ConfigInvalid, "field 'n' must be positive");
    c.n = static_cast<std::size_t>(n);
  }
  c.noise.alpha = j.contains("alpha") ? detail::get_field<double>(j, "alpha") : 0.0;
  if (!(c.noise.alpha >= 0.0)) throw Error(Errc::ConfigInvalid, "field 'alpha' must be non-negative");
  c.noise.kind = j.contains("noise_kind") ? parse_noise_kind(detail::get_field<std::string>(j, "noise_kind"))
                                          : (c.noise.alpha > 0.0 ? NoiseKind::complex_gaussian : NoiseKind::none);
  c.noise.seed = j.contains("seed") ? detail::get_field<std::uint64_t>(j, "seed") : 0;
  try {
    (void)c.measure();
  } catch (const Error& e) {
    throw Error(Errc::ConfigInvalid, e.what());
  }
  return c;
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(Errc::IoError, "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ConfigInvalid, std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace specest
