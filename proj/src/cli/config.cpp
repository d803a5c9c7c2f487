#include "relloc/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "relloc/errors.hpp"

namespace relloc::cli {

namespace {

std::vector<KeySpec> with_common(std::vector<KeySpec> keys) {
  keys.push_back({"seed", "1", "master RNG seed"});
  keys.push_back({"format", "csv", "csv or json"});
  keys.push_back({"out", "-", "output path, - for stdout"});
  keys.push_back({"threads", "0", "worker threads, 0 for all cores"});
  return keys;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

long parse_long(const std::string& key, const std::string& s) {
  long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ConfigurationError("key '" + key + "': expected an integer, got '" + s + "'");
  }
  return v;
}

}  // namespace

const std::vector<ExperimentSpec>& experiment_specs() {
  static const std::vector<ExperimentSpec> specs = {
      {"fock-phase",
       "phase densities |C_lr|^2 for count records, plus an optional sampled Fock trajectory",
       with_common({{"records", "1:0,5:0,15:0", "l:r count pairs, one density column each"},
                    {"grid", "1024", "phase grid points"},
                    {"fock_n", "0", "photons per mode for a sampled |N>|N> record, 0 to skip"},
                    {"events", "15", "detections in the sampled record"}})},
      {"poissonian-phase",
       "exact record probabilities and peak locations for two Poissonian inputs",
       with_common({{"eps", "0.2", "leakage fraction"},
                    {"nbar", "20", "mean photons per mode"},
                    {"kmax", "0", "largest total count, 0 for automatic"},
                    {"cutoff", "0", "per-mode Fock cutoff, 0 for automatic"}})},
      {"thermal-phase",
       "exact record probabilities for two thermal inputs against the closed form",
       with_common({{"eps", "0.1", "leakage fraction"},
                    {"nbar", "5", "mean photons per mode"},
                    {"kmax", "0", "largest total count, 0 for automatic"},
                    {"cutoff", "0", "per-mode Fock cutoff, 0 for automatic"}})},
      {"visibility-curves",
       "expected conditional visibility against leakage for Poissonian and thermal inputs",
       with_common({{"nbar", "5", "mean photons per mode"},
                    {"eps_min", "0.02", "first leakage value"},
                    {"eps_max", "0.98", "last leakage value"},
                    {"eps_points", "25", "number of leakage values"},
                    {"kmax", "0", "record cutoff, 0 for automatic"}})},
      {"bec-likely-events",
       "likely two-setting records for M detections per setting",
       with_common({{"M", "3", "detections per setting"},
                    {"nbar", "0", "condensate mean, 0 for automatic"},
                    {"grid", "1024", "phase grid points"}})},
      {"bec-fringes",
       "atom-by-atom fringe build-up from two Poissonian condensates",
       with_common({{"nbar", "2000", "mean atoms per condensate"},
                    {"events", "1000", "atoms detected"},
                    {"k", "2", "condensate momentum"},
                    {"cells", "20", "fringe periods spanned by the detector"},
                    {"grid", "1024", "phase grid points"},
                    {"bins", "32", "histogram bins per fringe"},
                    {"window", "30", "atoms in the early bootstrap fit"},
                    {"resamples", "400", "bootstrap resamples"}})},
      {"rubber-cavity",
       "relative mirror position after photon counts in a rubber cavity",
       with_common({{"records", "0:1,0:5,0:15", "l:r count pairs, one density column each"},
                    {"k", "5", "photon momentum"},
                    {"d", "0", "thermal spread (units 2pi/k), 0 for a uniform prior"},
                    {"wavelengths", "10", "region length (units 2pi/k)"},
                    {"grid", "4001", "separation grid points"}})},
      {"scattering",
       "relative position of two particles after forward/deflect photon outcomes",
       with_common({{"k", "5", "photon momentum"},
                    {"d", "0.2", "thermal spread (units 2pi/k)"},
                    {"events", "5", "photons scattered"},
                    {"eps", "0.01", "observer half-angle (rad)"},
                    {"wavelengths", "10", "region length (units 2pi/k)"},
                    {"grid", "2001", "separation grid points"},
                    {"samples", "1", "sampled outcome sequences to add"}})},
      {"thermal-scattering",
       "as scattering, with thermal wavepackets of mean photon number nbar",
       with_common({{"k", "5", "photon momentum"},
                    {"d", "0.2", "thermal spread (units 2pi/k)"},
                    {"events", "5", "wavepackets scattered"},
                    {"eps", "0.01", "observer half-angle (rad)"},
                    {"nbar", "5", "mean photons per wavepacket"},
                    {"wavelengths", "10", "region length (units 2pi/k)"},
                    {"grid", "2001", "separation grid points"},
                    {"samples", "1", "sampled outcome sequences to add"}})},
  };
  return specs;
}

const ExperimentSpec& find_experiment(std::string_view name) {
  for (const auto& s : experiment_specs()) {
    if (s.name == name) return s;
  }
  throw ConfigurationError("unknown experiment '" + std::string(name) + "'");
}

std::map<std::string, std::string> parse_config_text(std::string_view text) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigurationError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(body.substr(0, eq));
    std::string value = trim(body.substr(eq + 1));
    if (key.empty()) throw ConfigurationError("config line " + std::to_string(lineno) + ": empty key");
    if (!out.emplace(key, value).second) {
      throw ConfigurationError("config line " + std::to_string(lineno) + ": repeated key '" + key + "'");
    }
  }
  return out;
}

std::map<std::string, std::string> load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

ExperimentConfig::ExperimentConfig(std::string experiment, const std::map<std::string, std::string>& file_values,
                                   const std::map<std::string, std::string>& overrides)
    : experiment_(std::move(experiment)) {
  const auto& spec = find_experiment(experiment_);
  for (const auto& k : spec.keys) values_[k.key] = k.fallback;
  for (const auto* layer : {&file_values, &overrides}) {
    for (const auto& [key, value] : *layer) {
      auto it = values_.find(key);
      if (it == values_.end()) {
        throw ConfigurationError("experiment '" + experiment_ + "' does not accept key '" + key + "'");
      }
      it->second = value;
    }
  }
  seed();
  format();
}

std::uint64_t ExperimentConfig::seed() const {
  const std::string s = text("seed");
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ConfigurationError("seed must be an unsigned 64-bit integer, got '" + s + "'");
  }
  return v;
}

OutputFormat ExperimentConfig::format() const {
  const std::string f = text("format");
  if (f == "csv") return OutputFormat::csv;
  if (f == "json") return OutputFormat::json;
  throw ConfigurationError("format must be csv or json, got '" + f + "'");
}

std::string ExperimentConfig::out() const { return text("out"); }

std::string ExperimentConfig::text(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigurationError("missing key '" + key + "'");
  return it->second;
}

double ExperimentConfig::real(const std::string& key) const {
  const std::string s = text(key);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigurationError("key '" + key + "': expected a finite number, got '" + s + "'");
  }
  return v;
}

long ExperimentConfig::integer(const std::string& key) const { return parse_long(key, text(key)); }

double ExperimentConfig::real_in(const std::string& key, double lo, double hi, bool open_lo, bool open_hi) const {
  const double v = real(key);
  const bool ok_lo = open_lo ? v > lo : v >= lo;
  const bool ok_hi = open_hi ? v < hi : v <= hi;
  if (!ok_lo || !ok_hi) {
    std::ostringstream msg;
    msg << "key '" << key << "' = " << v << " lies outside " << (open_lo ? "(" : "[") << lo << ", " << hi
        << (open_hi ? ")" : "]");
    throw ConfigurationError(msg.str());
  }
  return v;
}

long ExperimentConfig::integer_at_least(const std::string& key, long lo) const {
  const long v = integer(key);
  if (v < lo) throw ConfigurationError("key '" + key + "' must be at least " + std::to_string(lo));
  return v;
}

std::vector<std::pair<long, long>> ExperimentConfig::count_pairs(const std::string& key) const {
  std::vector<std::pair<long, long>> out;
  for (const auto& item : split(text(key), ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigurationError("key '" + key + "': expected l:r, got '" + item + "'");
    const long l = parse_long(key, trim(item.substr(0, colon)));
    const long r = parse_long(key, trim(item.substr(colon + 1)));
    if (l < 0 || r < 0) throw ConfigurationError("key '" + key + "': counts must be nonnegative");
    out.emplace_back(l, r);
  }
  if (out.empty()) throw ConfigurationError("key '" + key + "' is empty");
  return out;
}

}  // namespace relloc::cli
