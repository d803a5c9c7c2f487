#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace relloc::cli {

enum class OutputFormat { csv, json };

struct KeySpec {
  std::string key;
  std::string fallback;
  std::string help;
};

/// Keys an experiment accepts, with their default values.
struct ExperimentSpec {
  std::string name;
  std::string summary;
  std::vector<KeySpec> keys;
};

const std::vector<ExperimentSpec>& experiment_specs();
const ExperimentSpec& find_experiment(std::string_view name);

/// Flat `key = value` lines; '#' starts a comment. Throws ConfigurationError
/// on malformed lines or repeated keys.
std::map<std::string, std::string> parse_config_text(std::string_view text);
std::map<std::string, std::string> load_config_file(const std::string& path);

/// Fully resolved run: every accepted key carries a value.
class ExperimentConfig {
 public:
  /// Defaults, then `file_values`, then `overrides`. Unknown keys throw
  /// ConfigurationError.
  ExperimentConfig(std::string experiment, const std::map<std::string, std::string>& file_values,
                   const std::map<std::string, std::string>& overrides);

  const std::string& experiment() const { return experiment_; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::uint64_t seed() const;
  OutputFormat format() const;
  std::string out() const;

  std::string text(const std::string& key) const;
  double real(const std::string& key) const;
  long integer(const std::string& key) const;

  /// Real in [lo, hi] (inclusive ends unless `open_lo` / `open_hi`).
  double real_in(const std::string& key, double lo, double hi, bool open_lo = false, bool open_hi = false) const;
  long integer_at_least(const std::string& key, long lo) const;

  /// "l:r,l:r,..." pairs.
  std::vector<std::pair<long, long>> count_pairs(const std::string& key) const;

 private:
  std::string experiment_;
  std::map<std::string, std::string> values_;
};

}  // namespace relloc::cli
