#include "relloc/cli/runner.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "relloc/cli/config.hpp"
#include "relloc/cli/experiments.hpp"
#include "relloc/cli/output.hpp"
#include "relloc/errors.hpp"
#include "relloc/version.hpp"

namespace relloc::cli {

namespace {

struct Flags {
  std::string config_path;
  std::vector<std::string> sets;
  std::map<std::string, std::optional<std::string>> named;
};

// Flag name -> config key.
const std::vector<std::pair<std::string, std::string>> kNamedFlags = {
    {"--seed", "seed"},   {"--out", "out"},         {"--format", "format"}, {"--eps", "eps"},
    {"--nbar", "nbar"},   {"--fock-n", "fock_n"},   {"--k", "k"},           {"--d", "d"},
    {"--events", "events"}, {"--cutoff", "cutoff"}, {"--grid", "grid"},
};

int report(std::ostream& err, int code, const std::string& kind, const std::string& message) {
  nlohmann::ordered_json e;
  e["error"] = kind;
  e["message"] = message;
  e["exit_code"] = code;
  err << e.dump() << "\n";
  return code;
}

std::map<std::string, std::string> overrides_from(const Flags& f) {
  std::map<std::string, std::string> out;
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigurationError("--set expects key=value, got '" + s + "'");
    out[s.substr(0, eq)] = s.substr(eq + 1);
  }
  for (const auto& [key, value] : f.named) {
    if (value) out[key] = *value;
  }
  return out;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Measurement-induced relative localization experiments", "relloc"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::map<std::string, Flags> flags;
  for (const auto& spec : experiment_specs()) {
    auto* sub = app.add_subcommand(spec.name, spec.summary);
    auto& f = flags[spec.name];
    sub->add_option("--config", f.config_path, "flat key = value config file");
    sub->add_option("--set", f.sets, "override any key, key=value (repeatable)");
    for (const auto& [flag, key] : kNamedFlags) {
      auto& slot = f.named[key];
      sub->add_option(flag, slot, "sets config key '" + key + "'");
    }
    std::ostringstream keys;
    for (const auto& k : spec.keys) keys << "\n  " << k.key << " = " << k.fallback << "  (" << k.help << ")";
    sub->footer("Config keys and defaults:" + keys.str());
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests also arrive here, with exit code 0.
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    return report(err, kExitConfig, "usage", e.what());
  }

  const auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    const auto& f = flags.at(name);
    const auto file_values =
        f.config_path.empty() ? std::map<std::string, std::string>{} : load_config_file(f.config_path);
    const ExperimentConfig config(name, file_values, overrides_from(f));
    emit(config, run_experiment(config), out);
  } catch (const CutoffOverflow& e) {
    return report(err, kExitCutoff, "cutoff_overflow", e.what());
  } catch (const NumericalValidationError& e) {
    return report(err, kExitNumerical, "numerical_validation", e.what());
  } catch (const std::invalid_argument& e) {
    return report(err, kExitConfig, "configuration", e.what());
  } catch (const std::domain_error& e) {
    return report(err, kExitConfig, "configuration", e.what());
  } catch (const std::exception& e) {
    return report(err, kExitFailure, "runtime", e.what());
  }
  return kExitOk;
}

}  // namespace relloc::cli
