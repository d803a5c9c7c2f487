#include "relloc/cli/output.hpp"

#include <fmt/format.h>

#include <fstream>
#include <json.hpp>

#include "relloc/errors.hpp"
#include "relloc/version.hpp"

namespace relloc::cli {

namespace {

std::string number(double v) { return fmt::format("{:.12e}", v); }

}  // namespace

void write_csv(std::ostream& os, const ExperimentConfig& config, const ExperimentResult& result) {
  os << "# relloc " << kVersion << "\n";
  os << "# experiment = " << config.experiment() << "\n";
  for (const auto& [key, value] : config.values()) os << "# config " << key << " = " << value << "\n";
  os << "# seed = " << config.seed() << "\n";
  os << "# grid = " << result.grid << "\n";
  for (const auto& [key, value] : result.summary) os << "# summary " << key << " = " << number(value) << "\n";
  for (const auto& table : result.tables) {
    os << "# table " << table.name << "\n";
    for (std::size_t c = 0; c < table.columns.size(); ++c) os << (c ? "," : "") << table.columns[c];
    os << "\n";
    for (const auto& row : table.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << number(row[c]);
      os << "\n";
    }
  }
}

void write_json(std::ostream& os, const ExperimentConfig& config, const ExperimentResult& result) {
  nlohmann::ordered_json doc;
  doc["version"] = kVersion;
  doc["experiment"] = config.experiment();
  doc["config"] = config.values();
  doc["seed"] = config.seed();
  doc["grid"] = result.grid;
  auto& summary = doc["summary"] = nlohmann::ordered_json::object();
  for (const auto& [key, value] : result.summary) summary[key] = value;
  auto& tables = doc["tables"] = nlohmann::ordered_json::array();
  for (const auto& table : result.tables) {
    tables.push_back({{"name", table.name}, {"columns", table.columns}, {"rows", table.rows}});
  }
  os << doc.dump(2) << "\n";
}

void emit(const ExperimentConfig& config, const ExperimentResult& result, std::ostream& fallback) {
  std::ofstream file;
  std::ostream* os = &fallback;
  if (config.out() != "-") {
    file.open(config.out(), std::ios::binary);
    if (!file) throw ConfigurationError("cannot open output file '" + config.out() + "'");
    os = &file;
  }
  if (config.format() == OutputFormat::json) {
    write_json(*os, config, result);
  } else {
    write_csv(*os, config, result);
  }
  os->flush();
  if (!*os) throw std::runtime_error("failed writing output");
}

}  // namespace relloc::cli
