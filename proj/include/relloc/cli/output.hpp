#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "relloc/cli/config.hpp"

namespace relloc::cli {

/// Numeric table; the first column is the domain variable.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ExperimentResult {
  std::string grid;  ///< short description of the domain grid
  std::vector<std::pair<std::string, double>> summary;
  std::vector<Table> tables;
};

/// '#' header block (version, resolved config, seed, grid, summary), then
/// each table as a comment line, a column line and rows in %.12e.
void write_csv(std::ostream& os, const ExperimentConfig& config, const ExperimentResult& result);

void write_json(std::ostream& os, const ExperimentConfig& config, const ExperimentResult& result);

/// Writes to config.out() ("-" is `fallback`) in config.format().
void emit(const ExperimentConfig& config, const ExperimentResult& result, std::ostream& fallback);

}  // namespace relloc::cli
