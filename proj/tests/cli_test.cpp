#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "relloc/cli/config.hpp"
#include "relloc/cli/runner.hpp"
#include "relloc/errors.hpp"

using namespace relloc;
using namespace relloc::cli;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "relloc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

// Comment and header lines must match exactly; numeric cells to 1e-9 relative.
void compare_csv(const std::string& got, const std::string& want) {
  const auto a = lines_of(got), b = lines_of(want);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) continue;
    INFO("line " << i + 1 << ": " << a[i] << " vs " << b[i]);
    REQUIRE(a[i][0] != '#');
    std::istringstream sa(a[i]), sb(b[i]);
    std::string ca, cb;
    while (std::getline(sa, ca, ',')) {
      REQUIRE(std::getline(sb, cb, ','));
      const double x = std::stod(ca), y = std::stod(cb);
      if (std::isnan(x) || std::isnan(y)) {
        CHECK(std::isnan(x) == std::isnan(y));
      } else {
        CHECK(std::fabs(x - y) <= 1e-9 * std::max(1.0, std::fabs(y)));
      }
    }
  }
}

struct Csv {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

Csv first_table(const std::string& text) {
  Csv c;
  bool header = false;
  for (const auto& line : lines_of(text)) {
    if (line.rfind("# table", 0) == 0) {
      if (header) break;
      header = true;
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    std::istringstream in(line);
    std::string cell;
    if (c.columns.empty()) {
      while (std::getline(in, cell, ',')) c.columns.push_back(cell);
    } else {
      std::vector<double> row;
      while (std::getline(in, cell, ',')) row.push_back(std::stod(cell));
      c.rows.push_back(row);
    }
  }
  return c;
}

const char* const kExperiments[] = {"fock-phase",        "poissonian-phase", "thermal-phase",
                                    "visibility-curves", "bec-likely-events", "bec-fringes",
                                    "rubber-cavity",     "scattering",       "thermal-scattering"};

}  // namespace

TEST_CASE("config text parsing") {
  auto v = parse_config_text("# comment\n eps = 0.1 \n\nnbar=5 # trailing\n");
  CHECK(v.size() == 2);
  CHECK(v.at("eps") == "0.1");
  CHECK(v.at("nbar") == "5");
  CHECK_THROWS_AS(parse_config_text("eps 0.1\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_config_text("eps = 1\neps = 2\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_config_text(" = 2\n"), ConfigurationError);
  CHECK_THROWS_AS(load_config_file("/nonexistent/relloc.cfg"), ConfigurationError);
}

TEST_CASE("resolved config layering and validation") {
  ExperimentConfig c("thermal-phase", {{"eps", "0.3"}, {"nbar", "2"}}, {{"eps", "0.4"}});
  CHECK(c.real("eps") == 0.4);
  CHECK(c.real("nbar") == 2.0);
  CHECK(c.integer("kmax") == 0);
  CHECK(c.seed() == 1);
  CHECK(c.format() == OutputFormat::csv);
  CHECK_THROWS_AS(ExperimentConfig("thermal-phase", {{"k", "5"}}, {}), ConfigurationError);
  CHECK_THROWS_AS(ExperimentConfig("no-such", {}, {}), ConfigurationError);
  CHECK_THROWS_AS(ExperimentConfig("scattering", {}, {{"seed", "-4"}}), ConfigurationError);
  CHECK_THROWS_AS(ExperimentConfig("scattering", {}, {{"format", "xml"}}), ConfigurationError);

  ExperimentConfig s("scattering", {}, {{"eps", "abc"}, {"seed", "18446744073709551615"}});
  CHECK(s.seed() == 18446744073709551615ULL);
  CHECK_THROWS_AS(s.real("eps"), ConfigurationError);
  CHECK_THROWS_AS(s.real_in("k", 0.0, 1.0), ConfigurationError);

  ExperimentConfig r("rubber-cavity", {}, {{"records", "1:2, 0:5"}});
  auto pairs = r.count_pairs("records");
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0] == std::pair<long, long>{1, 2});
  ExperimentConfig bad("rubber-cavity", {}, {{"records", "1-2"}});
  CHECK_THROWS_AS(bad.count_pairs("records"), ConfigurationError);

  for (const auto& spec : experiment_specs()) {
    CHECK_NOTHROW(ExperimentConfig(spec.name, {}, {}));
  }
  CHECK(experiment_specs().size() == 9);
}

TEST_CASE("exit codes and error objects") {
  auto r = invoke({"scattering", "--eps", "0.7"});
  CHECK(r.code == kExitConfig);
  auto err = nlohmann::json::parse(r.err);
  CHECK(err["exit_code"] == 2);
  CHECK(err["error"] == "configuration");

  CHECK(invoke({"scattering", "--fock-n", "3"}).code == kExitConfig);
  CHECK(invoke({"thermal-phase", "--set", "bogus=1"}).code == kExitConfig);
  CHECK(invoke({"thermal-phase", "--set", "novalue"}).code == kExitConfig);
  CHECK(invoke({}).code == kExitConfig);
  CHECK(invoke({"fock-phase", "--grid", "x"}).code == kExitConfig);

  auto cut = invoke({"poissonian-phase", "--cutoff", "10"});
  CHECK(cut.code == kExitCutoff);
  CHECK(nlohmann::json::parse(cut.err)["error"] == "cutoff_overflow");
  CHECK(invoke({"bec-fringes", "--nbar", "50", "--events", "80"}).code == kExitCutoff);

  auto help = invoke({"scattering", "--help"});
  CHECK(help.code == kExitOk);
  CHECK(help.out.find("wavelengths") != std::string::npos);
}

TEST_CASE("flags override config files") {
  const auto path = std::filesystem::temp_directory_path() / "relloc_cli_test.cfg";
  {
    std::ofstream f(path);
    f << "eps = 0.3\nnbar = 2\nkmax = 2\n";
  }
  auto r = invoke({"thermal-phase", "--config", path.string(), "--eps", "0.25"});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("# config eps = 0.25\n") != std::string::npos);
  CHECK(r.out.find("# config nbar = 2\n") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("golden outputs") {
  const std::filesystem::path dir = RELLOC_TEST_DATA_DIR;
  for (const char* name : kExperiments) {
    INFO(name);
    auto r = invoke({name, "--config", (dir / (std::string(name) + ".cfg")).string()});
    REQUIRE(r.code == kExitOk);
    compare_csv(r.out, slurp(dir / (std::string(name) + ".csv")));
  }
}

TEST_CASE("density columns integrate to one") {
  const std::filesystem::path dir = RELLOC_TEST_DATA_DIR;
  for (const char* name : {"fock-phase", "rubber-cavity", "scattering", "thermal-scattering"}) {
    INFO(name);
    auto r = invoke({name, "--config", (dir / (std::string(name) + ".cfg")).string()});
    REQUIRE(r.code == kExitOk);
    const auto t = first_table(r.out);
    REQUIRE(t.rows.size() > 2);
    const double h = t.rows[1][0] - t.rows[0][0];
    const bool periodic = std::string(name) == "fock-phase";
    for (std::size_t c = 1; c < t.columns.size(); ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const bool edge = i == 0 || i + 1 == t.rows.size();
        s += (!periodic && edge ? 0.5 : 1.0) * t.rows[i][c];
      }
      CHECK(s * h == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("json mirrors csv") {
  const std::filesystem::path dir = RELLOC_TEST_DATA_DIR;
  auto csv = invoke({"bec-likely-events", "--config", (dir / "bec-likely-events.cfg").string()});
  auto js = invoke({"bec-likely-events", "--config", (dir / "bec-likely-events.cfg").string(), "--format", "json"});
  REQUIRE(js.code == kExitOk);
  auto doc = nlohmann::json::parse(js.out);
  CHECK(doc["experiment"] == "bec-likely-events");
  CHECK(doc["config"]["M"] == "2");
  CHECK(doc["version"] == "0.1.0");
  const auto t = first_table(csv.out);
  const auto& rows = doc["tables"][0]["rows"];
  REQUIRE(rows.size() == t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    CHECK(rows[i][5].get<double>() == doctest::Approx(t.rows[i][5]).epsilon(1e-11));
  }
}

TEST_CASE("reruns are byte-identical") {
  const std::filesystem::path dir = RELLOC_TEST_DATA_DIR;
  const auto tmp = std::filesystem::temp_directory_path();
  for (const char* name : {"bec-fringes", "scattering", "fock-phase"}) {
    INFO(name);
    const auto cfg = (dir / (std::string(name) + ".cfg")).string();
    const auto path = tmp / (std::string("relloc_rerun_") + name + ".json");
    const std::string cmd = std::string(RELLOC_TOOL_PATH) + " " + name + " --config " + cfg +
                            " --seed 99 --format json --out " + path.string();
    REQUIRE(std::system(cmd.c_str()) == 0);
    const auto first = slurp(path);
    REQUIRE(std::system(cmd.c_str()) == 0);
    CHECK(!first.empty());
    CHECK(first == slurp(path));
    std::filesystem::remove(path);
  }
}

TEST_CASE("thread count does not change results") {
  const std::filesystem::path dir = RELLOC_TEST_DATA_DIR;
  const auto strip = [](const std::string& text) {
    std::string out;
    for (const auto& line : lines_of(text)) {
      if (line.rfind("# config threads", 0) != 0) out += line + "\n";
    }
    return out;
  };
  for (const char* name : {"scattering", "visibility-curves"}) {
    const auto cfg = (dir / (std::string(name) + ".cfg")).string();
    auto one = invoke({name, "--config", cfg, "--set", "threads=1"});
    auto four = invoke({name, "--config", cfg, "--set", "threads=4"});
    REQUIRE(one.code == kExitOk);
    CHECK(strip(one.out) == strip(four.out));
  }
}
