#include "relloc/cli/experiments.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>

#include "relloc/bec.hpp"
#include "relloc/errors.hpp"
#include "relloc/focksim.hpp"
#include "relloc/phaseloc.hpp"
#include "relloc/posloc.hpp"
#include "relloc/trajectory.hpp"
#include "relloc/visibility.hpp"

namespace relloc::cli {

namespace {

using numkernel::Grid1D;
using numkernel::kPi;
using numkernel::kTwoPi;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string describe(const std::string& var, const Grid1D& g) {
  return fmt::format("{} {} {} points on [{:.12e}, {:.12e}{}", var, g.size(), g.periodic() ? "periodic" : "closed",
                     g.lo(), g.hi(), g.periodic() ? ")" : "]");
}

unsigned threads_of(const ExperimentConfig& cfg) {
  return static_cast<unsigned>(cfg.integer_at_least("threads", 0));
}

std::size_t grid_points(const ExperimentConfig& cfg, long minimum = 8) {
  return static_cast<std::size_t>(cfg.integer_at_least("grid", minimum));
}

Table density_table(const std::string& name, const std::string& var, const Grid1D& grid,
                    const std::vector<std::string>& labels, const std::vector<std::vector<double>>& columns) {
  Table t{name, {var}, {}};
  t.columns.insert(t.columns.end(), labels.begin(), labels.end());
  t.rows.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto& row = t.rows[i];
    row.push_back(grid[i]);
    for (const auto& c : columns) row.push_back(c[i]);
  }
  return t;
}

std::string record_label(long l, long r) { return fmt::format("l{}_r{}", l, r); }

ExperimentResult fock_phase(const ExperimentConfig& cfg) {
  const Grid1D grid = Grid1D::phase(grid_points(cfg));
  const auto pairs = cfg.count_pairs("records");
  const long fock_n = cfg.integer_at_least("fock_n", 0);
  const long events = cfg.integer_at_least("events", 0);

  ExperimentResult res;
  res.grid = describe("delta", grid);
  std::vector<std::string> labels;
  std::vector<std::vector<double>> cols;
  for (auto [l, r] : pairs) {
    const auto d = phaseloc::clr_density({l, r, 0.0}, grid);
    labels.push_back(record_label(l, r));
    cols.emplace_back(d.weights().begin(), d.weights().end());
    if (l + r > 0) res.summary.emplace_back(record_label(l, r) + "_peak", d.argmax_location());
  }
  if (fock_n > 0) {
    if (events > 2 * fock_n) throw ConfigurationError("events exceed the photons available in |N>|N>");
    const auto ens = focksim::MixedEnsemble::fock(fock_n, fock_n);
    // A single Fock member: leakage only scales the record weight.
    const auto traj = focksim::sample_record(ens, 0.5, events, focksim::TauPolicy::fixed, cfg.seed());
    const auto d = focksim::posterior_phase_density(ens, 0.5, traj.events, grid);
    long left = 0;
    for (const auto& e : traj.events) left += e.detector == focksim::Port::left;
    labels.push_back("sampled");
    cols.emplace_back(d.weights().begin(), d.weights().end());
    res.summary.emplace_back("sampled_l", static_cast<double>(left));
    res.summary.emplace_back("sampled_r", static_cast<double>(events - left));
    res.summary.emplace_back("sampled_peak", d.argmax_location());
  }
  res.tables.push_back(density_table("densities", "delta", grid, labels, cols));
  return res;
}

struct RecordSweep {
  double eps;
  double nbar;
  long kmax;
  std::vector<focksim::RecordStats> records;
};

RecordSweep enumerate(const ExperimentConfig& cfg, focksim::EnsembleKind kind) {
  RecordSweep s;
  s.eps = cfg.real_in("eps", 0.0, 1.0, true, true);
  s.nbar = cfg.real_in("nbar", 0.0, 1e4, true);
  const long cutoff = cfg.integer_at_least("cutoff", 0);
  s.kmax = cfg.integer_at_least("kmax", 0);
  const bool poisson = kind == focksim::EnsembleKind::poissonian;
  if (s.kmax == 0) {
    s.kmax = poisson ? phaseloc::poissonian_record_cutoff(s.nbar, s.eps) : phaseloc::thermal_record_cutoff(s.nbar, s.eps);
  }
  const auto ens = poisson ? focksim::MixedEnsemble::poissonian(s.nbar, cutoff)
                           : focksim::MixedEnsemble::thermal(s.nbar, cutoff);
  s.records = focksim::enumerate_records(ens, s.eps, s.kmax);
  return s;
}

ExperimentResult record_experiment(const ExperimentConfig& cfg, focksim::EnsembleKind kind) {
  const auto s = enumerate(cfg, kind);
  const bool poisson = kind == focksim::EnsembleKind::poissonian;
  ExperimentResult res;
  res.grid = fmt::format("records l + r <= {}", s.kmax);
  Table t{"records", {"delta0", "l", "r", "probability", "closed_form"}, {}};
  std::map<long, double> by_total;
  double total = 0.0, worst = 0.0;
  for (const auto& rec : s.records) {
    const double closed = poisson ? phaseloc::plr_fock_approx(rec.l, rec.r, s.nbar, s.eps)
                                  : phaseloc::plr_thermal(rec.l, rec.r, s.nbar, s.eps);
    worst = std::max(worst, std::fabs(rec.probability - closed));
    const double delta0 = rec.l + rec.r > 0 ? phaseloc::localization_peaks({rec.l, rec.r, 0.0}).delta0 : kNaN;
    t.rows.push_back({delta0, static_cast<double>(rec.l), static_cast<double>(rec.r), rec.probability, closed});
    by_total[rec.l + rec.r] += rec.probability;
    total += rec.probability;
  }
  if (worst > 1e-8) {
    throw NumericalValidationError(fmt::format("enumerated record law deviates from the closed form by {:.3e}", worst));
  }
  const auto mode = std::max_element(by_total.begin(), by_total.end(),
                                     [](const auto& a, const auto& b) { return a.second < b.second; });
  res.summary = {{"eps", s.eps},
                 {"nbar", s.nbar},
                 {"total_probability", total},
                 {"max_abs_deviation", worst},
                 {"most_likely_total", static_cast<double>(mode->first)}};
  res.tables.push_back(std::move(t));
  return res;
}

ExperimentResult visibility_curves(const ExperimentConfig& cfg) {
  const double nbar = cfg.real_in("nbar", 0.0, 1e4, true);
  const double lo = cfg.real_in("eps_min", 0.0, 1.0, true, true);
  const double hi = cfg.real_in("eps_max", lo, 1.0, false, true);
  const long points = cfg.integer_at_least("eps_points", 2);
  const long kmax = cfg.integer_at_least("kmax", 0);
  const Grid1D grid(lo, hi, static_cast<std::size_t>(points), false);
  const auto rows = parallel_map(
      grid.size(),
      [&](std::size_t i) {
        const double eps = grid[i];
        return std::vector<double>{eps, visibility::expected_visibility(focksim::EnsembleKind::poissonian, eps, nbar, kmax),
                                   visibility::expected_visibility(focksim::EnsembleKind::thermal, eps, nbar, kmax)};
      },
      threads_of(cfg));
  ExperimentResult res;
  res.grid = describe("eps", grid);
  res.summary = {{"nbar", nbar}};
  res.tables.push_back({"expected_visibility", {"eps", "poissonian", "thermal"}, rows});
  return res;
}

ExperimentResult bec_likely(const ExperimentConfig& cfg) {
  const long M = cfg.integer_at_least("M", 1);
  const double nbar = cfg.real_in("nbar", 0.0, 1e5);
  const Grid1D grid = Grid1D::phase(grid_points(cfg));
  const auto ev = bec::likely_events(M, grid, nbar);
  ExperimentResult res;
  res.grid = describe("delta", grid);
  res.summary = {{"M", static_cast<double>(M)},
                 {"nbar", ev.nbar},
                 {"threshold", ev.threshold},
                 {"total_probability", ev.total_probability},
                 {"likely_mass", ev.likely_mass},
                 {"likely_count", static_cast<double>(ev.events.size())}};
  Table t{"likely_events", {"peak", "l1", "r1", "l2", "r2", "probability", "std_dev", "halfwidth", "unique_peak"}, {}};
  for (const auto& e : ev.events) {
    t.rows.push_back({e.peak, static_cast<double>(e.record.l1), static_cast<double>(e.record.r1),
                      static_cast<double>(e.record.l2), static_cast<double>(e.record.r2), e.probability, e.std_dev,
                      e.halfwidth, e.unique_peak ? 1.0 : 0.0});
  }
  res.tables.push_back(std::move(t));
  return res;
}

ExperimentResult bec_fringes(const ExperimentConfig& cfg) {
  const double nbar = cfg.real_in("nbar", 0.0, 1e7, true);
  const long atoms = cfg.integer_at_least("events", 1);
  const double k = cfg.real_in("k", 0.0, 1e6, true);
  const long cells = cfg.integer_at_least("cells", 1);
  const int bins = static_cast<int>(cfg.integer_at_least("bins", 4));
  const long window = std::min(cfg.integer_at_least("window", 2), atoms);
  const int resamples = static_cast<int>(cfg.integer_at_least("resamples", 10));
  const auto run = bec::simulate_fringes(nbar, atoms, k, cfg.seed(), cells, grid_points(cfg));
  const auto xs = run.positions();
  const auto fit = bec::fit_fringes(xs, k, bins);
  const std::span<const double> early(xs.data(), static_cast<std::size_t>(window));
  const auto boot = bec::bootstrap_visibility(early, k, cfg.seed() ^ 0x9e3779b97f4a7c15ULL, resamples, bins);

  long first_narrow = 0;
  for (std::size_t i = 0; i < run.timeline.size(); ++i) {
    if (run.timeline[i].std_dev < 0.4) {
      first_narrow = static_cast<long>(i) + 1;
      break;
    }
  }
  ExperimentResult res;
  res.grid = fmt::format("atoms 1..{}; posterior on {} phase points", atoms, grid_points(cfg));
  res.summary = {{"initial_n", static_cast<double>(run.initial_n)},
                 {"initial_m", static_cast<double>(run.initial_m)},
                 {"fit_visibility", fit.visibility},
                 {"fit_delta0", fit.delta0},
                 {"window_atoms", static_cast<double>(window)},
                 {"window_std_dev", run.timeline[static_cast<std::size_t>(window) - 1].std_dev},
                 {"window_visibility", boot.estimate},
                 {"window_visibility_lo", boot.lo},
                 {"window_visibility_hi", boot.hi},
                 {"first_atom_std_below_0.4", static_cast<double>(first_narrow)}};
  Table t{"atoms", {"atom", "x", "left_port", "posterior_peak", "posterior_std_dev"}, {}};
  for (std::size_t i = 0; i < run.events.size(); ++i) {
    t.rows.push_back({static_cast<double>(i + 1), run.events[i].x, run.events[i].port == focksim::Port::left ? 1.0 : 0.0,
                      run.timeline[i].peak, run.timeline[i].std_dev});
  }
  res.tables.push_back(std::move(t));
  return res;
}

struct Region {
  double k;
  double wave;
  double length;
  Grid1D grid;
};

Region region_of(const ExperimentConfig& cfg) {
  const double k = cfg.real_in("k", 0.0, 1e6, true);
  const double wave = kTwoPi / k;
  const double length = cfg.real_in("wavelengths", 0.0, 1e6, true) * wave;
  return {k, wave, length, posloc::separation_grid(0.0, length, grid_points(cfg, 3))};
}

ExperimentResult rubber_cavity(const ExperimentConfig& cfg) {
  const auto reg = region_of(cfg);
  const double d = cfg.real_in("d", 0.0, 1e6);
  const auto prior = d > 0.0 ? posloc::thermal_prior(0.0, reg.length, d * reg.wave, reg.grid)
                             : posloc::uniform_prior(reg.grid);
  ExperimentResult res;
  res.grid = describe("dr", reg.grid);
  res.summary = {{"comb_period", kPi * std::sqrt(2.0) / reg.k}};
  std::vector<std::string> labels;
  std::vector<std::vector<double>> cols;
  for (auto [l, r] : cfg.count_pairs("records")) {
    const auto p = posloc::rubber_cavity_localize(prior, l, r, reg.k);
    labels.push_back(record_label(l, r));
    cols.emplace_back(p.values().begin(), p.values().end());
    res.summary.emplace_back(record_label(l, r) + "_peak_spacing", p.mean_peak_spacing());
  }
  res.tables.push_back(density_table("densities", "dr", reg.grid, labels, cols));
  return res;
}

ExperimentResult scattering(const ExperimentConfig& cfg, bool thermal_light) {
  const auto reg = region_of(cfg);
  const double d = cfg.real_in("d", 0.0, 1e6, true);
  const long events = cfg.integer_at_least("events", 1);
  const double eps = cfg.real_in("eps", 0.0, 0.5, false, true);
  const long samples = cfg.integer_at_least("samples", 0);
  const double nbar = thermal_light ? cfg.real_in("nbar", 0.0, 1e3, true) : 0.0;
  const auto prior = posloc::thermal_prior(0.0, reg.length, d * reg.wave, reg.grid);
  using posloc::ScatterOutcome;
  const auto kernel = [&](ScatterOutcome o) {
    return thermal_light ? posloc::thermal_scatter_kernel(reg.grid, o, reg.k, eps, nbar)
                         : posloc::scatter_kernel(reg.grid, o, reg.k, eps);
  };
  const auto fwd = kernel(ScatterOutcome::forward);
  const auto dfl = kernel(ScatterOutcome::deflect);

  ExperimentResult res;
  res.grid = describe("dr", reg.grid);
  std::vector<std::string> labels;
  std::vector<std::vector<double>> cols;
  for (long f = events; f >= 0; --f) {
    std::vector<double> w(prior.values().begin(), prior.values().end());
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] *= std::pow(fwd[i], static_cast<double>(f)) * std::pow(dfl[i], static_cast<double>(events - f));
    }
    const double mass = reg.grid.integrate(w);
    const std::string label = fmt::format("F{}_D{}", f, events - f);
    const double multiplicity = std::exp(numkernel::log_binomial(events, f));
    res.summary.emplace_back("probability_" + label, multiplicity * mass);
    if (mass > 0.0) {
      for (double& v : w) v /= mass;
    }
    labels.push_back(label);
    cols.push_back(std::move(w));
  }
  const auto runs = parallel_map(
      static_cast<std::size_t>(samples),
      [&](std::size_t s) {
        return std::optional(posloc::sample_scattering(prior, events, reg.k, eps, nbar, cfg.seed(), s));
      },
      threads_of(cfg));
  for (std::size_t s = 0; s < runs.size(); ++s) {
    const auto label = fmt::format("sample{}", s);
    labels.push_back(label);
    cols.emplace_back(runs[s]->posterior.values().begin(), runs[s]->posterior.values().end());
    res.summary.emplace_back(label + "_forward", static_cast<double>(runs[s]->record.forward));
    res.summary.emplace_back(label + "_cumulative_kick", runs[s]->record.cumulative_kick);
  }
  res.tables.push_back(density_table("densities", "dr", reg.grid, labels, cols));
  return res;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  static const std::map<std::string, std::function<ExperimentResult(const ExperimentConfig&)>> table = {
      {"fock-phase", fock_phase},
      {"poissonian-phase", [](const auto& c) { return record_experiment(c, focksim::EnsembleKind::poissonian); }},
      {"thermal-phase", [](const auto& c) { return record_experiment(c, focksim::EnsembleKind::thermal); }},
      {"visibility-curves", visibility_curves},
      {"bec-likely-events", bec_likely},
      {"bec-fringes", bec_fringes},
      {"rubber-cavity", rubber_cavity},
      {"scattering", [](const auto& c) { return scattering(c, false); }},
      {"thermal-scattering", [](const auto& c) { return scattering(c, true); }},
  };
  return table.at(config.experiment())(config);
}

}  // namespace relloc::cli
