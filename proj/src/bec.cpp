#include "relloc/bec.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "relloc/errors.hpp"

namespace relloc::bec {

using focksim::FixedTotalState;
using numkernel::kPi;
using numkernel::kTwoPi;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_k(double k) {
  if (!(k > 0.0)) throw std::domain_error("momentum k must be positive");
}

struct Scaled {
  FixedTotalState state;
  double log_scale = 0.0;

  bool apply(Port port, double tau) {
    state = state.detect(port, tau);
    const double n2 = state.norm_sq();
    if (n2 == 0.0) return false;
    state.normalize();
    log_scale += std::log(n2);
    return true;
  }
};

// K_L^l K_R^{M-l} at one setting; false if the branch vanishes.
bool apply_setting(Scaled& v, long l, long M, double tau) {
  for (long i = 0; i < M - l; ++i)
    if (!v.apply(Port::right, tau)) return false;
  for (long i = 0; i < l; ++i)
    if (!v.apply(Port::left, tau)) return false;
  return true;
}

long sample_poisson(double mean, Rng& rng) {
  const long lo = std::max(0L, static_cast<long>(std::floor(mean - 15.0 * std::sqrt(mean) - 5.0)));
  const long hi = static_cast<long>(std::ceil(mean + 15.0 * std::sqrt(mean) + 5.0));
  std::vector<double> w(static_cast<std::size_t>(hi - lo + 1));
  for (long n = lo; n <= hi; ++n) w[n - lo] = numkernel::log_poissonian(n, mean);
  numkernel::exp_normalize(w);
  return lo + static_cast<long>(sample_discrete(w, rng));
}

// Solves the 3x3 system a x = b by Gaussian elimination with partial pivoting.
std::array<double, 3> solve3(std::array<std::array<double, 3>, 3> a, std::array<double, 3> b) {
  for (int c = 0; c < 3; ++c) {
    int p = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[p][c])) p = r;
    std::swap(a[c], a[p]);
    std::swap(b[c], b[p]);
    if (a[c][c] == 0.0) throw std::domain_error("singular fringe fit");
    for (int r = c + 1; r < 3; ++r) {
      const double f = a[r][c] / a[c][c];
      for (int j = c; j < 3; ++j) a[r][j] -= f * a[c][j];
      b[r] -= f * b[c];
    }
  }
  std::array<double, 3> x{};
  for (int c = 2; c >= 0; --c) {
    double s = b[c];
    for (int j = c + 1; j < 3; ++j) s -= a[c][j] * x[j];
    x[c] = s / a[c][c];
  }
  return x;
}

}  // namespace

ReducedPosition reduce_position(double x, double k) {
  check_k(k);
  const double period = kPi / k, quarter = kPi / (2.0 * k);
  double y = std::fmod(x, period);
  if (y < 0.0) y += period;
  if (y >= period) y = 0.0;
  if (y >= quarter) return {y - quarter, true};
  return {y, false};
}

void validate(const TwoSettingRecord& rec) {
  if (rec.M < 0 || rec.l1 < 0 || rec.r1 < 0 || rec.l2 < 0 || rec.r2 < 0) {
    throw std::invalid_argument("two-setting counts must be nonnegative");
  }
  if (rec.l1 + rec.r1 != rec.M || rec.l2 + rec.r2 != rec.M) {
    throw std::invalid_argument("each setting must carry exactly M detections");
  }
}

RelativePhaseDensity two_setting_density(const TwoSettingRecord& rec, const Grid1D& grid) {
  validate(rec);
  const phaseloc::DetectionRecord batches[2] = {{rec.l1, rec.r1, 0.0}, {rec.l2, rec.r2, kPi / 2}};
  return phaseloc::record_density(batches, grid);
}

std::vector<std::vector<double>> two_setting_probabilities(long M, double nbar) {
  if (M < 1) throw std::domain_error("M must be at least 1");
  // Detection-count conditioning; the Poissonian record law does not depend on eps.
  const double eps = 0.5;
  const long k = 2 * M;
  const auto ens = focksim::MixedEnsemble::poissonian(nbar);

  std::vector<double> logw(ens.members.size(), kNegInf);
  double top = kNegInf;
  for (std::size_t i = 0; i < ens.members.size(); ++i) {
    const auto& mem = ens.members[i];
    const long t = mem.n + mem.m;
    if (t < k) continue;
    logw[i] = std::log(mem.weight) + numkernel::log_binomial(t, k) + static_cast<double>(k) * std::log(eps) +
              static_cast<double>(t - k) * std::log1p(-eps);
    top = std::max(top, logw[i]);
  }
  if (top == kNegInf) throw CutoffOverflow("ensemble cannot supply 2M detections");

  std::vector<std::vector<double>> prob(static_cast<std::size_t>(M + 1), std::vector<double>(M + 1, 0.0));
  double wsum = 0.0;
  for (std::size_t i = 0; i < ens.members.size(); ++i) {
    if (logw[i] < top - 45.0) continue;
    const auto& mem = ens.members[i];
    const long t = mem.n + mem.m;
    const double w = std::exp(logw[i] - top);
    wsum += w;
    const double log_order = std::lgamma(static_cast<double>(t - k) + 1.0) - std::lgamma(static_cast<double>(t) + 1.0);
    for (long l1 = 0; l1 <= M; ++l1) {
      Scaled v1{FixedTotalState::fock(mem.n, mem.m), 0.0};
      if (!apply_setting(v1, l1, M, 0.0)) continue;
      for (long l2 = 0; l2 <= M; ++l2) {
        Scaled v2 = v1;
        if (!apply_setting(v2, l2, M, kPi / 2)) continue;
        prob[l1][l2] += w * std::exp(numkernel::log_binomial(M, l1) + numkernel::log_binomial(M, l2) + v2.log_scale +
                                     log_order);
      }
    }
  }
  for (auto& row : prob)
    for (auto& p : row) p /= wsum;
  return prob;
}

double two_setting_probability_quadrature(const TwoSettingRecord& rec) {
  validate(rec);
  const phaseloc::DetectionRecord a{rec.l1, rec.r1, 0.0}, b{rec.l2, rec.r2, kPi / 2};
  const double avg = numkernel::periodic_quadrature(
                         [&](double d) { return std::exp(phaseloc::clr_log_weight(a, d) + phaseloc::clr_log_weight(b, d)); },
                         4096) /
                     kTwoPi;
  return std::exp(numkernel::log_binomial(rec.M, rec.l1) + numkernel::log_binomial(rec.M, rec.l2)) * avg;
}

LikelyEvents likely_events(long M, const Grid1D& grid, double nbar) {
  if (M < 1) throw std::domain_error("M must be at least 1");
  if (nbar == 0.0) nbar = std::max(20.0, static_cast<double>(M + 5));
  const auto prob = two_setting_probabilities(M, nbar);
  LikelyEvents out;
  out.M = M;
  out.nbar = nbar;
  out.threshold = 1.0 / static_cast<double>((M + 1) * (M + 1));
  for (long l1 = 0; l1 <= M; ++l1) {
    for (long l2 = 0; l2 <= M; ++l2) {
      const double p = prob[l1][l2];
      out.total_probability += p;
      if (!(p > out.threshold)) continue;
      LikelyEvent ev;
      ev.record = {M, l1, M - l1, l2, M - l2};
      ev.probability = p;
      const auto dens = two_setting_density(ev.record, grid);
      ev.unique_peak = dens.has_unique_global_peak();
      const auto sp = dens.spread();
      ev.peak = sp.peak;
      ev.std_dev = sp.std_dev;
      ev.halfwidth = 2.0 * sp.std_dev;
      out.likely_mass += p;
      out.events.push_back(ev);
    }
  }
  return out;
}

FringeFit fit_fringes(std::span<const double> positions, double k, int bins) {
  check_k(k);
  if (bins < 4) throw std::invalid_argument("fringe fit needs at least 4 bins");
  if (positions.empty()) throw std::domain_error("no positions to fit");
  const double period = kPi / k;
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  for (double x : positions) {
    double y = std::fmod(x, period);
    if (y < 0.0) y += period;
    auto b = static_cast<std::size_t>(y / period * bins);
    counts[std::min(b, counts.size() - 1)] += 1.0;
  }
  std::array<std::array<double, 3>, 3> ata{};
  std::array<double, 3> atb{};
  for (int b = 0; b < bins; ++b) {
    const double x = (b + 0.5) * period / bins;
    const double f[3] = {1.0, std::cos(2.0 * k * x), std::sin(2.0 * k * x)};
    for (int i = 0; i < 3; ++i) {
      atb[i] += f[i] * counts[b];
      for (int j = 0; j < 3; ++j) ata[i][j] += f[i] * f[j];
    }
  }
  const auto c = solve3(ata, atb);
  FringeFit fit{c[0], c[1], c[2], 0.0, 0.0};
  fit.visibility = c[0] > 0.0 ? std::hypot(c[1], c[2]) / c[0] : 0.0;
  fit.delta0 = numkernel::wrap_phase(std::atan2(c[2], c[1]));
  return fit;
}

VisibilityInterval bootstrap_visibility(std::span<const double> positions, double k, std::uint64_t seed,
                                        int resamples, int bins) {
  if (resamples < 10) throw std::invalid_argument("too few bootstrap resamples");
  VisibilityInterval out;
  out.estimate = fit_fringes(positions, k, bins).visibility;
  std::vector<double> vis;
  vis.reserve(static_cast<std::size_t>(resamples));
  Rng rng = trajectory_rng(seed, 0);
  std::vector<double> sample(positions.size());
  for (int b = 0; b < resamples; ++b) {
    for (auto& s : sample) {
      auto idx = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(positions.size()));
      s = positions[std::min(idx, positions.size() - 1)];
    }
    vis.push_back(fit_fringes(sample, k, bins).visibility);
  }
  std::sort(vis.begin(), vis.end());
  const auto at = [&](double q) { return vis[static_cast<std::size_t>(std::floor(q * (vis.size() - 1)))]; };
  out.lo = at(0.025);
  out.hi = at(0.975);
  return out;
}

std::vector<double> FringeRun::positions() const {
  std::vector<double> xs;
  xs.reserve(events.size());
  for (const auto& e : events) xs.push_back(e.x);
  return xs;
}

FringeRun simulate_fringes(double nbar, long n_atoms, double k, std::uint64_t seed, long cells,
                           std::size_t grid_points) {
  check_k(k);
  if (!(nbar > 0.0)) throw std::domain_error("mean atom number must be positive");
  if (n_atoms < 0 || cells < 1) throw std::invalid_argument("atom and cell counts must be positive");
  Rng rng = trajectory_rng(seed, 0);
  FringeRun run;
  run.initial_n = sample_poisson(nbar, rng);
  run.initial_m = sample_poisson(nbar, rng);
  if (run.initial_n + run.initial_m < 2 * n_atoms) {
    throw CutoffOverflow("condensates too small for the requested number of detections");
  }

  const Grid1D grid = Grid1D::phase(grid_points);
  std::vector<double> log_post(grid.size(), 0.0);
  std::vector<double> dens(grid.size());
  FixedTotalState psi = FixedTotalState::fock(run.initial_n, run.initial_m);
  const double quarter = kPi / (2.0 * k), period = kPi / k;
  run.events.reserve(static_cast<std::size_t>(n_atoms));
  run.timeline.reserve(static_cast<std::size_t>(n_atoms));

  for (long i = 0; i < n_atoms; ++i) {
    const double xr = quarter * uniform01(rng);
    const double tau = 2.0 * k * xr;
    const double w[2] = {psi.detection_weight(Port::left, tau), psi.detection_weight(Port::right, tau)};
    const Port port = sample_discrete(w, rng) == 0 ? Port::left : Port::right;
    const auto cell = static_cast<long>(uniform01(rng) * static_cast<double>(cells));
    const double x = static_cast<double>(std::min(cell, cells - 1)) * period + xr + (port == Port::left ? quarter : 0.0);
    psi = psi.detect(port, tau);
    psi.normalize();
    run.events.push_back({x, k, tau, port});

    const phaseloc::DetectionRecord rec{port == Port::left ? 1L : 0L, port == Port::right ? 1L : 0L, tau};
    for (std::size_t g = 0; g < grid.size(); ++g) {
      log_post[g] += phaseloc::clr_log_weight(rec, grid[g]);
      dens[g] = log_post[g];
    }
    numkernel::exp_normalize(dens);
    numkernel::normalize_density(dens, grid);
    run.timeline.push_back(RelativePhaseDensity(grid, dens).spread());
  }
  return run;
}

}  // namespace relloc::bec
