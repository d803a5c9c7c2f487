#include "relloc/posloc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "relloc/errors.hpp"
#include "relloc/trajectory.hpp"

namespace relloc::posloc {

using numkernel::kPi;
using numkernel::kTwoPi;

namespace {

constexpr std::size_t kAngularPoints = 512;

void check_k(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) throw std::domain_error("photon momentum k must be positive");
}

void check_eps(double eps) {
  if (!(eps >= 0.0 && eps < 0.5)) throw std::domain_error("observer half-angle must lie in [0, 0.5)");
}

RelativePositionDensity finish(const RelativePositionDensity& prior, std::vector<double> w) {
  const auto& grid = prior.grid();
  const auto [lo, hi] = prior.region();
  const double slack = 1e-9 * grid.spacing();
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (grid[i] < lo - slack || grid[i] > hi + slack) w[i] = 0.0;
  }
  const double total = grid.integrate(w);
  if (!(total > 0.0) || !std::isfinite(total)) throw std::domain_error("update leaves no probability mass");
  for (double& v : w) v /= total;
  return {grid, std::move(w), prior.region()};
}

RelativePositionDensity apply_kernel(const RelativePositionDensity& prior, std::span<const double> kernel) {
  std::vector<double> w(prior.values().begin(), prior.values().end());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] *= kernel[i];
  return finish(prior, std::move(w));
}

// avg over theta of sin^2(x sin(theta) / 2) = (1 - J0(x)) / 2, by quadrature.
double mean_sin_sq(double x) {
  const double ax = std::fabs(x);
  std::size_t n = kAngularPoints;
  while (static_cast<double>(n) < 2.0 * ax + 64.0) n *= 2;
  return numkernel::periodic_quadrature(
             [ax](double t) {
               const double s = std::sin(0.5 * ax * std::sin(t));
               return s * s;
             },
             n) /
         kTwoPi;
}

// (1/2pi) int_{-eps}^{eps} cos^2(x sin(theta) / 2) dtheta, Simpson rule.
double window_cos_sq(double x, double eps) {
  if (eps == 0.0) return 0.0;
  const double cycles = std::fabs(x) * eps / kPi;
  std::size_t m = 64;
  while (static_cast<double>(m) < 16.0 * cycles) m *= 2;
  const double h = eps / static_cast<double>(m);
  double sum = 0.0;
  for (std::size_t j = 0; j <= m; ++j) {
    const double c = std::cos(0.5 * x * std::sin(h * static_cast<double>(j)));
    const double wj = (j == 0 || j == m) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
    sum += wj * c * c;
  }
  return 2.0 * (h / 3.0) * sum / kTwoPi;
}

double outcome_weight(ScatterOutcome outcome, double sin_sq, double window) {
  return outcome == ScatterOutcome::forward ? sin_sq + window : 1.0 - sin_sq - window;
}

}  // namespace

double GaussianWavepacket::density(double x) const {
  const double z = (x - a) / d;
  return std::exp(-0.5 * z * z) / (d * std::sqrt(kTwoPi));
}

void validate(const GaussianWavepacket& packet) {
  if (!(packet.d > 0.0)) throw std::invalid_argument("wavepacket spread d must be positive");
}

RelativePositionDensity::RelativePositionDensity(Grid1D grid, std::vector<double> density,
                                                 std::pair<double, double> region)
    : grid_(grid), density_(std::move(density)), region_(region) {
  if (grid_.periodic()) throw std::invalid_argument("separation densities need a closed grid");
  if (density_.size() != grid_.size()) throw std::invalid_argument("density size does not match grid");
  if (!(region_.first < region_.second)) throw std::invalid_argument("region bounds must be increasing");
  for (double v : density_) {
    if (!(v >= 0.0)) throw std::invalid_argument("density values must be nonnegative");
  }
}

std::size_t RelativePositionDensity::argmax() const {
  return static_cast<std::size_t>(std::max_element(density_.begin(), density_.end()) - density_.begin());
}

double RelativePositionDensity::mean_peak_spacing(double rel_threshold) const {
  const double top = density_[argmax()];
  std::vector<double> peaks;
  for (std::size_t i = 1; i + 1 < density_.size(); ++i) {
    if (density_[i] > density_[i - 1] && density_[i] >= density_[i + 1] && density_[i] >= rel_threshold * top) {
      peaks.push_back(grid_[i]);
    }
  }
  if (peaks.size() < 2) return 0.0;
  return (peaks.back() - peaks.front()) / static_cast<double>(peaks.size() - 1);
}

Grid1D separation_grid(double lo, double hi, std::size_t n) {
  if (!(hi > lo)) throw ConfigurationError("region must have hi > lo");
  if (n < 3) throw ConfigurationError("separation grid needs at least 3 points");
  return Grid1D(-(hi - lo), hi - lo, n, false);
}

RelativePositionDensity uniform_prior(const Grid1D& grid) {
  const double width = grid.hi() - grid.lo();
  return {grid, std::vector<double>(grid.size(), 1.0 / width), {grid.lo(), grid.hi()}};
}

RelativePositionDensity thermal_prior(double lo, double hi, double d, const Grid1D& grid) {
  if (!(d > 0.0)) throw ConfigurationError("thermal spread d must be positive");
  const double len = hi - lo;
  if (!(len >= 3.0 * d)) throw ConfigurationError("region is narrower than 3 d");
  const double sigma = d * std::sqrt(2.0);
  // Antiderivative twice over of the smoothed step: v Phi(v/s) + s phi(v/s).
  const auto ramp = [sigma](double v) {
    const double z = v / sigma;
    const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(kTwoPi);
    return v * cdf + sigma * pdf;
  };
  std::vector<double> w(grid.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double u = grid[i];
    w[i] = std::max(0.0, (ramp(u + len) - 2.0 * ramp(u) + ramp(u - len)) / (len * len));
  }
  RelativePositionDensity shell(grid, std::vector<double>(grid.size(), 0.0), {-len, len});
  return finish(shell, std::move(w));
}

RelativePositionDensity rubber_cavity_localize(const RelativePositionDensity& prior, long l, long r, double k) {
  check_k(k);
  if (l < 0 || r < 0) throw std::invalid_argument("detection counts must be nonnegative");
  if (l == 0 && r == 0) return prior;
  const auto& grid = prior.grid();
  const double scale = std::sqrt(2.0) * k;
  const phaseloc::DetectionRecord rec{l, r, 0.0};
  std::vector<double> logw(grid.size());
  for (std::size_t i = 0; i < logw.size(); ++i) {
    const double p = prior[i];
    logw[i] = p > 0.0 ? std::log(p) + phaseloc::clr_log_weight(rec, scale * grid[i])
                      : -std::numeric_limits<double>::infinity();
  }
  numkernel::exp_normalize(logw);
  return finish(prior, std::move(logw));
}

std::vector<double> scatter_kernel(const Grid1D& grid, ScatterOutcome outcome, double k, double eps) {
  check_k(k);
  check_eps(eps);
  std::vector<double> w(grid.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double x = k * grid[i];
    w[i] = outcome_weight(outcome, mean_sin_sq(x), window_cos_sq(x, eps));
  }
  return w;
}

RelativePositionDensity coarse_scatter_update(const RelativePositionDensity& prior, ScatterOutcome outcome,
                                              double k, double eps) {
  return apply_kernel(prior, scatter_kernel(prior.grid(), outcome, k, eps));
}

RelativePositionDensity bessel_update(const RelativePositionDensity& prior, long forward, long deflect, double k) {
  check_k(k);
  if (forward < 0 || deflect < 0) throw std::invalid_argument("scattering counts must be nonnegative");
  if (forward == 0 && deflect == 0) throw NoPeakError("no scattering events: nothing to update");
  const auto& grid = prior.grid();
  std::vector<double> w(grid.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double j0 = numkernel::bessel_j0(k * grid[i]);
    w[i] = prior[i] * std::pow(std::max(0.0, 1.0 - j0), static_cast<double>(forward)) *
           std::pow(1.0 + j0, static_cast<double>(deflect));
  }
  return finish(prior, std::move(w));
}

RelativePositionDensity bessel_pattern(long forward, long deflect, double k, const Grid1D& grid) {
  return bessel_update(uniform_prior(grid), forward, deflect, k);
}

std::pair<GaussianWavepacket, GaussianWavepacket> com_rel_decompose(const GaussianWavepacket& p1,
                                                                    const GaussianWavepacket& p2) {
  validate(p1);
  validate(p2);
  if (p1.d != p2.d) throw ConfigurationError("centre-of-mass separation needs equal spreads");
  const double d = p1.d / std::sqrt(2.0);
  return {GaussianWavepacket{p1.k + p2.k, 0.5 * (p1.a + p2.a), d},
          GaussianWavepacket{p2.k - p1.k, 0.5 * (p2.a - p1.a), d}};
}

std::vector<double> thermal_scatter_kernel(const Grid1D& grid, ScatterOutcome outcome, double k, double eps,
                                           double nbar) {
  check_k(k);
  check_eps(eps);
  if (!(nbar >= 0.0) || !std::isfinite(nbar)) throw std::domain_error("mean photon number must be nonnegative");
  if (nbar == 0.0) return std::vector<double>(grid.size(), 1.0);
  const double q = nbar / (1.0 + nbar);
  std::vector<double> w(grid.size(), 0.0);
  double weight = 1.0 / (1.0 + nbar);
  double tail = q;
  for (long n = 0;; ++n) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double x = static_cast<double>(n) * k * grid[i];
      // Large kicks: use the Bessel identity rather than a long quadrature.
      const double sin_sq = 0.5 * (1.0 - numkernel::bessel_j0(x));
      w[i] += weight * outcome_weight(outcome, sin_sq, window_cos_sq(x, eps));
    }
    if (tail < 1e-12) break;
    weight *= q;
    tail *= q;
  }
  return w;
}

RelativePositionDensity thermal_light_scatter(const RelativePositionDensity& prior, double nbar,
                                              std::span<const ScatterOutcome> outcomes, double k, double eps) {
  if (outcomes.empty() || nbar == 0.0) return prior;
  const auto fwd = thermal_scatter_kernel(prior.grid(), ScatterOutcome::forward, k, eps, nbar);
  const auto dfl = thermal_scatter_kernel(prior.grid(), ScatterOutcome::deflect, k, eps, nbar);
  std::vector<double> w(prior.values().begin(), prior.values().end());
  for (auto o : outcomes) {
    const auto& kern = o == ScatterOutcome::forward ? fwd : dfl;
    for (std::size_t i = 0; i < w.size(); ++i) w[i] *= kern[i];
    const double top = *std::max_element(w.begin(), w.end());
    if (top > 0.0) {
      for (double& v : w) v /= top;
    }
  }
  return finish(prior, std::move(w));
}

ScatterRun sample_scattering(const RelativePositionDensity& prior, long events, double k, double eps, double nbar,
                             std::uint64_t seed, std::uint64_t index) {
  if (events < 0) throw std::invalid_argument("event count must be nonnegative");
  const auto& grid = prior.grid();
  const bool thermal = nbar > 0.0;
  const auto fwd = thermal ? thermal_scatter_kernel(grid, ScatterOutcome::forward, k, eps, nbar)
                           : scatter_kernel(grid, ScatterOutcome::forward, k, eps);
  const auto dfl = thermal ? thermal_scatter_kernel(grid, ScatterOutcome::deflect, k, eps, nbar)
                           : scatter_kernel(grid, ScatterOutcome::deflect, k, eps);
  Rng rng = trajectory_rng(seed, index);
  ScatterRun run{{0, 0, k, eps, 0.0}, {}, prior};
  std::vector<double> prod(grid.size());
  for (long e = 0; e < events; ++e) {
    const auto& cur = run.posterior;
    for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = cur[i] * fwd[i];
    const double p_forward = grid.integrate(prod);
    const bool forward = uniform01(rng) < p_forward;
    const auto outcome = forward ? ScatterOutcome::forward : ScatterOutcome::deflect;
    if (!forward && !thermal) {
      // Deflection angle drawn from its marginal over the current density.
      std::vector<double> ang(kAngularPoints, 0.0);
      for (std::size_t j = 0; j < kAngularPoints; ++j) {
        const double theta = kTwoPi * static_cast<double>(j) / static_cast<double>(kAngularPoints);
        if (std::fabs(numkernel::angular_difference(theta, 0.0)) <= eps) continue;
        for (std::size_t i = 0; i < prod.size(); ++i) {
          const double c = std::cos(0.5 * k * std::sin(theta) * grid[i]);
          prod[i] = cur[i] * c * c;
        }
        ang[j] = grid.integrate(prod);
      }
      const double theta =
          kTwoPi * static_cast<double>(sample_discrete(ang, rng)) / static_cast<double>(kAngularPoints);
      run.record.cumulative_kick += k * std::sin(theta);
    }
    run.posterior = apply_kernel(cur, forward ? fwd : dfl);
    run.outcomes.push_back(outcome);
    ++(forward ? run.record.forward : run.record.deflect);
  }
  return run;
}

double rubber_clr_distance(long l, long r, double k, long periods, std::size_t phase_points) {
  check_k(k);
  if (periods < 1 || phase_points < 4) throw ConfigurationError("need at least one period and 4 phase points");
  const double scale = std::sqrt(2.0) * k;
  const double half_span = static_cast<double>(periods) * kTwoPi / scale;
  const std::size_t n = 2 * static_cast<std::size_t>(periods) * phase_points + 1;
  const Grid1D grid(-half_span, half_span, n, false);
  const auto rubber = rubber_cavity_localize(uniform_prior(grid), l, r, k);
  const auto clr = phaseloc::clr_density({l, r, 0.0}, Grid1D::phase(phase_points));
  const double rubber_top = rubber[rubber.argmax()];
  const double clr_top = clr[clr.argmax()];
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = rubber[i] / rubber_top;
    const double b = clr[i % phase_points] / clr_top;
    worst = std::max(worst, std::fabs(a - b));
  }
  return worst;
}

double l1_distance(const RelativePositionDensity& a, const RelativePositionDensity& b) {
  if (a.grid().size() != b.grid().size()) throw std::invalid_argument("densities live on different grids");
  std::vector<double> diff(a.grid().size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = std::fabs(a[i] - b[i]);
  return a.grid().integrate(diff);
}

}  // namespace relloc::posloc
