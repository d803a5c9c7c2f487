#include "relloc/phaseloc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "relloc/errors.hpp"

namespace relloc::phaseloc {

using numkernel::kPi;
using numkernel::kTwoPi;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// n * log|x| with the convention 0 * log 0 = 0.
double scaled_log_abs(long n, double x) {
  if (n == 0) return 0.0;
  const double a = std::fabs(x);
  if (a == 0.0) return kNegInf;
  return static_cast<double>(n) * std::log(a);
}

void check_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("leakage eps must lie in (0, 1)");
}

long extend_cutoff(double mean, double sd, const std::function<double(long)>& log_pmf) {
  long cutoff = static_cast<long>(std::ceil(mean + 15.0 * sd)) + 1;
  while (log_pmf(cutoff) > std::log(1e-16) || static_cast<double>(cutoff) < mean) ++cutoff;
  return cutoff;
}

}  // namespace

void validate(const DetectionRecord& record) {
  if (record.l < 0 || record.r < 0) throw std::invalid_argument("detection counts must be nonnegative");
  if (!(record.tau >= 0.0 && record.tau < kTwoPi)) throw std::invalid_argument("tau must lie in [0, 2pi)");
}

RelativePhaseDensity::RelativePhaseDensity(Grid1D grid, std::vector<double> weights)
    : grid_(grid), weights_(std::move(weights)) {
  if (!grid_.periodic()) throw std::invalid_argument("relative-phase densities need a periodic grid");
  if (weights_.size() != grid_.size()) throw std::invalid_argument("weight count does not match grid");
  for (double w : weights_) {
    if (!(w >= 0.0)) throw std::invalid_argument("density weights must be nonnegative");
  }
}

RelativePhaseDensity RelativePhaseDensity::uniform(const Grid1D& grid) {
  return {grid, std::vector<double>(grid.size(), 1.0 / (grid.hi() - grid.lo()))};
}

std::size_t RelativePhaseDensity::argmax() const {
  return static_cast<std::size_t>(std::max_element(weights_.begin(), weights_.end()) - weights_.begin());
}

std::vector<std::size_t> RelativePhaseDensity::local_maxima(double rel_threshold) const {
  const std::size_t n = weights_.size();
  const double top = weights_[argmax()];
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double prev = weights_[(i + n - 1) % n];
    const double next = weights_[(i + 1) % n];
    // Plateaus count once, at their left edge.
    if (weights_[i] > prev && weights_[i] >= next && weights_[i] >= rel_threshold * top) out.push_back(i);
  }
  return out;
}

bool RelativePhaseDensity::has_unique_global_peak(double margin) const {
  const std::size_t top = argmax();
  const double peak = weights_[top];
  for (std::size_t i : local_maxima(0.0)) {
    if (i != top && weights_[i] >= (1.0 - margin) * peak) return false;
  }
  return true;
}

PeakSpread RelativePhaseDensity::spread() const {
  PeakSpread s;
  s.peak = argmax_location();
  double m2 = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    const double d = numkernel::angular_difference(grid_[i], s.peak);
    m2 += weights_[i] * d * d;
  }
  s.std_dev = std::sqrt(m2 * grid_.spacing());
  return s;
}

double clr_log_weight(const DetectionRecord& record, double delta) {
  const double half = 0.5 * (delta - record.tau);
  return 2.0 * (scaled_log_abs(record.l, std::sin(half)) + scaled_log_abs(record.r, std::cos(half)));
}

RelativePhaseDensity record_density(std::span<const DetectionRecord> batches, const Grid1D& grid) {
  if (!grid.periodic()) throw std::invalid_argument("relative-phase densities need a periodic grid");
  std::vector<double> w(grid.size(), 0.0);
  for (const auto& b : batches) {
    validate(b);
    for (std::size_t i = 0; i < grid.size(); ++i) w[i] += clr_log_weight(b, grid[i]);
  }
  numkernel::exp_normalize(w);
  numkernel::normalize_density(w, grid);
  return {grid, std::move(w)};
}

RelativePhaseDensity clr_density(const DetectionRecord& record, const Grid1D& grid) {
  return record_density(std::span<const DetectionRecord>(&record, 1), grid);
}

LocalizationPeaks localization_peaks(const DetectionRecord& record) {
  validate(record);
  const long total = record.total();
  if (total == 0) throw NoPeakError("no detections: the relative phase is not localized");
  LocalizationPeaks p;
  p.delta0 = 2.0 * std::acos(std::sqrt(static_cast<double>(record.r) / static_cast<double>(total)));
  p.mirrored = record.l > 0 && record.r > 0;
  if (record.l == 0) {
    p.delta0 = 0.0;
    p.gaussian_width = std::sqrt(4.0 / static_cast<double>(record.r));
  } else if (record.r == 0) {
    p.delta0 = kPi;
    p.gaussian_width = std::sqrt(4.0 / static_cast<double>(record.l));
  } else {
    p.gaussian_width = std::sqrt(2.0 / static_cast<double>(total));
  }
  return p;
}

double gaussian_asymptote_error(const DetectionRecord& record, const Grid1D& grid) {
  const LocalizationPeaks peaks = localization_peaks(record);
  const double l = static_cast<double>(record.l), r = static_cast<double>(record.r), n = l + r;
  // ln of the peak value sqrt(l^l r^r / n^n), with 0^0 = 1.
  const double log_peak = 0.5 * ((record.l ? l * std::log(l) : 0.0) + (record.r ? r * std::log(r) : 0.0) -
                                 n * std::log(n));
  const double rate = peaks.mirrored ? n / 4.0 : n / 8.0;

  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid[i];
    const double exact = std::exp(0.5 * clr_log_weight(record, x) - log_peak);
    double d = std::fabs(numkernel::angular_difference(x, record.tau + peaks.delta0));
    if (peaks.mirrored) {
      d = std::min(d, std::fabs(numkernel::angular_difference(x, record.tau - peaks.delta0)));
    }
    const double approx = std::exp(-rate * d * d);
    worst = std::max(worst, std::fabs(exact - approx));
  }
  return worst;
}

double log_plr_fock_approx(long l, long r, double n, double eps) {
  check_eps(eps);
  if (!(n >= 1.0)) throw std::domain_error("Fock occupancy must be at least 1");
  if (l < 0 || r < 0) return kNegInf;
  const double k = static_cast<double>(l + r);
  const double mu = 2.0 * eps * n;
  return k * std::log(mu) - mu - std::lgamma(r + 1.0) - std::lgamma(l + 1.0) + std::lgamma(r + 0.5) +
         std::lgamma(l + 0.5) - std::log(kPi) - std::lgamma(k + 1.0);
}

double plr_fock_approx(long l, long r, double n, double eps) { return std::exp(log_plr_fock_approx(l, r, n, eps)); }

double plr_thermal(long l, long r, double nbar, double eps) {
  check_eps(eps);
  if (!(nbar > 0.0)) throw std::domain_error("mean photon number must be positive");
  if (l < 0 || r < 0) return 0.0;
  const double x = nbar * eps;
  const double k = static_cast<double>(l + r);
  return std::exp(k * std::log(x) - (k + 2.0) * std::log1p(x));
}

long poissonian_record_cutoff(double n, double eps) {
  check_eps(eps);
  const double mu = 2.0 * eps * n;
  return extend_cutoff(mu, std::sqrt(mu), [mu](long k) { return numkernel::log_poissonian(k, mu); });
}

long thermal_record_cutoff(double nbar, double eps) {
  check_eps(eps);
  const double x = nbar * eps;
  return extend_cutoff(2.0 * x, std::sqrt(2.0 * x * (1.0 + x)), [x](long k) {
    const double kk = static_cast<double>(k);
    return std::log(kk + 1.0) + kk * std::log(x) - (kk + 2.0) * std::log1p(x);
  });
}

long CatStateDescriptor::schmidt_rank() const {
  return static_cast<long>(std::count_if(fock_amplitudes.begin(), fock_amplitudes.end(),
                                         [](const auto& a) { return std::abs(a) > 1e-300; }));
}

CatStateDescriptor cat_descriptor(long gamma_sq, double delta0) {
  if (gamma_sq < 1) throw std::domain_error("cat_descriptor needs |gamma|^2 >= 1");
  const double g = static_cast<double>(gamma_sq);
  CatStateDescriptor cat;
  cat.gamma_mag = std::sqrt(g);
  cat.delta0 = delta0;
  cat.total_photons = 2 * gamma_sq;

  std::vector<double> log_mod(static_cast<std::size_t>(cat.total_photons + 1));
  for (long m = 0; m <= cat.total_photons; ++m) {
    log_mod[m] = 0.5 * (numkernel::log_poissonian(cat.total_photons - m, g) + numkernel::log_poissonian(m, g));
  }
  numkernel::exp_normalize(log_mod);
  double norm2 = 0.0;
  for (double v : log_mod) norm2 += v * v;
  const double scale = 1.0 / std::sqrt(norm2);
  cat.fock_amplitudes.reserve(log_mod.size());
  for (long m = 0; m <= cat.total_photons; ++m) {
    cat.fock_amplitudes.push_back(std::polar(log_mod[m] * scale, static_cast<double>(m) * delta0));
  }
  return cat;
}

}  // namespace relloc::phaseloc
