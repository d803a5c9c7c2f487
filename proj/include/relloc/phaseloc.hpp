#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "relloc/numkernel.hpp"

namespace relloc::phaseloc {

using numkernel::Grid1D;

/// Counts at the left and right detectors for one batch taken at a fixed
/// phase-shift setting.
struct DetectionRecord {
  long l = 0;
  long r = 0;
  double tau = 0.0;

  long total() const { return l + r; }
};

/// Throws std::invalid_argument unless l, r >= 0 and tau is in [0, 2pi).
void validate(const DetectionRecord& record);

/// Location and spread of a density's dominant peak.
struct PeakSpread {
  double peak = 0.0;     ///< argmax location on the grid
  double std_dev = 0.0;  ///< sqrt of the second moment about `peak`, angles folded to [-pi, pi)
};

/// Normalized probability density over the relative phase on a periodic grid.
class RelativePhaseDensity {
 public:
  RelativePhaseDensity(Grid1D grid, std::vector<double> weights);

  /// Uniform density 1/(2pi).
  static RelativePhaseDensity uniform(const Grid1D& grid);

  const Grid1D& grid() const { return grid_; }
  std::span<const double> weights() const { return weights_; }
  double operator[](std::size_t i) const { return weights_[i]; }

  std::size_t argmax() const;
  double argmax_location() const { return grid_[argmax()]; }

  /// Grid indices of local maxima whose height is at least
  /// `rel_threshold` times the global maximum.
  std::vector<std::size_t> local_maxima(double rel_threshold) const;

  /// True if the global maximum is attained at one point only: every other
  /// local maximum lies at least `margin` (relative) below it.
  bool has_unique_global_peak(double margin = 1e-6) const;

  PeakSpread spread() const;

 private:
  Grid1D grid_;
  std::vector<double> weights_;
};

/// Peak structure of |C_{l,r}|: delta0 in [0, pi], mirrored at 2pi - delta0
/// (both offset by the record's tau). gaussian_width is the standard deviation
/// of the Gaussian that approximates |C_{l,r}| near the peak.
struct LocalizationPeaks {
  double delta0 = 0.0;
  bool mirrored = false;
  double gaussian_width = 0.0;
};

/// ln |sin^l((D - tau)/2) cos^r((D - tau)/2)|^2; -inf at zeros.
double clr_log_weight(const DetectionRecord& record, double delta);

/// Density proportional to |C_{l,r}|^2 for one batch.
RelativePhaseDensity clr_density(const DetectionRecord& record, const Grid1D& grid);

/// Normalized product of the batch densities (commuting Kraus operators make
/// order irrelevant). An empty record gives the uniform density.
RelativePhaseDensity record_density(std::span<const DetectionRecord> batches, const Grid1D& grid);

/// Throws NoPeakError when l + r == 0.
LocalizationPeaks localization_peaks(const DetectionRecord& record);

/// Sup-norm distance between |C_{l,r}| (scaled to unit peak) and its
/// Gaussian asymptote, over the grid.
double gaussian_asymptote_error(const DetectionRecord& record, const Grid1D& grid);

/// Leakage-model record probability for two equal Fock inputs of size n (exact
/// for two Poissonian inputs of mean n). Requires 0 < eps < 1, n >= 1.
double plr_fock_approx(long l, long r, double n, double eps);
double log_plr_fock_approx(long l, long r, double n, double eps);

/// Exact record probability for two thermal inputs of mean nbar:
/// (nbar eps)^{l+r} / (1 + eps nbar)^{l+r+2}.
double plr_thermal(long l, long r, double nbar, double eps);

/// Largest total count l + r to include in record sums: at least mean + 15 sd,
/// extended until the total-count pmf drops below 1e-16 past the mean.
long poissonian_record_cutoff(double n, double eps);
long thermal_record_cutoff(double nbar, double eps);

/// Fock-basis form of the limit state: amplitudes over |2g - m, m>, m = 0..2g.
struct CatStateDescriptor {
  double gamma_mag = 0.0;
  double delta0 = 0.0;
  long total_photons = 0;
  std::vector<std::complex<double>> fock_amplitudes;

  /// Number of nonzero Schmidt coefficients (amplitudes above 1e-300).
  long schmidt_rank() const;
};

CatStateDescriptor cat_descriptor(long gamma_sq, double delta0);

}  // namespace relloc::phaseloc
