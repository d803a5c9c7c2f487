#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "relloc/numkernel.hpp"
#include "relloc/phaseloc.hpp"

namespace relloc::posloc {

using numkernel::Grid1D;

/// Gaussian state with mean momentum k, mean position a and spread d.
struct GaussianWavepacket {
  double k = 0.0;
  double a = 0.0;
  double d = 1.0;

  /// |psi(x)|^2, a normal density of standard deviation d.
  double density(double x) const;
};

void validate(const GaussianWavepacket& packet);

/// Density over the separation y - x on a closed grid. Values outside
/// `region` are zero.
class RelativePositionDensity {
 public:
  RelativePositionDensity(Grid1D grid, std::vector<double> density, std::pair<double, double> region);

  const Grid1D& grid() const { return grid_; }
  std::span<const double> values() const { return density_; }
  double operator[](std::size_t i) const { return density_[i]; }
  std::pair<double, double> region() const { return region_; }

  std::size_t argmax() const;
  /// Grid step between successive local maxima above `rel_threshold` of the
  /// peak, averaged; 0 with fewer than two maxima.
  double mean_peak_spacing(double rel_threshold = 0.5) const;

 private:
  Grid1D grid_;
  std::vector<double> density_;
  std::pair<double, double> region_;
};

/// Symmetric grid over [-(hi - lo), hi - lo] with n points.
Grid1D separation_grid(double lo, double hi, std::size_t n);

/// Uniform density over the grid's span.
RelativePositionDensity uniform_prior(const Grid1D& grid);

/// Separation density of two particles, each uniform over [lo, hi] and
/// smeared by a Gaussian of spread d. Throws ConfigurationError when
/// hi - lo < 3 d.
RelativePositionDensity thermal_prior(double lo, double hi, double d, const Grid1D& grid);

/// Multiplies by sin^{2l}(sqrt2 k x / 2) cos^{2r}(sqrt2 k x / 2).
RelativePositionDensity rubber_cavity_localize(const RelativePositionDensity& prior, long l, long r, double k);

enum class ScatterOutcome { forward, deflect };

/// Diagonal update weights for one photon of momentum k seen by an observer
/// with half-angle eps: deflect = avg cos^2 over |theta| > eps, forward =
/// avg sin^2 over all theta plus avg cos^2 over |theta| < eps.
std::vector<double> scatter_kernel(const Grid1D& grid, ScatterOutcome outcome, double k, double eps);

RelativePositionDensity coarse_scatter_update(const RelativePositionDensity& prior, ScatterOutcome outcome,
                                              double k, double eps);

/// [1 - J0(k x)]^F [1 + J0(k x)]^D, normalized. Throws NoPeakError for F = D = 0.
RelativePositionDensity bessel_pattern(long forward, long deflect, double k, const Grid1D& grid);

/// Same pattern applied to a prior.
RelativePositionDensity bessel_update(const RelativePositionDensity& prior, long forward, long deflect, double k);

/// Centre-of-mass and relative factors of two equal-spread packets.
/// Throws ConfigurationError if the spreads differ.
std::pair<GaussianWavepacket, GaussianWavepacket> com_rel_decompose(const GaussianWavepacket& p1,
                                                                    const GaussianWavepacket& p2);

/// Thermal wavepacket kernel: photon-number mixture of the single-photon
/// kernels with k -> n k. The vacuum term is constant in x, so nbar -> 0
/// leaves the density unchanged. nbar = 0 returns ones.
std::vector<double> thermal_scatter_kernel(const Grid1D& grid, ScatterOutcome outcome, double k, double eps,
                                           double nbar);

RelativePositionDensity thermal_light_scatter(const RelativePositionDensity& prior, double nbar,
                                              std::span<const ScatterOutcome> outcomes, double k, double eps);

struct ScatterRecord {
  long forward = 0;
  long deflect = 0;
  double k = 0.0;
  double eps_angle = 0.0;
  double cumulative_kick = 0.0;  ///< sum of k sin(theta) over deflections
};

struct ScatterRun {
  ScatterRecord record;
  std::vector<ScatterOutcome> outcomes;
  RelativePositionDensity posterior;
};

/// Draws `events` outcomes from their Born probabilities, updating the
/// density after each. nbar > 0 uses thermal wavepackets; their kick is not
/// resolved and cumulative_kick stays 0.
ScatterRun sample_scattering(const RelativePositionDensity& prior, long events, double k, double eps, double nbar,
                             std::uint64_t seed, std::uint64_t index = 0);

/// Sup-norm distance, both scaled to unit peak, between the rubber-cavity
/// density and clr_density at D = sqrt2 k x. The separation grid spans
/// +-periods comb periods and lands on the phase grid's points.
double rubber_clr_distance(long l, long r, double k, long periods = 4, std::size_t phase_points = 1024);

double l1_distance(const RelativePositionDensity& a, const RelativePositionDensity& b);

}  // namespace relloc::posloc
