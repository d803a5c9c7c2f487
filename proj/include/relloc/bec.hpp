#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "relloc/focksim.hpp"

namespace relloc::bec {

using focksim::Port;
using numkernel::Grid1D;
using phaseloc::PeakSpread;
using phaseloc::RelativePhaseDensity;

/// Position folded onto [0, pi/2k). `flipped` marks the second quarter-period,
/// where the field operator acts as the left-port Kraus operator.
struct ReducedPosition {
  double x = 0.0;
  bool flipped = false;
};

ReducedPosition reduce_position(double x, double k);

/// A single atom detection and its optical equivalent (tau = 2 k x_reduced).
struct AtomDetectionEvent {
  double x = 0.0;
  double k = 0.0;
  double reduced_tau = 0.0;
  Port port = Port::right;
};

/// M detections at each of tau = 0 (l1, r1) and tau = pi/2 (l2, r2).
struct TwoSettingRecord {
  long M = 0;
  long l1 = 0, r1 = 0;
  long l2 = 0, r2 = 0;
};

void validate(const TwoSettingRecord& record);

RelativePhaseDensity two_setting_density(const TwoSettingRecord& record, const Grid1D& grid);

/// Record probabilities P[l1][l2] for Poissonian condensates of mean nbar,
/// from exact branch enumeration of the Fock-basis trajectories.
std::vector<std::vector<double>> two_setting_probabilities(long M, double nbar);

/// Same probability from the phase average of the two C densities.
double two_setting_probability_quadrature(const TwoSettingRecord& record);

struct LikelyEvent {
  TwoSettingRecord record;
  double probability = 0.0;
  bool unique_peak = false;
  double peak = 0.0;
  double std_dev = 0.0;    ///< standard deviation of the posterior density
  double halfwidth = 0.0;  ///< 1/e half-width of |C C| (twice std_dev for a Gaussian)
};

struct LikelyEvents {
  long M = 0;
  double nbar = 0.0;
  double threshold = 0.0;
  double total_probability = 0.0;  ///< over all records (1 up to truncation)
  double likely_mass = 0.0;
  std::vector<LikelyEvent> events;
};

/// Records whose probability exceeds 1/(M+1)^2. nbar = 0 picks max(20, M + 5).
LikelyEvents likely_events(long M, const Grid1D& grid, double nbar = 0.0);

/// Least-squares fit of c0 + c1 cos(2kx) + c2 sin(2kx) to a histogram of
/// positions folded onto one fringe period pi/k.
struct FringeFit {
  double offset = 0.0;
  double cos_coef = 0.0;
  double sin_coef = 0.0;
  double visibility = 0.0;
  double delta0 = 0.0;  ///< fringe phase: density ~ cos^2(kx - delta0/2)
};

FringeFit fit_fringes(std::span<const double> positions, double k, int bins = 32);

struct VisibilityInterval {
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double half_width() const { return 0.5 * (hi - lo); }
};

/// Central 95% bootstrap interval of the fitted fringe visibility.
VisibilityInterval bootstrap_visibility(std::span<const double> positions, double k, std::uint64_t seed,
                                        int resamples = 400, int bins = 32);

struct FringeRun {
  long initial_n = 0;
  long initial_m = 0;
  std::vector<AtomDetectionEvent> events;
  std::vector<PeakSpread> timeline;  ///< posterior peak and std after each atom
  std::vector<double> positions() const;
};

/// Detects n_atoms atoms one by one from two Poissonian condensates of mean
/// nbar and momenta +-k. Positions spread over `cells` fringe periods. Throws
/// CutoffOverflow unless the sampled populations hold at least 2 n_atoms atoms.
FringeRun simulate_fringes(double nbar, long n_atoms, double k, std::uint64_t seed, long cells = 20,
                           std::size_t grid_points = 1024);

}  // namespace relloc::bec
