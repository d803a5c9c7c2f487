#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace relloc::numkernel {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Uniform 1-D grid. Periodic grids exclude the upper endpoint
/// (spacing (hi-lo)/n); closed grids include both endpoints.
class Grid1D {
 public:
  Grid1D(double lo, double hi, std::size_t n, bool periodic);

  /// The standard relative-phase grid over [0, 2pi).
  static Grid1D phase(std::size_t n) { return Grid1D(0.0, kTwoPi, n, true); }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::size_t size() const { return n_; }
  bool periodic() const { return periodic_; }
  double spacing() const { return spacing_; }
  double operator[](std::size_t i) const { return lo_ + spacing_ * static_cast<double>(i); }
  std::vector<double> points() const;

  /// Integral of sampled values: rectangle rule on periodic grids,
  /// trapezoid rule on closed grids.
  double integrate(std::span<const double> values) const;

 private:
  double lo_;
  double hi_;
  std::size_t n_;
  bool periodic_;
  double spacing_;
};

/// ln of the Poisson pmf mu^n e^-mu / n!.
double log_poissonian(long n, double mu);

/// ln Gamma via std::lgamma.
double log_gamma(double x);

/// ln of the binomial coefficient C(n, k).
double log_binomial(long n, long k);

/// Torus average of cos^{2r}(D/2) sin^{2l}(D/2), D = phi - theta:
/// Gamma(r+1/2) Gamma(l+1/2) / (pi Gamma(r+l+1)).
double phase_moment_integral(long r, long l);

/// Bessel function of the first kind, order zero.
double bessel_j0(double x);

/// Trapezoid rule on n equispaced points of [0, 2pi); spectrally accurate
/// for smooth periodic integrands.
double periodic_quadrature(const std::function<double(double)>& f, std::size_t n);

/// Exponentiates log-weights after max subtraction, in place. Entries equal
/// to -inf map to 0. Returns the subtracted maximum.
double exp_normalize(std::span<double> log_weights);

/// Scales values so that grid.integrate(values) == 1. Returns the old integral.
double normalize_density(std::span<double> values, const Grid1D& grid);

/// Wraps an angle into [0, 2pi).
double wrap_phase(double x);

/// Signed angular distance a - b folded into [-pi, pi).
double angular_difference(double a, double b);

}  // namespace relloc::numkernel
