#include "relloc/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace relloc::numkernel {

Grid1D::Grid1D(double lo, double hi, std::size_t n, bool periodic)
    : lo_(lo), hi_(hi), n_(n), periodic_(periodic), spacing_(0.0) {
  if (n < 2) throw std::invalid_argument("Grid1D needs at least 2 points");
  if (!(hi > lo)) throw std::invalid_argument("Grid1D needs hi > lo");
  spacing_ = periodic ? (hi - lo) / static_cast<double>(n) : (hi - lo) / static_cast<double>(n - 1);
}

std::vector<double> Grid1D::points() const {
  std::vector<double> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = (*this)[i];
  return out;
}

double Grid1D::integrate(std::span<const double> values) const {
  if (values.size() != n_) throw std::invalid_argument("value count does not match grid");
  double sum = 0.0;
  for (double v : values) sum += v;
  if (!periodic_) sum -= 0.5 * (values.front() + values.back());
  return sum * spacing_;
}

double log_gamma(double x) { return std::lgamma(x); }

double log_poissonian(long n, double mu) {
  if (!(mu > 0.0)) throw std::domain_error("log_poissonian: mu must be positive");
  if (n < 0) return -std::numeric_limits<double>::infinity();
  return static_cast<double>(n) * std::log(mu) - mu - std::lgamma(static_cast<double>(n) + 1.0);
}

double log_binomial(long n, long k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double phase_moment_integral(long r, long l) {
  const double lg = std::lgamma(r + 0.5) + std::lgamma(l + 0.5) - std::lgamma(r + l + 1.0);
  return std::exp(lg) / kPi;
}

double bessel_j0(double x) {
  // libstdc++ rejects negative arguments; J0 is even.
  return std::cyl_bessel_j(0.0, std::fabs(x));
}

double periodic_quadrature(const std::function<double(double)>& f, std::size_t n) {
  if (n < 4) throw std::invalid_argument("periodic_quadrature needs n >= 4");
  const double h = kTwoPi / static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) sum += f(h * static_cast<double>(j));
  return sum * h;
}

double exp_normalize(std::span<double> log_weights) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : log_weights) peak = std::max(peak, v);
  if (!std::isfinite(peak)) throw std::domain_error("exp_normalize: all weights are zero");
  for (double& v : log_weights) v = std::isinf(v) ? 0.0 : std::exp(v - peak);
  return peak;
}

double normalize_density(std::span<double> values, const Grid1D& grid) {
  const double total = grid.integrate(values);
  if (!(total > 0.0)) throw std::domain_error("normalize_density: non-positive integral");
  for (double& v : values) v /= total;
  return total;
}

double wrap_phase(double x) {
  double y = std::fmod(x, kTwoPi);
  if (y < 0.0) y += kTwoPi;
  if (y >= kTwoPi) y -= kTwoPi;
  return y;
}

double angular_difference(double a, double b) {
  double d = wrap_phase(a - b);
  if (d >= kPi) d -= kTwoPi;
  return d;
}

}  // namespace relloc::numkernel
