#include "relloc/visibility.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "relloc/errors.hpp"

namespace relloc::visibility {

namespace {

// Vertex height of the parabola through (-1, a), (0, b), (1, c).
double parabola_peak(double a, double b, double c) {
  const double curv = a - 2.0 * b + c;
  if (curv == 0.0) return b;
  const double x = 0.5 * (a - c) / curv;
  if (std::fabs(x) > 1.0) return b;
  return b - 0.25 * (a - c) * x;
}

double refine(const IntensityCurve& curve, std::size_t i) {
  const auto& v = curve.intensity;
  const std::size_t n = v.size();
  if (!curve.tau_grid.periodic() && (i == 0 || i + 1 == n)) return v[i];
  return parabola_peak(v[(i + n - 1) % n], v[i], v[(i + 1) % n]);
}

}  // namespace

ModeMoments moments_of(const focksim::TwoModeFockState& state) {
  const double n2 = state.norm_sq();
  if (!(n2 > 0.0)) throw std::domain_error("moments of the zero vector");
  return {state.total_number() / n2, state.coherence() / n2};
}

ModeMoments moments_of(const focksim::MixedEnsemble& ensemble) {
  double w = 0.0, total = 0.0;
  for (const auto& mem : ensemble.members) {
    w += mem.weight;
    total += mem.weight * static_cast<double>(mem.n + mem.m);
  }
  if (!(w > 0.0)) throw std::domain_error("empty ensemble");
  return {total / w, {}};
}

ModeMoments moments_of(const focksim::RecordStats& record) {
  if (!(record.probability > 0.0)) throw std::domain_error("record has zero probability");
  return {record.total_number / record.probability, record.coherence / record.probability};
}

IntensityCurve intensity_curve(const ModeMoments& moments, const Grid1D& tau_grid) {
  IntensityCurve c{tau_grid, std::vector<double>(tau_grid.size())};
  for (std::size_t i = 0; i < tau_grid.size(); ++i) {
    const double v = 0.5 * moments.total + std::real(std::polar(1.0, tau_grid[i]) * moments.coherence);
    c.intensity[i] = std::max(0.0, v);
  }
  return c;
}

IntensityCurve intensity_curve(const focksim::TwoModeFockState& state, const Grid1D& tau_grid) {
  if (state.is_zero()) return {tau_grid, std::vector<double>(tau_grid.size(), 0.0)};
  return intensity_curve(moments_of(state), tau_grid);
}

IntensityCurve intensity_curve(const focksim::MixedEnsemble& ensemble, const Grid1D& tau_grid) {
  return intensity_curve(moments_of(ensemble), tau_grid);
}

double visibility_of(const IntensityCurve& curve) {
  const auto& v = curve.intensity;
  if (v.empty() || *std::max_element(v.begin(), v.end()) <= 0.0) {
    throw std::domain_error("visibility is undefined for a zero intensity curve");
  }
  const auto hi_it = std::max_element(v.begin(), v.end());
  const auto lo_it = std::min_element(v.begin(), v.end());
  const double hi = std::max(*hi_it, refine(curve, static_cast<std::size_t>(hi_it - v.begin())));
  const double lo = std::max(0.0, std::min(*lo_it, refine(curve, static_cast<std::size_t>(lo_it - v.begin()))));
  return std::clamp((hi - lo) / (hi + lo), 0.0, 1.0);
}

double closed_form_visibility(EnsembleKind kind, long l, long r) {
  if (l < 0 || r < 0) throw std::invalid_argument("counts must be nonnegative");
  const double diff = static_cast<double>(std::labs(r - l));
  const double sum = static_cast<double>(r + l);
  switch (kind) {
    case EnsembleKind::poissonian:
      return diff / (sum + 1.0);
    case EnsembleKind::thermal:
      return diff / (sum + 2.0);
    default:
      throw ConfigurationError("closed-form visibility exists for Poissonian and thermal inputs only");
  }
}

double expected_visibility(EnsembleKind kind, double eps, double nbar, long cutoff) {
  if (kind == EnsembleKind::fock) throw ConfigurationError("expected visibility needs Poissonian or thermal inputs");
  if (cutoff == 0) {
    cutoff = kind == EnsembleKind::poissonian ? phaseloc::poissonian_record_cutoff(nbar, eps)
                                              : phaseloc::thermal_record_cutoff(nbar, eps);
  }
  double sum = 0.0;
  for (long k = 0; k <= cutoff; ++k) {
    for (long l = 0; l <= k; ++l) {
      const long r = k - l;
      const double p = kind == EnsembleKind::poissonian ? phaseloc::plr_fock_approx(l, r, nbar, eps)
                                                        : phaseloc::plr_thermal(l, r, nbar, eps);
      sum += p * closed_form_visibility(kind, l, r);
    }
  }
  return sum;
}

}  // namespace relloc::visibility
