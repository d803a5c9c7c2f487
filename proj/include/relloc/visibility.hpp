#pragma once

#include <complex>
#include <vector>

#include "relloc/focksim.hpp"

namespace relloc::visibility {

using focksim::cplx;
using focksim::EnsembleKind;
using numkernel::Grid1D;

/// <a^dag a> + <b^dag b> and <a^dag b> of a normalized state.
struct ModeMoments {
  double total = 0.0;
  cplx coherence{};
};

ModeMoments moments_of(const focksim::TwoModeFockState& state);
ModeMoments moments_of(const focksim::MixedEnsemble& ensemble);
/// Conditional moments of an enumerated record (its moments divided by its probability).
ModeMoments moments_of(const focksim::RecordStats& record);

/// Left-port intensity after the phase shifter and a 50:50 splitter,
/// I(tau) = 1/2 <(a^dag + e^{-i tau} b^dag)(a + e^{i tau} b)>.
struct IntensityCurve {
  Grid1D tau_grid;
  std::vector<double> intensity;
};

IntensityCurve intensity_curve(const ModeMoments& moments, const Grid1D& tau_grid);
IntensityCurve intensity_curve(const focksim::TwoModeFockState& state, const Grid1D& tau_grid);
IntensityCurve intensity_curve(const focksim::MixedEnsemble& ensemble, const Grid1D& tau_grid);

/// (I_max - I_min) / (I_max + I_min), extrema refined by a parabola through
/// the neighbouring grid points. Throws std::domain_error for a zero curve.
double visibility_of(const IntensityCurve& curve);

/// |r - l| / (r + l + 1) for Poissonian inputs, |r - l| / (r + l + 2) for
/// thermal ones. Fock inputs throw ConfigurationError.
double closed_form_visibility(EnsembleKind kind, long l, long r);

/// sum_{l,r} P_{l,r} V_{l,r} over records up to `cutoff` total counts
/// (0 selects the shared record-cutoff rule).
double expected_visibility(EnsembleKind kind, double eps, double nbar, long cutoff = 0);

}  // namespace relloc::visibility
