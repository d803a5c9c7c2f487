// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "relloc/bec.hpp"
#include "relloc/focksim.hpp"
#include "relloc/phaseloc.hpp"
#include "relloc/posloc.hpp"
#include "relloc/visibility.hpp"

using namespace relloc;
using numkernel::Grid1D;
using numkernel::kPi;
using numkernel::kTwoPi;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!v.pass) ++failures;
  std::cout << fmt::format("{} [{:2}] {}: {} ({:.1f} s)", v.pass ? "PASS" : "FAIL", id, name, v.detail, secs)
            << std::endl;
}

Verdict two_detection() {
  double worst = 0.0;
  for (long n = 1; n <= 10; ++n) {
    for (long m = 1; m <= 10; ++m) {
      const auto p = focksim::two_detection_probabilities(n, m);
      const double nn = static_cast<double>(n), mm = static_cast<double>(m);
      const double den = nn * nn + mm * mm - nn - mm;
      const double expect = (den + 4.0 * nn * mm) / den;
      if (den == 0.0) {
        if (p.different != 0.0) worst = 1.0;
        continue;
      }
      worst = std::max(worst, std::fabs(p.same / p.different - expect) / expect);
    }
  }
  const auto hom = focksim::two_detection_probabilities(1, 1);
  const double same_fraction = hom.same / (hom.same + hom.different);
  return {worst <= 1e-12 && same_fraction == 1.0,
          fmt::format("max relative ratio error {:.2e} over 1<=N,M<=10; N=M=1 same-port probability {}", worst,
                      same_fraction)};
}

Verdict peak_law() {
  const Grid1D grid = Grid1D::phase(1024);
  double worst = 0.0;
  long checked = 0;
  for (long total = 1; total <= 30; ++total) {
    for (long l = 0; l <= total; ++l) {
      const long r = total - l;
      const double delta0 = 2.0 * std::acos(std::sqrt(static_cast<double>(r) / static_cast<double>(total)));
      const double at = phaseloc::clr_density({l, r, 0.0}, grid).argmax_location();
      const double err = std::min(std::fabs(numkernel::angular_difference(at, delta0)),
                                  std::fabs(numkernel::angular_difference(at, kTwoPi - delta0)));
      worst = std::max(worst, err);
      ++checked;
    }
  }
  const double fig = phaseloc::clr_density({2, 1, 0.0}, grid).argmax_location();
  const double fig_expect = 2.0 * std::acos(1.0 / std::sqrt(3.0));
  const double fig_err = std::min(std::fabs(fig - fig_expect), std::fabs(fig - (kTwoPi - fig_expect)));
  return {worst <= grid.spacing() && fig_err <= grid.spacing(),
          fmt::format("{} records, worst argmax offset {:.2e} (spacing {:.2e}); (l,r)=(2,1) peak {:.4f} vs {:.4f}",
                      checked, worst, grid.spacing(), std::min(fig, kTwoPi - fig), fig_expect)};
}

Verdict approx_accuracy() {
  bool ok = true;
  std::string detail;
  for (double eps : {0.05, 0.1, 0.2}) {
    const auto recs = focksim::enumerate_records(focksim::MixedEnsemble::fock(20, 20), eps, 40);
    double by_exact = 0.0, exact_mass = 0.0, by_approx = 0.0, approx_mass = 0.0;
    for (const auto& r : recs) {
      if (r.probability <= 0.0) continue;
      const double approx = phaseloc::plr_fock_approx(r.l, r.r, 20.0, eps);
      const double frac = std::fabs(approx - r.probability) / r.probability;
      by_exact += r.probability * frac;
      exact_mass += r.probability;
      by_approx += approx * frac;
      approx_mass += approx;
    }
    const double e1 = by_exact / exact_mass, e2 = by_approx / approx_mass;
    ok = ok && e1 >= 0.3 * eps && e1 <= 1.2 * eps;
    detail += fmt::format("eps={}: {:.3f} eps (exact-weighted), {:.3f} eps (approx-weighted); ", eps, e1 / eps, e2 / eps);
  }
  return {ok, detail + "window [0.3, 1.2] eps on the exact-weighted mean"};
}

Verdict fig3_mode() {
  const auto recs = focksim::enumerate_records(focksim::MixedEnsemble::fock(20, 20), 0.2, 40);
  std::map<long, double> by_total;
  for (const auto& r : recs) by_total[r.l + r.r] += r.probability;
  const auto mode = std::max_element(by_total.begin(), by_total.end(),
                                     [](const auto& a, const auto& b) { return a.second < b.second; })->first;
  const auto pois = focksim::enumerate_records(focksim::MixedEnsemble::poissonian(20.0), 0.2, 40);
  std::map<long, double> pois_total;
  for (const auto& r : pois) pois_total[r.l + r.r] += r.probability;
  const auto pois_mode = std::max_element(pois_total.begin(), pois_total.end(),
                                          [](const auto& a, const auto& b) { return a.second < b.second; })->first;
  return {std::abs(mode - 7) <= 1,
          fmt::format("most likely total count {} for |20,20> (Poissonian inputs of mean 20: {})", mode, pois_mode)};
}

Verdict visibility_oracle() {
  const Grid1D tau = Grid1D::phase(512);
  double worst = 0.0;
  long checked = 0;
  for (auto kind : {focksim::EnsembleKind::poissonian, focksim::EnsembleKind::thermal}) {
    for (double nbar : {5.0, 10.0}) {
      // Conditioning on 12 counts amplifies the truncated tail, so keep it below 1e-14.
      const auto ens = kind == focksim::EnsembleKind::poissonian ? focksim::MixedEnsemble::poissonian(nbar, 0, 1e-14)
                                                                  : focksim::MixedEnsemble::thermal(nbar, 0, 1e-14);
      for (double eps : {0.1, 0.2}) {
        for (const auto& rec : focksim::enumerate_records(ens, eps, 12)) {
          if (rec.probability < 1e-300) continue;
          const double v = visibility::visibility_of(visibility::intensity_curve(visibility::moments_of(rec), tau));
          worst = std::max(worst, std::fabs(v - visibility::closed_form_visibility(kind, rec.l, rec.r)));
          ++checked;
        }
      }
    }
  }
  const auto spot = [&](const focksim::MixedEnsemble& ens) {
    for (const auto& rec : focksim::enumerate_records(ens, 0.1, 1)) {
      if (rec.l == 0 && rec.r == 1) {
        return visibility::visibility_of(visibility::intensity_curve(visibility::moments_of(rec), tau));
      }
    }
    return -1.0;
  };
  const double vp = spot(focksim::MixedEnsemble::poissonian(5.0));
  const double vt = spot(focksim::MixedEnsemble::thermal(5.0));
  const bool ok = worst <= 1e-6 && std::fabs(vp - 0.5) <= 1e-6 && std::fabs(vt - 1.0 / 3.0) <= 1e-6;
  return {ok, fmt::format("{} conditional states, max |V - closed form| {:.2e}; one count: {:.6f} (Poissonian), "
                          "{:.6f} (thermal)",
                          checked, worst, vp, vt)};
}

Verdict thermal_law() {
  const double nbar = 5.0, eps = 0.1;
  const long cutoff = phaseloc::thermal_record_cutoff(nbar, eps);
  double sum = 0.0;
  for (long k = 0; k <= cutoff; ++k) {
    for (long l = 0; l <= k; ++l) sum += phaseloc::plr_thermal(l, k - l, nbar, eps);
  }
  double worst = 0.0;
  for (const auto& r : focksim::enumerate_records(focksim::MixedEnsemble::thermal(nbar), eps, 10)) {
    worst = std::max(worst, std::fabs(r.probability - phaseloc::plr_thermal(r.l, r.r, nbar, eps)));
  }
  return {std::fabs(sum - 1.0) <= 1e-9 && worst <= 1e-8,
          fmt::format("closed-form total {:.12f} (cutoff {}); max |enumerated - closed| {:.2e} for l+r<=10", sum,
                      cutoff, worst)};
}

Verdict fig5() {
  bool ok = true;
  std::string detail;
  for (double nbar : {5.0, 15.0}) {
    double prev_p = -1.0, prev_t = -1.0, min_gap = 1.0;
    bool mono = true;
    for (int i = 1; i <= 19; ++i) {
      const double eps = 0.05 * i;
      const double p = visibility::expected_visibility(focksim::EnsembleKind::poissonian, eps, nbar);
      const double t = visibility::expected_visibility(focksim::EnsembleKind::thermal, eps, nbar);
      mono = mono && p > prev_p && t > prev_t;
      min_gap = std::min(min_gap, p - t);
      prev_p = p;
      prev_t = t;
    }
    ok = ok && mono && min_gap > 0.0;
    detail += fmt::format("nbar={}: monotone {}, min(Poissonian - thermal) {:.4f}, V(0.95) {:.3f}/{:.3f}; ", nbar,
                          mono ? "yes" : "no", min_gap, prev_p, prev_t);
  }
  return {ok, detail + "eps = 0.05..0.95"};
}

Verdict bec_likely() {
  const Grid1D grid = Grid1D::phase(1024);
  bool ok = true;
  std::string detail;
  const std::map<long, double> target = {{3, 0.9}, {8, 0.8}, {15, 0.8}};
  for (auto [M, mass] : target) {
    const auto ev = bec::likely_events(M, grid);
    const bool unique = std::all_of(ev.events.begin(), ev.events.end(), [](const auto& e) { return e.unique_peak; });
    ok = ok && std::fabs(ev.likely_mass - mass) <= 0.05 && unique;
    detail += fmt::format("M={}: mass {:.4f} over {} records, unique peaks {}; ", M, ev.likely_mass, ev.events.size(),
                          unique ? "all" : "NOT all");
  }
  return {ok, detail + "targets 0.9/0.8/0.8 +- 0.05"};
}

Verdict bec_rate() {
  const Grid1D grid = Grid1D::phase(1024);
  bool ok = true;
  std::string detail;
  for (long M : {3L, 8L, 15L}) {
    const auto ev = bec::likely_events(M, grid);
    const double lo = 0.8 * std::sqrt(2.0 / M), hi = 1.2 * 2.0 / std::sqrt(static_cast<double>(M));
    double mn = 1e9, mx = 0.0;
    for (const auto& e : ev.events) {
      mn = std::min(mn, e.halfwidth);
      mx = std::max(mx, e.halfwidth);
    }
    ok = ok && mn >= lo && mx <= hi;
    detail += fmt::format("M={}: half-widths [{:.3f}, {:.3f}] in [{:.3f}, {:.3f}]; ", M, mn, mx, lo, hi);
  }
  const double k = 2.0;
  double worst_std30 = 0.0, min_hw30 = 1e9, max_hw1000 = 0.0, min_v = 1e9;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto run = bec::simulate_fringes(2000.0, 1000, k, seed);
    const auto xs = run.positions();
    const std::span<const double> early(xs.data(), 30);
    const auto boot30 = bec::bootstrap_visibility(early, k, seed + 1000);
    const auto boot1000 = bec::bootstrap_visibility(xs, k, seed + 1000);
    worst_std30 = std::max(worst_std30, run.timeline[29].std_dev);
    min_hw30 = std::min(min_hw30, boot30.half_width());
    max_hw1000 = std::max(max_hw1000, boot1000.half_width());
    min_v = std::min(min_v, bec::fit_fringes(xs, k).visibility);
  }
  ok = ok && worst_std30 < 0.4 && min_hw30 > 0.2 && max_hw1000 < 0.1 && min_v >= 0.9;
  detail += fmt::format(
      "10 runs (nbar 2000): posterior std after 30 atoms <= {:.3f} rad while the 30-atom visibility "
      "95% half-width >= {:.3f}; 1000 atoms: half-width <= {:.3f}, fitted V >= {:.3f}",
      worst_std30, min_hw30, max_hw1000, min_v);
  return {ok, detail};
}

Verdict bessel() {
  using posloc::ScatterOutcome;
  const double k = 5.0, wave = kTwoPi / k, len = 10.0 * wave;
  const Grid1D grid = posloc::separation_grid(0.0, len, 2001);
  const auto uniform = posloc::uniform_prior(grid);
  const auto prior = posloc::thermal_prior(0.0, len, 0.2 * wave, grid);
  double worst_linf = 0.0, worst_l1 = 0.0;
  long worst_f = -1;
  for (long f = 0; f <= 5; ++f) {
    auto p0 = uniform, a = prior, b = prior;
    for (long j = 0; j < 5; ++j) {
      const auto o = j < f ? ScatterOutcome::forward : ScatterOutcome::deflect;
      p0 = posloc::coarse_scatter_update(p0, o, k, 0.0);
      a = posloc::coarse_scatter_update(a, o, k, 0.01);
      b = posloc::coarse_scatter_update(b, o, k, 0.05);
    }
    const auto ref = posloc::bessel_pattern(f, 5 - f, k, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) worst_linf = std::max(worst_linf, std::fabs(p0[i] - ref[i]));
    const double l1 = posloc::l1_distance(a, b);
    if (l1 > worst_l1) {
      worst_l1 = l1;
      worst_f = f;
    }
  }
  auto deflected = prior;
  for (int j = 0; j < 5; ++j) deflected = posloc::coarse_scatter_update(deflected, ScatterOutcome::deflect, k, 0.01);
  const double peak_at = grid[deflected.argmax()];
  const bool ok = worst_linf <= 1e-6 && worst_l1 <= 0.02 && std::fabs(peak_at) <= 0.5 * grid.spacing();
  return {ok, fmt::format("eps=0 vs [1-J0]^F[1+J0]^D: L-inf {:.2e}; eps 0.01 vs 0.05: worst L1 {:.4f} at F={}, D={} "
                          "(limit 0.02); all-deflect peak at dr={:.2e}",
                          worst_linf, worst_l1, worst_f, 5 - worst_f, peak_at)};
}

Verdict rubber() {
  const double k = 5.0, len = 10.0 * kTwoPi / k;
  const Grid1D grid = posloc::separation_grid(0.0, len, 4001);
  const auto comb = posloc::rubber_cavity_localize(posloc::uniform_prior(grid), 0, 15, k);
  const double period = kPi * std::sqrt(2.0) / k;
  const double measured = comb.mean_peak_spacing();
  double worst = 0.0;
  for (auto [l, r] : std::vector<std::pair<long, long>>{{0, 1}, {0, 15}, {1, 0}, {2, 1}, {7, 11}, {20, 10}}) {
    worst = std::max(worst, posloc::rubber_clr_distance(l, r, k));
  }
  return {std::fabs(measured - period) <= grid.spacing() && worst <= 1e-8,
          fmt::format("comb spacing {:.5f} vs pi sqrt2/k = {:.5f} (grid step {:.4f}); max |rubber - clr| {:.2e}",
                      measured, period, grid.spacing(), worst)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism() {
  const std::filesystem::path golden = std::filesystem::path(RELLOC_TEST_DATA_DIR);
  const auto tmp = std::filesystem::temp_directory_path();
  const std::vector<std::string> experiments = {"fock-phase",        "poissonian-phase", "thermal-phase",
                                                "visibility-curves", "bec-likely-events", "bec-fringes",
                                                "rubber-cavity",     "scattering",       "thermal-scattering"};
  long identical = 0, runs = 0;
  for (const auto& name : experiments) {
    for (const char* format : {"csv", "json"}) {
      const auto out = tmp / fmt::format("relloc_accept_{}.{}", name, format);
      const std::string cmd = fmt::format("{} {} --config {} --seed 424242 --format {} --out {}", RELLOC_TOOL_PATH,
                                          name, (golden / (name + ".cfg")).string(), format, out.string());
      if (std::system(cmd.c_str()) != 0) return {false, "run failed: " + cmd};
      const auto first = slurp(out);
      if (std::system(cmd.c_str()) != 0) return {false, "rerun failed: " + cmd};
      identical += !first.empty() && first == slurp(out);
      ++runs;
      std::filesystem::remove(out);
    }
  }
  return {identical == runs, fmt::format("{}/{} reruns byte-identical (9 experiments, csv and json)", identical, runs)};
}

}  // namespace

int main() {
  criterion(1, "two-detection ratio", two_detection);
  criterion(2, "peak law", peak_law);
  criterion(3, "leakage-model accuracy", approx_accuracy);
  criterion(4, "most likely total count", fig3_mode);
  criterion(5, "visibility oracle", visibility_oracle);
  criterion(6, "thermal record law", thermal_law);
  criterion(7, "expected-visibility curves", fig5);
  criterion(8, "BEC likely events", bec_likely);
  criterion(9, "BEC localization rate", bec_rate);
  criterion(10, "Bessel scattering patterns", bessel);
  criterion(11, "rubber cavity", rubber);
  criterion(12, "determinism", determinism);
  std::cout << fmt::format("{} of 12 criteria passed", 12 - failures) << std::endl;
  return failures == 0 ? 0 : 1;
}
