#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "relloc/bec.hpp"
#include "relloc/errors.hpp"

using namespace relloc::bec;
using relloc::numkernel::kPi;

TEST_CASE("position reduction") {
  const double k = 2.5;
  auto z = reduce_position(0.0, k);
  CHECK(z.x == 0.0);
  CHECK_FALSE(z.flipped);
  auto p = reduce_position(kPi / k, k);
  CHECK(p.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_FALSE(p.flipped);
  auto q = reduce_position(3 * kPi / (4 * k), k);
  CHECK(q.x == doctest::Approx(kPi / (4 * k)));
  CHECK(q.flipped);
  for (double x : {-3.3, 0.1, 0.9, 5.7, 12.0}) {
    auto a = reduce_position(x, k);
    auto b = reduce_position(x + 7 * kPi / k, k);
    CHECK(a.x == doctest::Approx(b.x).epsilon(1e-9));
    CHECK(a.flipped == b.flipped);
    auto again = reduce_position(a.x, k);
    CHECK(again.x == doctest::Approx(a.x));
    CHECK_FALSE(again.flipped);
    CHECK(a.x >= 0.0);
    CHECK(a.x < kPi / (2 * k));
  }
  CHECK_THROWS_AS(reduce_position(1.0, 0.0), std::domain_error);
}

TEST_CASE("two-setting densities") {
  const auto grid = Grid1D::phase(1024);
  auto uni = two_setting_density({0, 0, 0, 0, 0}, grid);
  CHECK(uni[100] == doctest::Approx(1.0 / (2 * kPi)));

  const TwoSettingRecord rec{6, 2, 4, 5, 1};
  auto d = two_setting_density(rec, grid);
  auto a = relloc::phaseloc::clr_density({2, 4, 0.0}, grid);
  auto b = relloc::phaseloc::clr_density({5, 1, kPi / 2}, grid);
  std::vector<double> prod(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) prod[i] = a[i] * b[i];
  relloc::numkernel::normalize_density(prod, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(d[i] == doctest::Approx(prod[i]).epsilon(1e-10));

  CHECK(two_setting_density({5, 5, 0, 5, 0}, grid).has_unique_global_peak());
  CHECK_THROWS_AS(two_setting_density({3, 1, 1, 3, 0}, grid), std::invalid_argument);
}

TEST_CASE("enumerated record probabilities agree with the phase average") {
  for (long M : {1L, 3L, 5L}) {
    const auto prob = two_setting_probabilities(M, 12.0);
    double total = 0.0;
    for (long l1 = 0; l1 <= M; ++l1)
      for (long l2 = 0; l2 <= M; ++l2) {
        total += prob[l1][l2];
        CHECK(prob[l1][l2] ==
              doctest::Approx(two_setting_probability_quadrature({M, l1, M - l1, l2, M - l2})).epsilon(1e-8));
      }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("likely events for three detections per setting") {
  const auto grid = Grid1D::phase(1024);
  auto res = likely_events(3, grid);
  CHECK(res.threshold == doctest::Approx(1.0 / 16));
  CHECK(res.total_probability == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(res.likely_mass == doctest::Approx(0.9).epsilon(0.05 / 0.9));
  for (const auto& ev : res.events) {
    CHECK(ev.unique_peak);
    CHECK(ev.probability > res.threshold);
    CHECK(ev.halfwidth == doctest::Approx(2 * ev.std_dev));
  }
}

TEST_CASE("fringe fitting") {
  const double k = 3.0, delta0 = 1.2;
  // Deterministic quantile sample of cos^2(kx - delta0/2) over one period.
  std::vector<double> xs;
  const int n = 4000;
  const double period = kPi / k;
  std::vector<double> cdf(2001);
  for (int i = 1; i <= 2000; ++i) {
    const double x = period * (i - 0.5) / 2000;
    const double c = std::cos(k * x - delta0 / 2);
    cdf[i] = cdf[i - 1] + c * c;
  }
  for (int j = 0; j < n; ++j) {
    const double u = (j + 0.5) / n * cdf.back();
    int i = 1;
    while (cdf[i] < u) ++i;
    xs.push_back(period * (i - 0.5) / 2000 + period * (j % 5));
  }
  auto fit = fit_fringes(xs, k);
  CHECK(fit.visibility == doctest::Approx(1.0).epsilon(0.02));
  CHECK(fit.delta0 == doctest::Approx(delta0).epsilon(0.01));

  std::vector<double> flat;
  for (int j = 0; j < 3200; ++j) flat.push_back(period * (j + 0.5) / 3200);
  CHECK(fit_fringes(flat, k).visibility < 1e-3);
  CHECK_THROWS_AS(fit_fringes(std::vector<double>{}, k), std::domain_error);
}

TEST_CASE("simulated fringes") {
  auto a = simulate_fringes(400.0, 200, 2.0, 17);
  auto b = simulate_fringes(400.0, 200, 2.0, 17);
  REQUIRE(a.events.size() == 200);
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    CHECK(a.events[i].x == b.events[i].x);
    CHECK(a.events[i].port == b.events[i].port);
    auto red = reduce_position(a.events[i].x, 2.0);
    CHECK(red.flipped == (a.events[i].port == Port::left));
    CHECK(2.0 * 2.0 * red.x == doctest::Approx(a.events[i].reduced_tau).epsilon(1e-9));
  }
  // Posterior width shrinks roughly like n^{-1/2}.
  CHECK(a.timeline.back().std_dev < 2.0 / std::sqrt(200.0));
  auto fit = fit_fringes(a.positions(), 2.0);
  CHECK(fit.visibility > 0.7);
  CHECK(std::fabs(relloc::numkernel::angular_difference(fit.delta0, a.timeline.back().peak)) < 0.5);

  CHECK_THROWS_AS(simulate_fringes(10.0, 100, 2.0, 1), relloc::CutoffOverflow);
}

TEST_CASE("bootstrap interval") {
  auto run = simulate_fringes(400.0, 30, 2.0, 5);
  auto xs = run.positions();
  auto iv = bootstrap_visibility(xs, 2.0, 9);
  CHECK(iv.lo <= iv.estimate);
  CHECK(iv.hi >= iv.lo);
  auto again = bootstrap_visibility(xs, 2.0, 9);
  CHECK(again.lo == iv.lo);
  CHECK(again.hi == iv.hi);
}
