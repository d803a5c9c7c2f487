#include "relloc/focksim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "relloc/errors.hpp"

namespace relloc::focksim {

using numkernel::kPi;
using numkernel::kTwoPi;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

double port_sign(Port p) { return p == Port::left ? -1.0 : 1.0; }

cplx port_phase(Port p, double tau) { return port_sign(p) * std::polar(1.0, -tau); }

void check_eps_open(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("leakage eps must lie in (0, 1)");
}

double log_sum_exp(std::span<const double> xs) {
  double top = kNegInf;
  for (double x : xs) top = std::max(top, x);
  if (top == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - top);
  return top + std::log(s);
}

// Smallest c >= floor with per-mode tail mass (beyond c) below tail.
template <class LogPmf>
long pick_cutoff(LogPmf log_pmf, long floor_c, double tail) {
  double mass = 0.0;
  long c = 0;
  for (;; ++c) {
    mass += std::exp(log_pmf(c));
    if (c >= floor_c && 1.0 - mass < tail) return c;
    if (c > 100000) throw CutoffOverflow("no cutoff below 100000 captures the ensemble");
  }
}

MixedEnsemble product_ensemble(EnsembleKind kind, double nbar, long cutoff, double tail,
                               const std::function<double(long)>& log_pmf) {
  if (!(nbar > 0.0)) throw std::domain_error("mean occupancy must be positive");
  const long floor_c = static_cast<long>(std::ceil(nbar + 5.0 * std::sqrt(nbar)));
  if (cutoff == 0) {
    cutoff = pick_cutoff(log_pmf, floor_c, tail);
  } else {
    double mass = 0.0;
    for (long n = 0; n <= cutoff; ++n) mass += std::exp(log_pmf(n));
    if (1.0 - mass > tail) throw CutoffOverflow("cutoff leaves too much ensemble mass outside the grid");
  }
  MixedEnsemble e;
  e.kind = kind;
  e.nbar = nbar;
  e.cutoff = cutoff;
  std::vector<double> single(static_cast<std::size_t>(cutoff + 1));
  double z = 0.0;
  for (long n = 0; n <= cutoff; ++n) z += (single[n] = std::exp(log_pmf(n)));
  for (long n = 0; n <= cutoff; ++n) {
    for (long m = 0; m <= cutoff; ++m) {
      const double w = single[n] * single[m] / (z * z);
      if (w > 0.0) e.members.push_back({w, n, m});
    }
  }
  return e;
}

double thermal_log_pmf(double nbar, long n) {
  return static_cast<double>(n) * std::log(nbar) - static_cast<double>(n + 1) * std::log1p(nbar);
}

struct ScaledVector {
  FixedTotalState state;
  double log_scale = 0.0;  // true vector = exp(log_scale / 2) * state

  void step(Port port) {
    state = state.detect(port, 0.0);
    const double n2 = state.norm_sq();
    if (n2 == 0.0) {
      log_scale = kNegInf;
      return;
    }
    state.normalize();
    log_scale += std::log(n2);
  }
};

}  // namespace

// ---------------------------------------------------------------- dense state

TwoModeFockState::TwoModeFockState(long cutoff) : cutoff_(cutoff) {
  if (cutoff < 0) throw std::invalid_argument("cutoff must be nonnegative");
  amp_.assign(static_cast<std::size_t>((cutoff + 1) * (cutoff + 1)), cplx{});
}

std::size_t TwoModeFockState::index(long n, long m) const {
  return static_cast<std::size_t>(n * (cutoff_ + 1) + m);
}

TwoModeFockState TwoModeFockState::fock(long n, long m, long cutoff) {
  if (n < 0 || m < 0) throw std::invalid_argument("occupancies must be nonnegative");
  if (n > cutoff || m > cutoff) throw CutoffOverflow("Fock occupancy exceeds the cutoff");
  TwoModeFockState s(cutoff);
  s.at(n, m) = 1.0;
  return s;
}

TwoModeFockState TwoModeFockState::coherent(cplx alpha, cplx beta, long cutoff, double tail) {
  TwoModeFockState s(cutoff);
  auto coeffs = [cutoff](cplx z) {
    std::vector<cplx> c(static_cast<std::size_t>(cutoff + 1));
    const double mu = std::norm(z);
    for (long n = 0; n <= cutoff; ++n) {
      const double mod = mu > 0.0 ? std::exp(0.5 * numkernel::log_poissonian(n, mu)) : (n == 0 ? 1.0 : 0.0);
      c[n] = std::polar(mod, static_cast<double>(n) * std::arg(z));
    }
    return c;
  };
  const auto ca = coeffs(alpha), cb = coeffs(beta);
  for (long n = 0; n <= cutoff; ++n) {
    for (long m = 0; m <= cutoff; ++m) s.at(n, m) = ca[n] * cb[m];
  }
  if (1.0 - s.norm_sq() > tail) throw CutoffOverflow("coherent state does not fit the cutoff");
  return s;
}

double TwoModeFockState::norm_sq() const {
  double s = 0.0;
  for (const auto& a : amp_) s += std::norm(a);
  return s;
}

double TwoModeFockState::normalize() {
  const double n2 = norm_sq();
  if (!(n2 > 0.0)) throw std::domain_error("cannot normalize the zero vector");
  const double inv = 1.0 / std::sqrt(n2);
  for (auto& a : amp_) a *= inv;
  norm_log_ += std::log(n2);
  return n2;
}

double TwoModeFockState::total_number() const {
  double s = 0.0;
  for (long n = 0; n <= cutoff_; ++n) {
    for (long m = 0; m <= cutoff_; ++m) s += static_cast<double>(n + m) * std::norm(at(n, m));
  }
  return s;
}

cplx TwoModeFockState::coherence() const {
  cplx s{};
  for (long n = 0; n < cutoff_; ++n) {
    for (long m = 1; m <= cutoff_; ++m) {
      s += std::conj(at(n + 1, m - 1)) * std::sqrt(static_cast<double>((n + 1) * m)) * at(n, m);
    }
  }
  return s;
}

long TwoModeFockState::min_total() const {
  long best = -1;
  for (long n = 0; n <= cutoff_; ++n) {
    for (long m = 0; m <= cutoff_; ++m) {
      if (at(n, m) != cplx{} && (best < 0 || n + m < best)) best = n + m;
    }
  }
  return best;
}

long TwoModeFockState::max_total() const {
  long best = -1;
  for (long n = 0; n <= cutoff_; ++n) {
    for (long m = 0; m <= cutoff_; ++m) {
      if (at(n, m) != cplx{}) best = std::max(best, n + m);
    }
  }
  return best;
}

void TwoModeFockState::scale(cplx factor) {
  for (auto& a : amp_) a *= factor;
}

TwoModeFockState apply_detection(const TwoModeFockState& state, const JumpEvent& event) {
  const long c = state.cutoff();
  const cplx ph = port_phase(event.detector, event.tau);
  TwoModeFockState out(c);
  for (long n = 0; n <= c; ++n) {
    for (long m = 0; m <= c; ++m) {
      cplx v{};
      if (n < c) v += std::sqrt(static_cast<double>(n + 1)) * state.at(n + 1, m);
      if (m < c) v += ph * std::sqrt(static_cast<double>(m + 1)) * state.at(n, m + 1);
      out.at(n, m) = v * kInvSqrt2;
    }
  }
  return out;
}

TwoModeFockState apply_leakage(const TwoModeFockState& state, double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw std::domain_error("leakage eps must lie in [0, 1)");
  TwoModeFockState out = state;
  if (eps == 0.0) return out;
  const double half_log = 0.5 * std::log1p(-eps);
  for (long n = 0; n <= state.cutoff(); ++n) {
    for (long m = 0; m <= state.cutoff(); ++m) out.at(n, m) *= std::exp(half_log * static_cast<double>(n + m));
  }
  return out;
}

// ---------------------------------------------------------------- block state

FixedTotalState::FixedTotalState(long total) : total_(total) {
  if (total < 0) throw std::invalid_argument("block total must be nonnegative");
  amp_.assign(static_cast<std::size_t>(total + 1), cplx{});
}

FixedTotalState FixedTotalState::fock(long n, long m) {
  if (n < 0 || m < 0) throw std::invalid_argument("occupancies must be nonnegative");
  FixedTotalState s(n + m);
  s[n] = 1.0;
  return s;
}

double FixedTotalState::norm_sq() const {
  double s = 0.0;
  for (const auto& a : amp_) s += std::norm(a);
  return s;
}

double FixedTotalState::normalize() {
  const double n2 = norm_sq();
  if (!(n2 > 0.0)) throw std::domain_error("cannot normalize the zero vector");
  const double inv = 1.0 / std::sqrt(n2);
  for (auto& a : amp_) a *= inv;
  return n2;
}

cplx FixedTotalState::coherence() const {
  cplx s{};
  for (long n = 0; n < total_; ++n) {
    const long m = total_ - n;
    s += std::conj(amp_[n + 1]) * std::sqrt(static_cast<double>((n + 1) * m)) * amp_[n];
  }
  return s;
}

FixedTotalState FixedTotalState::detect(Port port, double tau) const {
  if (total_ <= 0) return FixedTotalState(0);  // zero vector in the vacuum block
  const cplx ph = port_phase(port, tau);
  FixedTotalState out(total_ - 1);
  for (long n = 0; n < total_; ++n) {
    const long m_new = total_ - 1 - n;
    out.amp_[n] = (std::sqrt(static_cast<double>(n + 1)) * amp_[n + 1] +
                   ph * std::sqrt(static_cast<double>(m_new + 1)) * amp_[n]) *
                  kInvSqrt2;
  }
  return out;
}

double FixedTotalState::detection_weight(Port port, double tau) const {
  if (total_ <= 0) return 0.0;
  const cplx ph = port_phase(port, tau);
  double s = 0.0;
  for (long n = 0; n < total_; ++n) {
    const long m_new = total_ - 1 - n;
    s += std::norm(std::sqrt(static_cast<double>(n + 1)) * amp_[n + 1] +
                   ph * std::sqrt(static_cast<double>(m_new + 1)) * amp_[n]);
  }
  return 0.5 * s;
}

TwoModeFockState FixedTotalState::to_dense(long cutoff) const {
  TwoModeFockState s(cutoff);
  for (long n = 0; n <= total_; ++n) {
    const long m = total_ - n;
    if (amp_[n] == cplx{}) continue;
    if (n > cutoff || m > cutoff) throw CutoffOverflow("block state does not fit the cutoff");
    s.at(n, m) = amp_[n];
  }
  return s;
}

FixedTotalState FixedTotalState::from_dense(const TwoModeFockState& state) {
  const long lo = state.min_total(), hi = state.max_total();
  if (lo < 0) throw std::domain_error("zero state has no number block");
  if (lo != hi) throw ConfigurationError("state spans several total-number blocks");
  FixedTotalState s(lo);
  for (long n = std::max(0L, lo - state.cutoff()); n <= std::min(lo, state.cutoff()); ++n) s[n] = state.at(n, lo - n);
  return s;
}

// ---------------------------------------------------------------- ensembles

MixedEnsemble MixedEnsemble::fock(long n, long m) {
  if (n < 0 || m < 0) throw std::invalid_argument("occupancies must be nonnegative");
  MixedEnsemble e;
  e.kind = EnsembleKind::fock;
  e.nbar = 0.5 * static_cast<double>(n + m);
  e.cutoff = std::max(n, m);
  e.members.push_back({1.0, n, m});
  return e;
}

MixedEnsemble MixedEnsemble::poissonian(double nbar, long cutoff, double tail) {
  if (!(nbar > 0.0)) throw std::domain_error("mean occupancy must be positive");
  return product_ensemble(EnsembleKind::poissonian, nbar, cutoff, tail,
                          [nbar](long n) { return numkernel::log_poissonian(n, nbar); });
}

MixedEnsemble MixedEnsemble::thermal(double nbar, long cutoff, double tail) {
  if (!(nbar > 0.0)) throw std::domain_error("mean occupancy must be positive");
  return product_ensemble(EnsembleKind::thermal, nbar, cutoff, tail,
                          [nbar](long n) { return thermal_log_pmf(nbar, n); });
}

double MixedEnsemble::total_weight() const {
  double s = 0.0;
  for (const auto& mem : members) s += mem.weight;
  return s;
}

// ---------------------------------------------------------------- enumeration

namespace {

// Largest block total worth visiting for records of up to kmax counts.
long relevant_max_total(const MixedEnsemble& ensemble, double eps, long kmax) {
  long tmax = 0;
  for (const auto& mem : ensemble.members) tmax = std::max(tmax, mem.n + mem.m);
  if (ensemble.members.size() == 1) return tmax;

  std::vector<std::vector<double>> by_block(static_cast<std::size_t>(tmax + 1));
  for (const auto& mem : ensemble.members) by_block[mem.n + mem.m].push_back(std::log(mem.weight));
  std::vector<double> score(static_cast<std::size_t>(tmax + 1), kNegInf);
  for (long t = 0; t <= tmax; ++t) {
    const long k = std::min(kmax, t);
    score[t] = log_sum_exp(by_block[t]) + numkernel::log_binomial(t, k) + static_cast<double>(k) * std::log(eps) +
               static_cast<double>(t - k) * std::log1p(-eps);
  }
  const double top = *std::max_element(score.begin(), score.end());
  long keep = tmax;
  while (keep > 0 && score[keep] - top < std::log(1e-18)) --keep;
  return keep;
}

std::size_t record_index(long l, long r) {
  const long k = l + r;
  return static_cast<std::size_t>(k * (k + 1) / 2 + l);
}

}  // namespace

std::vector<RecordStats> enumerate_records(const MixedEnsemble& ensemble, double eps, long kmax) {
  check_eps_open(eps);
  if (kmax < 0) throw std::invalid_argument("kmax must be nonnegative");
  std::vector<RecordStats> out(record_index(0, kmax + 1));
  for (long k = 0; k <= kmax; ++k) {
    for (long l = 0; l <= k; ++l) {
      out[record_index(l, k - l)].l = l;
      out[record_index(l, k - l)].r = k - l;
    }
  }

  const long tmax = relevant_max_total(ensemble, eps, kmax);
  const double log_eps = std::log(eps), log_keep = std::log1p(-eps);
  for (const auto& mem : ensemble.members) {
    const long total = mem.n + mem.m;
    if (total > tmax || mem.weight <= 0.0) continue;
    const long kk = std::min(kmax, total);
    const double log_w = std::log(mem.weight);
    ScaledVector left{FixedTotalState::fock(mem.n, mem.m), 0.0};
    for (long l = 0; l <= kk; ++l) {
      if (l > 0) left.step(Port::left);
      if (left.log_scale == kNegInf) break;
      ScaledVector v = left;
      for (long r = 0; l + r <= kk; ++r) {
        if (r > 0) v.step(Port::right);
        if (v.log_scale == kNegInf) break;
        const long k = l + r;
        const double log_s = log_w + static_cast<double>(k) * log_eps + static_cast<double>(total - k) * log_keep -
                             std::lgamma(l + 1.0) - std::lgamma(r + 1.0) + v.log_scale;
        const double s = std::exp(log_s);
        auto& rec = out[record_index(l, r)];
        rec.probability += s;
        rec.total_number += s * static_cast<double>(total - k);
        rec.coherence += s * v.state.coherence();
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------- two detections

TwoDetectionProbabilities two_detection_probabilities(long n, long m) {
  if (n < 0 || m < 0 || n + m < 2) throw std::domain_error("two detections need N + M >= 2");
  const auto psi = TwoModeFockState::fock(n, m, std::max(n, m));
  double w[2][2];
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const JumpEvent first{i == 0 ? Port::left : Port::right, 0.0};
      const JumpEvent second{j == 0 ? Port::left : Port::right, 0.0};
      w[i][j] = apply_detection(apply_detection(psi, first), second).norm_sq();
    }
  }
  const double total = w[0][0] + w[0][1] + w[1][0] + w[1][1];
  return {(w[0][0] + w[1][1]) / total, (w[0][1] + w[1][0]) / total};
}

double two_detection_ratio(long n, long m) {
  const auto brute = two_detection_probabilities(n, m);
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  const double den = nn * nn + mm * mm - nn - mm;
  const double num = den + 4.0 * nn * mm;
  if (den == 0.0) {
    if (brute.different > 1e-14) throw NumericalValidationError("simulated different-port probability is nonzero");
    return std::numeric_limits<double>::infinity();
  }
  const double closed = num / den;
  const double simulated = brute.same / brute.different;
  if (std::fabs(simulated - closed) > 1e-12 * closed) {
    throw NumericalValidationError("two-detection ratio disagrees with the simulation");
  }
  return closed;
}

// ---------------------------------------------------------------- trajectories

TrajectorySampler::TrajectorySampler(MixedEnsemble ensemble, double eps, long n_events, TauPolicy policy, double tau)
    : ensemble_(std::move(ensemble)), n_events_(n_events), policy_(policy), tau_(tau) {
  check_eps_open(eps);
  if (n_events < 0) throw std::invalid_argument("event count must be nonnegative");
  std::vector<double> logw;
  logw.reserve(ensemble_.members.size());
  for (const auto& mem : ensemble_.members) {
    const long total = mem.n + mem.m;
    if (total < n_events || mem.weight <= 0.0) {
      logw.push_back(kNegInf);
      continue;
    }
    logw.push_back(std::log(mem.weight) + numkernel::log_binomial(total, n_events) +
                   static_cast<double>(n_events) * std::log(eps) +
                   static_cast<double>(total - n_events) * std::log1p(-eps));
  }
  bool any = std::any_of(logw.begin(), logw.end(), [](double x) { return x > kNegInf; });
  if (!any) throw ConfigurationError("no ensemble member can produce the requested number of detections");
  numkernel::exp_normalize(logw);
  branch_weights_ = std::move(logw);
}

TrajectoryResult TrajectorySampler::sample(std::uint64_t seed, std::uint64_t index) const {
  Rng rng = trajectory_rng(seed, index);
  const auto& mem = ensemble_.members[sample_discrete(branch_weights_, rng)];
  FixedTotalState psi = FixedTotalState::fock(mem.n, mem.m);
  TrajectoryResult res;
  res.initial_n = mem.n;
  res.initial_m = mem.m;
  res.events.reserve(static_cast<std::size_t>(n_events_));
  for (long i = 0; i < n_events_; ++i) {
    double tau = tau_;
    if (policy_ == TauPolicy::random) tau = kTwoPi * uniform01(rng);
    if (policy_ == TauPolicy::two_setting && i % 2 == 1) tau = tau_ + kPi / 2;
    tau = numkernel::wrap_phase(tau);
    const double w[2] = {psi.detection_weight(Port::left, tau), psi.detection_weight(Port::right, tau)};
    const Port port = sample_discrete(w, rng) == 0 ? Port::left : Port::right;
    psi = psi.detect(port, tau);
    psi.normalize();
    res.events.push_back({port, tau});
  }
  res.state = psi.to_dense(std::max(ensemble_.cutoff, std::max(mem.n, mem.m)));
  return res;
}

TrajectoryResult sample_record(const MixedEnsemble& ensemble, double eps, long n_events, TauPolicy policy,
                               std::uint64_t seed, double tau) {
  return TrajectorySampler(ensemble, eps, n_events, policy, tau).sample(seed);
}

std::vector<DetectionRecord> to_records(std::span<const JumpEvent> events) {
  std::vector<DetectionRecord> out;
  out.reserve(events.size());
  for (const auto& e : events) {
    out.push_back({e.detector == Port::left ? 1L : 0L, e.detector == Port::right ? 1L : 0L,
                   numkernel::wrap_phase(e.tau)});
  }
  return out;
}

// ---------------------------------------------------------------- posteriors

namespace {

RelativePhaseDensity thermal_operational_density(const MixedEnsemble& ensemble, double eps,
                                                 std::span<const JumpEvent> events, const Grid1D& grid) {
  check_eps_open(eps);
  const long k = static_cast<long>(events.size());
  struct Term {
    double log_w;
    double total;
    cplx coh;
  };
  std::vector<Term> terms;
  double best_guess = kNegInf;
  std::vector<double> guess(ensemble.members.size(), kNegInf);
  for (std::size_t i = 0; i < ensemble.members.size(); ++i) {
    const auto& mem = ensemble.members[i];
    const long total = mem.n + mem.m;
    if (total < k || mem.weight <= 0.0) continue;
    guess[i] = std::log(mem.weight) + numkernel::log_binomial(total, k) +
               static_cast<double>(total - k) * std::log1p(-eps);
    best_guess = std::max(best_guess, guess[i]);
  }
  for (std::size_t i = 0; i < ensemble.members.size(); ++i) {
    if (guess[i] < best_guess - 60.0) continue;
    const auto& mem = ensemble.members[i];
    const long total = mem.n + mem.m;
    FixedTotalState psi = FixedTotalState::fock(mem.n, mem.m);
    double log_norm = 0.0;
    bool dead = false;
    for (const auto& e : events) {
      psi = psi.detect(e.detector, e.tau);
      const double n2 = psi.norm_sq();
      if (n2 == 0.0) {
        dead = true;
        break;
      }
      psi.normalize();
      log_norm += std::log(n2);
    }
    if (dead) continue;
    terms.push_back({std::log(mem.weight) + static_cast<double>(total - k) * std::log1p(-eps) + log_norm,
                     static_cast<double>(total - k), psi.coherence()});
  }
  if (terms.empty()) throw std::domain_error("record has zero probability under the ensemble");
  double top = kNegInf;
  for (const auto& t : terms) top = std::max(top, t.log_w);
  double total = 0.0;
  cplx coh{};
  for (const auto& t : terms) {
    const double w = std::exp(t.log_w - top);
    total += w * t.total;
    coh += w * t.coh;
  }
  std::vector<double> dens(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    // I(tau) = S/2 + Re(e^{i tau} <a^dag b>) read at tau = -D.
    dens[i] = std::max(0.0, 0.5 * total + std::real(std::polar(1.0, -grid[i]) * coh));
  }
  numkernel::normalize_density(dens, grid);
  return {grid, std::move(dens)};
}

}  // namespace

RelativePhaseDensity posterior_phase_density(const MixedEnsemble& ensemble, double eps,
                                             std::span<const JumpEvent> events, const Grid1D& grid) {
  if (events.empty()) return RelativePhaseDensity::uniform(grid);
  if (ensemble.kind == EnsembleKind::thermal) return thermal_operational_density(ensemble, eps, events, grid);
  const auto records = to_records(events);
  return phaseloc::record_density(records, grid);
}

RelativePhaseDensity fock_phase_density(const TwoModeFockState& state, const Grid1D& grid) {
  const FixedTotalState block = FixedTotalState::from_dense(state);
  const long total = block.total();
  std::vector<double> log_fact(static_cast<std::size_t>(total + 1));
  double top = kNegInf;
  for (long n = 0; n <= total; ++n) {
    log_fact[n] = 0.5 * (std::lgamma(n + 1.0) + std::lgamma(static_cast<double>(total - n) + 1.0));
    if (block[n] != cplx{}) top = std::max(top, log_fact[n]);
  }
  std::vector<cplx> g(static_cast<std::size_t>(total + 1));
  for (long n = 0; n <= total; ++n) g[n] = block[n] * std::exp(log_fact[n] - top);
  std::vector<double> dens(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    cplx s{};
    const cplx step = std::polar(1.0, grid[i]);
    cplx ph = 1.0;
    for (long n = 0; n <= total; ++n) {
      s += g[n] * ph;
      ph *= step;
    }
    dens[i] = std::norm(s);
  }
  numkernel::normalize_density(dens, grid);
  return {grid, std::move(dens)};
}

// ---------------------------------------------------------------- cat elimination

bool single_peaked(const RelativePhaseDensity& density, double rel_threshold) {
  return density.local_maxima(rel_threshold).size() == 1;
}

CatEliminationResult cat_elimination(const TwoModeFockState& state, const DetectionRecord& prior, long n_extra,
                                     std::uint64_t seed, const Grid1D& grid) {
  if (n_extra < 0) throw std::invalid_argument("extra detection count must be nonnegative");
  const auto peaks = phaseloc::localization_peaks(prior);
  const double tau = numkernel::wrap_phase(prior.tau - peaks.delta0);
  Rng rng = trajectory_rng(seed, 0);
  TwoModeFockState psi = state;
  std::vector<JumpEvent> events;
  long lcount = 0, rcount = 0;
  for (long i = 0; i < n_extra; ++i) {
    auto left = apply_detection(psi, {Port::left, tau});
    auto right = apply_detection(psi, {Port::right, tau});
    const double w[2] = {left.norm_sq(), right.norm_sq()};
    if (sample_discrete(w, rng) == 0) {
      psi = std::move(left);
      events.push_back({Port::left, tau});
      ++lcount;
    } else {
      psi = std::move(right);
      events.push_back({Port::right, tau});
      ++rcount;
    }
    psi.normalize();
  }
  const DetectionRecord batches[2] = {prior, {lcount, rcount, tau}};
  auto posterior = phaseloc::record_density(batches, grid);
  const double frac = n_extra > 0 ? static_cast<double>(std::max(lcount, rcount)) / static_cast<double>(n_extra) : 0.0;
  return {tau, std::move(events), std::move(psi), frac, std::move(posterior)};
}

}  // namespace relloc::focksim
