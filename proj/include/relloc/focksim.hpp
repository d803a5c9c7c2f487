#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "relloc/phaseloc.hpp"
#include "relloc/trajectory.hpp"

namespace relloc::focksim {

using cplx = std::complex<double>;
using numkernel::Grid1D;
using phaseloc::DetectionRecord;
using phaseloc::RelativePhaseDensity;

enum class Port { left, right };

/// One photodetection: which output port fired and the phase setting then.
struct JumpEvent {
  Port detector = Port::right;
  double tau = 0.0;
};

/// Pure two-mode state on the dense grid 0 <= n, m <= cutoff.
class TwoModeFockState {
 public:
  explicit TwoModeFockState(long cutoff);

  static TwoModeFockState fock(long n, long m, long cutoff);
  /// Product of coherent states |alpha>|beta>; throws CutoffOverflow when
  /// more than `tail` of the norm falls outside the grid.
  static TwoModeFockState coherent(cplx alpha, cplx beta, long cutoff, double tail = 1e-12);

  long cutoff() const { return cutoff_; }
  cplx& at(long n, long m) { return amp_[index(n, m)]; }
  cplx at(long n, long m) const { return amp_[index(n, m)]; }

  double norm_sq() const;
  /// Sum of ln(norm^2) removed by normalize() calls so far.
  double norm_log() const { return norm_log_; }
  /// Rescales to unit norm and returns the old norm^2. Throws
  /// std::domain_error on the zero vector.
  double normalize();
  bool is_zero() const { return norm_sq() == 0.0; }

  /// <a^dag a> + <b^dag b> and <a^dag b> (unnormalized expectations).
  double total_number() const;
  cplx coherence() const;

  /// Smallest and largest n + m carrying nonzero amplitude (-1 if zero).
  long min_total() const;
  long max_total() const;

  void scale(cplx factor);

 private:
  std::size_t index(long n, long m) const;

  long cutoff_;
  std::vector<cplx> amp_;
  double norm_log_ = 0.0;
};

/// K_{L,R} = (a -/+ e^{-i tau} b)/sqrt(2) applied to the state. The result is
/// unnormalized; its norm^2 is the detection weight. A zero result means the
/// event is impossible.
TwoModeFockState apply_detection(const TwoModeFockState& state, const JumpEvent& event);

/// Multiplies amplitudes by (1 - eps)^{(n+m)/2}.
TwoModeFockState apply_leakage(const TwoModeFockState& state, double eps);

/// Pure state confined to one total-number block n + m = T, indexed by n.
class FixedTotalState {
 public:
  FixedTotalState() = default;
  explicit FixedTotalState(long total);
  static FixedTotalState fock(long n, long m);

  long total() const { return total_; }
  cplx& operator[](long n) { return amp_[static_cast<std::size_t>(n)]; }
  cplx operator[](long n) const { return amp_[static_cast<std::size_t>(n)]; }

  double norm_sq() const;
  double normalize();
  cplx coherence() const;

  /// Same Kraus rule as apply_detection; the block total drops by one.
  FixedTotalState detect(Port port, double tau) const;
  /// Detection weight ||K psi||^2 without forming the new state.
  double detection_weight(Port port, double tau) const;

  TwoModeFockState to_dense(long cutoff) const;
  static FixedTotalState from_dense(const TwoModeFockState& state);

 private:
  long total_ = -1;
  std::vector<cplx> amp_;
};

enum class EnsembleKind { fock, poissonian, thermal };

/// Number-diagonal mixture of product Fock states.
struct MixedEnsemble {
  struct Member {
    double weight;
    long n;
    long m;
  };

  EnsembleKind kind = EnsembleKind::fock;
  double nbar = 0.0;
  long cutoff = 0;
  std::vector<Member> members;

  static MixedEnsemble fock(long n, long m);
  /// Product of two Poissonians of mean nbar. cutoff 0 picks the smallest
  /// per-mode cutoff with tail mass below `tail` and at least nbar + 5 sqrt(nbar).
  /// An explicit cutoff that leaves more than `tail` outside throws CutoffOverflow.
  static MixedEnsemble poissonian(double nbar, long cutoff = 0, double tail = 1e-10);
  static MixedEnsemble thermal(double nbar, long cutoff = 0, double tail = 1e-10);

  double total_weight() const;
};

/// Exact statistics of one detection record (all events at tau = 0),
/// summed over the ensemble. Moments are unnormalized (weighted by the
/// record probability); divide by `probability` for conditional values.
struct RecordStats {
  long l = 0;
  long r = 0;
  double probability = 0.0;
  double total_number = 0.0;
  cplx coherence{};
};

/// All records with l + r <= kmax after leakage eps. Uses the exact
/// Kraus operators E_{l,r} = sqrt(eps^{l+r}/(l! r!)) (1-eps)^{N/2} K_L^l K_R^r.
/// Probabilities carry an absolute truncation error no larger than the
/// ensemble mass dropped by its cutoff.
std::vector<RecordStats> enumerate_records(const MixedEnsemble& ensemble, double eps, long kmax);

/// Same-port : different-port ratio for two detections on |N>|M> at tau = 0.
struct TwoDetectionProbabilities {
  double same = 0.0;
  double different = 0.0;
};
TwoDetectionProbabilities two_detection_probabilities(long n, long m);

/// Closed form (N^2+M^2-N-M+4NM)/(N^2+M^2-N-M), infinite when the
/// denominator vanishes. Cross-checked against the brute-force simulation;
/// a mismatch above 1e-12 (relative) throws NumericalValidationError.
double two_detection_ratio(long n, long m);

enum class TauPolicy { fixed, random, two_setting };

struct TrajectoryResult {
  std::vector<JumpEvent> events;
  TwoModeFockState state{0};
  long initial_n = 0;
  long initial_m = 0;
};

/// Draws detection records of a fixed length from an ensemble under leakage.
/// Initial branches are weighted by the chance of exactly n_events counts;
/// ports follow the Kraus norms event by event.
class TrajectorySampler {
 public:
  TrajectorySampler(MixedEnsemble ensemble, double eps, long n_events, TauPolicy policy, double tau = 0.0);

  TrajectoryResult sample(std::uint64_t seed, std::uint64_t index = 0) const;

 private:
  MixedEnsemble ensemble_;
  long n_events_;
  TauPolicy policy_;
  double tau_;
  std::vector<double> branch_weights_;
};

TrajectoryResult sample_record(const MixedEnsemble& ensemble, double eps, long n_events, TauPolicy policy,
                               std::uint64_t seed, double tau = 0.0);

/// Per-event records for an event list (one count each).
std::vector<DetectionRecord> to_records(std::span<const JumpEvent> events);

/// Phase posterior for the ensemble given the events. Fock and Poissonian
/// kinds use the product of C densities. The thermal kind uses the
/// operational density p(D) ~ I(tau = -D) of the conditional mixed state,
/// which needs the leakage eps.
RelativePhaseDensity posterior_phase_density(const MixedEnsemble& ensemble, double eps,
                                             std::span<const JumpEvent> events, const Grid1D& grid);

/// Density |sum_n c_{n,K-n} sqrt(n! (K-n)!) e^{i n D}|^2 of a single-block
/// state: the coherent-state phase weight. Throws ConfigurationError if the
/// state spans several total-number blocks.
RelativePhaseDensity fock_phase_density(const TwoModeFockState& state, const Grid1D& grid);

struct CatEliminationResult {
  double tau = 0.0;
  std::vector<JumpEvent> events;
  TwoModeFockState state{0};
  double dominant_fraction = 0.0;
  RelativePhaseDensity posterior;
};

/// Continues a record with the phase shifter moved to tau - delta0 and draws
/// n_extra more detections from `state` (the post-measurement state of
/// `prior`). The posterior combines `prior` and the extra counts.
CatEliminationResult cat_elimination(const TwoModeFockState& state, const DetectionRecord& prior, long n_extra,
                                     std::uint64_t seed, const Grid1D& grid);

/// True when the density has one local maximum above `rel_threshold` of the peak.
bool single_peaked(const RelativePhaseDensity& density, double rel_threshold = 0.05);

}  // namespace relloc::focksim
