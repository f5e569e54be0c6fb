#ifndef CHORDLAB_ENGINE_HPP
#define CHORDLAB_ENGINE_HPP

#include <cstdint>
#include <random>
#include <unordered_map>
#include <vector>

#include "chordlab/node.hpp"
#include "chordlab/ring.hpp"

namespace chordlab {
namespace engine {

struct ChurnConfig {
  std::uint64_t K = std::uint64_t{1} << 20;
  int N0 = 1000;
  int S = 6;
  double lambda_f = 1.0;  // failure rate per node; 0 disables churn
  double r = 500.0;       // lambda_s / lambda_f
  double alpha = 0.5;     // fraction of stabilizations on successors
  std::uint64_t seed = 1;
  long warmup_events = 0;      // 0: default of 10 * N0
  long measure_events = 0;     // 0: default of 20 * N0
  long snapshot_interval = 0;  // 0: default of N0
  int probes_per_snapshot = 10;
  long max_repairs = 100000;

  void validate() const;
  long effective_warmup() const;
  long effective_measure() const;
  long effective_snapshot_interval() const;
};

enum class EventKind : std::uint8_t {
  Join,
  Failure,
  SuccessorStabilization,
  FingerStabilization,
};

struct Event {
  EventKind kind = EventKind::Join;
  Key subject = kNilKey;  // joining key, failing node, or stabilizing node
  Key contact = kNilKey;  // join contact node
};

/// Full ring population plus the event clock. Implements the liveness
/// oracle consumed by the protocol: global truth at the instant of the
/// call.
class SimState : public RingOracle {
 public:
  SimState(const ChurnConfig& cfg);

  bool is_alive(Key k) const override;
  NodeState& node(Key k) override;
  const NodeState& node(Key k) const;

  const Ring& ring() const { return ring_; }
  const ChurnConfig& config() const { return cfg_; }
  int alive_count() const { return static_cast<int>(alive_keys_.size()); }
  double clock() const { return clock_; }
  long breakup_events() const { return breakup_events_; }
  std::uint64_t stream_hash() const { return stream_hash_; }

  /// Sorted alive keys; the measurement ground truth.
  const std::vector<Key>& alive_keys() const { return alive_keys_; }
  Key true_successor(Key k) const;
  Key true_kth_successor(Key node_key, int k) const;

  /// Populates each key independently with probability N0/K and sets
  /// every pointer to ground truth. Resamples a degenerate (< 2 node)
  /// draw.
  void init_ring();

  Event next_event();
  void apply_event(const Event& ev);
  void step() { apply_event(next_event()); }

  struct ProbeOutcome {
    LookupTrace trace;
    Key source = kNilKey;
    Key target = kNilKey;
  };

  /// Read-only measurement probe from a uniform alive node to a
  /// uniform target key.
  ProbeOutcome probe();
  ProbeOutcome probe(Key source, Key target);

  std::mt19937_64& rng() { return rng_; }

 private:
  void insert_alive(Key k);
  void erase_alive(Key k);
  Key random_alive();
  Key random_unpopulated();
  /// Re-seeds a node's successor list from ground truth after a
  /// broken-ring signal so the trial can keep measuring.
  void repair(Key k);

  ChurnConfig cfg_;
  Ring ring_;
  std::unordered_map<Key, NodeState> nodes_;
  std::vector<Key> alive_keys_;  // sorted
  double clock_ = 0.0;
  std::mt19937_64 rng_;
  long breakup_events_ = 0;
  std::uint64_t stream_hash_ = 1469598103934665603ull;  // FNV offset
};

/// Per-trial measurement accumulators (sums over snapshots / probes).
struct TrialResult {
  // Mean fractions over snapshots.
  std::vector<double> w;     // k = 1..S
  std::vector<double> d;     // k = 1..S
  std::vector<double> f;     // k = 1..M
  std::vector<double> p_bu;  // n = 1..S
  long pbu_raw_count[8] = {0, 0, 0, 0, 0, 0, 0, 0};  // pooled configs, n<=8
  int snapshots = 0;

  // Probe statistics.
  long probes = 0;
  long inconsistent = 0;
  long broken_probes = 0;
  double cost_sum = 0.0;
  double hops_sum = 0.0;
  double timeouts_sum = 0.0;

  // Engine statistics.
  double mean_population = 0.0;
  long events = 0;
  long event_counts[4] = {0, 0, 0, 0};
  long breakups = 0;
  std::uint64_t stream_hash = 0;
  bool aborted = false;

  double mean_cost() const { return probes ? cost_sum / probes : 0.0; }
  double mean_hops() const { return probes ? hops_sum / probes : 0.0; }
  double inconsistency() const {
    return probes ? static_cast<double>(inconsistent) / probes : 0.0;
  }
};

/// Warm-up, then measurement with periodic censuses and probes.
/// lambda_f == 0 degenerates to probing the converged initial ring.
TrialResult run_trial(const ChurnConfig& cfg);

}  // namespace engine
}  // namespace chordlab

#endif  // CHORDLAB_ENGINE_HPP
