#ifndef CHORDLAB_OBSERVATORY_HPP
#define CHORDLAB_OBSERVATORY_HPP

#include <string>
#include <vector>

#include "chordlab/engine.hpp"

namespace chordlab {
namespace observatory {

/// Fractions of wrong / failed pointers in one snapshot, with sample
/// counts for stderr. A dead pointer is always also a wrong pointer;
/// nil entries count as both.
struct PointerCensus {
  std::vector<double> w;     // wrong k-th successor, k = 1..S
  std::vector<double> d;     // dead k-th successor
  std::vector<double> f;     // dead k-th finger, k = 1..M
  std::vector<double> p_bu;  // first n successors all dead, n = 1..S
  std::vector<long> pbu_raw; // raw configuration counts per n
  long nodes = 0;
};

PointerCensus census(const engine::SimState& state);

/// A probe is consistent iff it returned the target's true successor.
bool probe_consistent(const engine::SimState& state, const LookupTrace& trace,
                      Key target);

/// One aggregated quantity at one parameter point.
struct SummaryRow {
  std::string quantity;
  int index = 0;  // k, n, or 0 for scalars
  double mean = 0.0;
  double stderr_ = 0.0;
  long raw_count = 0;  // pooled occurrences (p_bu) or probes
  int trials = 0;
};

/// Unweighted mean across trials, stderr = stddev / sqrt(trials).
/// Trials must share the same parameter point (checked by the caller's
/// bookkeeping; mismatched vector shapes are rejected here).
std::vector<SummaryRow> aggregate(const std::vector<engine::TrialResult>& trials);

}  // namespace observatory
}  // namespace chordlab

#endif  // CHORDLAB_OBSERVATORY_HPP
