#ifndef CHORDLAB_PROTOCOL_HPP
#define CHORDLAB_PROTOCOL_HPP

#include <optional>
#include <utility>
#include <vector>

#include "chordlab/node.hpp"
#include "chordlab/ring.hpp"

namespace chordlab {
namespace protocol {

/// Answer of iThinkIAmYourPred: the contacted node's successor list
/// (by value) and the predecessor it reports back.
struct PredAnswer {
  std::vector<Key> successors;
  Key predecessor = kNilKey;
};

/// Drops dead heads from n's successor list (left shift, nil padded)
/// until an alive entry surfaces. nullopt means a nil head was reached:
/// every immediate successor is dead and the ring is broken.
std::optional<Key> first_alive_successor(NodeState& n, RingOracle& oracle);

/// Read-only variant used by lookups: the list is not modified.
/// If trace is given, one timeout is counted per dead entry skipped.
std::optional<Key> first_alive_successor_no_change(const NodeState& n,
                                                   const RingOracle& oracle,
                                                   LookupTrace* trace = nullptr);

PredAnswer i_think_i_am_your_pred(const Ring& ring, NodeState& n, Key x,
                                  RingOracle& oracle);

void consider_a_new_pred(const Ring& ring, NodeState& n, Key x,
                         RingOracle& oracle);

/// Copies s'[1..S-1] into n.s[2..S]; never touches s1.
void reconcile(NodeState& n, const std::vector<Key>& succ);

/// Shifts the list right and installs y as s1; sS is discarded.
void prepend(NodeState& n, Key y);

/// One successor-stabilization pass (Cases A/B/C), with Case A retried
/// to completion. Returns false on broken ring.
bool fix_successors(const Ring& ring, NodeState& n, RingOracle& oracle);

/// Lookup of the successor of k starting from the node with key `from`.
/// Strictly read-only; hops, timeouts and the outcome land in `trace`.
Key find_successor(const Ring& ring, Key from, Key k, RingOracle& oracle,
                   LookupTrace& trace);

/// Highest alive non-nil finger strictly inside (n, k); nil if none.
/// One timeout per distinct dead node probed during the scan.
std::optional<Key> closest_alive_preceding_finger(const Ring& ring,
                                                  const NodeState& n, Key k,
                                                  const RingOracle& oracle,
                                                  LookupTrace& trace);

std::optional<Key> closest_alive_preceding_succ(const Ring& ring,
                                                const NodeState& n, Key k,
                                                const RingOracle& oracle,
                                                LookupTrace& trace);

/// Sets fingers with start in (n, s1] to s1 and resolves the rest from
/// a copy of s1's finger table (localSuccessor); unresolved stay nil.
void init_fingers(const Ring& ring, NodeState& n, Key s1, RingOracle& oracle);

/// Repairs finger i (1..M) via a lookup for its start.
/// Returns false on broken ring.
bool fix_fingers(const Ring& ring, NodeState& n, int i, RingOracle& oracle,
                 LookupTrace* trace = nullptr);

/// Join via alive contact c: resolve s1 by lookup, one fixSuccessors
/// pass, then finger initialization. Returns false on broken ring.
bool join(const Ring& ring, NodeState& n, Key contact, RingOracle& oracle,
          LookupTrace* trace = nullptr);

}  // namespace protocol
}  // namespace chordlab

#endif  // CHORDLAB_PROTOCOL_HPP
