#ifndef CHORDLAB_NODE_HPP
#define CHORDLAB_NODE_HPP

#include <vector>

#include "chordlab/ring.hpp"

namespace chordlab {

/// One peer's routing state. Successor list has fixed length S
/// (trailing entries may be nil), finger table has fixed length M.
/// Finger starts are derived from the key, never stored.
struct NodeState {
  Key key = kNilKey;
  Key predecessor = kNilKey;
  std::vector<Key> successors;  // length S
  std::vector<Key> fingers;     // length M, entry i-1 holds fin_i.node
  bool alive = false;

  NodeState() = default;
  NodeState(Key k, int succ_len, int finger_len)
      : key(k),
        successors(static_cast<std::size_t>(succ_len), kNilKey),
        fingers(static_cast<std::size_t>(finger_len), kNilKey),
        alive(true) {}

  int succ_len() const { return static_cast<int>(successors.size()); }
  int finger_len() const { return static_cast<int>(fingers.size()); }
};

/// Global simulator truth consulted by the protocol. Liveness is
/// discovered by performing the operation; the oracle abstracts that.
class RingOracle {
 public:
  virtual ~RingOracle() = default;
  virtual bool is_alive(Key k) const = 0;
  virtual NodeState& node(Key k) = 0;
};

/// Per-lookup record. Cost is hops + timeouts (a timeout per dead node
/// probed en route).
struct LookupTrace {
  int hops = 0;
  int timeouts = 0;
  Key result = kNilKey;
  bool broken_ring = false;
  Key broken_at = kNilKey;

  int cost() const { return hops + timeouts; }
};

}  // namespace chordlab

#endif  // CHORDLAB_NODE_HPP
