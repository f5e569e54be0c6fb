#include "chordlab/protocol.hpp"

#include <algorithm>

namespace chordlab {
namespace protocol {

namespace {

// Guard against pathological pointer cycles; in practice never reached.
constexpr int kMaxIterations = 1 << 14;

bool already_probed(const std::vector<Key>& probed, Key k) {
  return std::find(probed.begin(), probed.end(), k) != probed.end();
}

// Finger scan with a shared per-visit set of probed dead nodes, so a
// dead node appearing behind several table entries times out only once.
std::optional<Key> scan_preceding_finger(const Ring& ring, const NodeState& n,
                                         Key k, const RingOracle& oracle,
                                         LookupTrace& trace,
                                         std::vector<Key>& probed_dead) {
  for (int i = n.finger_len() - 1; i >= 0; --i) {
    const Key fin = n.fingers[static_cast<std::size_t>(i)];
    if (is_nil(fin)) continue;
    if (!in_interval(ring, fin, n.key, k, Closure::OpenOpen)) continue;
    if (oracle.is_alive(fin)) return fin;
    if (!already_probed(probed_dead, fin)) {
      probed_dead.push_back(fin);
      ++trace.timeouts;
    }
  }
  return std::nullopt;
}

std::optional<Key> scan_preceding_succ(const Ring& ring, const NodeState& n,
                                       Key k, const RingOracle& oracle,
                                       LookupTrace& trace,
                                       std::vector<Key>& probed_dead) {
  for (int i = n.succ_len() - 1; i >= 0; --i) {
    const Key s = n.successors[static_cast<std::size_t>(i)];
    if (is_nil(s)) continue;
    if (!in_interval(ring, s, n.key, k, Closure::OpenOpen)) continue;
    if (oracle.is_alive(s)) return s;
    if (!already_probed(probed_dead, s)) {
      probed_dead.push_back(s);
      ++trace.timeouts;
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<Key> first_alive_successor(NodeState& n, RingOracle& oracle) {
  for (int guard = 0; guard < kMaxIterations; ++guard) {
    const Key head = n.successors.front();
    if (is_nil(head)) return std::nullopt;  // Broken Ring!!
    if (oracle.is_alive(head)) return head;
    // Drop the dead head, pad with nil.
    for (int i = 0; i + 1 < n.succ_len(); ++i) {
      n.successors[static_cast<std::size_t>(i)] =
          n.successors[static_cast<std::size_t>(i + 1)];
    }
    n.successors.back() = kNilKey;
  }
  return std::nullopt;
}

std::optional<Key> first_alive_successor_no_change(const NodeState& n,
                                                   const RingOracle& oracle,
                                                   LookupTrace* trace) {
  for (const Key s : n.successors) {
    if (is_nil(s)) return std::nullopt;  // Broken Ring!!
    if (oracle.is_alive(s)) return s;
    if (trace) ++trace->timeouts;
  }
  return std::nullopt;
}

PredAnswer i_think_i_am_your_pred(const Ring& ring, NodeState& n, Key x,
                                  RingOracle& oracle) {
  if (is_nil(n.predecessor) || !oracle.is_alive(n.predecessor)) {
    n.predecessor = x;
    return PredAnswer{n.successors, x};
  }
  if (in_interval(ring, x, n.predecessor, n.key, Closure::OpenOpen)) {
    const Key old_pred = n.predecessor;
    n.predecessor = x;
    return PredAnswer{n.successors, old_pred};
  }
  return PredAnswer{n.successors, n.predecessor};
}

void consider_a_new_pred(const Ring& ring, NodeState& n, Key x,
                         RingOracle& oracle) {
  if (is_nil(n.predecessor) || !oracle.is_alive(n.predecessor) ||
      in_interval(ring, x, n.predecessor, n.key, Closure::OpenOpen)) {
    n.predecessor = x;
  }
}

void reconcile(NodeState& n, const std::vector<Key>& succ) {
  for (int i = 0; i + 1 < n.succ_len(); ++i) {
    n.successors[static_cast<std::size_t>(i + 1)] =
        succ[static_cast<std::size_t>(i)];
  }
}

void prepend(NodeState& n, Key y) {
  for (int i = n.succ_len() - 1; i >= 1; --i) {
    n.successors[static_cast<std::size_t>(i)] =
        n.successors[static_cast<std::size_t>(i - 1)];
  }
  n.successors.front() = y;
}

bool fix_successors(const Ring& ring, NodeState& n, RingOracle& oracle) {
  for (int guard = 0; guard < kMaxIterations; ++guard) {
    const auto y = first_alive_successor(n, oracle);
    if (!y) return false;
    PredAnswer ans = i_think_i_am_your_pred(ring, oracle.node(*y), n.key, oracle);
    const Key yp = ans.predecessor;
    if (in_interval(ring, yp, n.key, *y, Closure::OpenOpen)) {  // Case A
      prepend(n, yp);
      continue;
    }
    if (in_interval(ring, yp, *y, n.key, Closure::OpenOpen)) {  // Case B
      consider_a_new_pred(ring, n, yp, oracle);
      reconcile(n, ans.successors);
    } else {  // Case C: y.p == me
      reconcile(n, ans.successors);
    }
    return true;
  }
  return true;
}

std::optional<Key> closest_alive_preceding_finger(const Ring& ring,
                                                  const NodeState& n, Key k,
                                                  const RingOracle& oracle,
                                                  LookupTrace& trace) {
  std::vector<Key> probed;
  return scan_preceding_finger(ring, n, k, oracle, trace, probed);
}

std::optional<Key> closest_alive_preceding_succ(const Ring& ring,
                                                const NodeState& n, Key k,
                                                const RingOracle& oracle,
                                                LookupTrace& trace) {
  std::vector<Key> probed;
  return scan_preceding_succ(ring, n, k, oracle, trace, probed);
}

Key find_successor(const Ring& ring, Key from, Key k, RingOracle& oracle,
                   LookupTrace& trace) {
  Key cur = from;
  for (int guard = 0; guard < kMaxIterations; ++guard) {
    const NodeState& n = oracle.node(cur);
    // Case A: the key is the current node itself.
    if (k == cur) {
      trace.result = cur;
      return cur;
    }
    // Case B: the key falls between the node and its first successor.
    const Key s1 = n.successors.front();
    if (!is_nil(s1) && in_interval(ring, k, cur, s1, Closure::OpenClosed)) {
      const auto y = first_alive_successor_no_change(n, oracle, &trace);
      if (!y) break;
      ++trace.hops;
      trace.result = *y;
      return *y;
    }
    // Case C: forward to the closest alive preceding finger.
    std::vector<Key> probed;
    auto cpf = scan_preceding_finger(ring, n, k, oracle, trace, probed);
    if (!cpf) {
      const auto y = first_alive_successor_no_change(n, oracle, &trace);
      if (!y) break;
      if (in_interval(ring, k, cur, *y, Closure::OpenClosed)) {
        ++trace.hops;
        trace.result = *y;
        return *y;
      }
      cpf = scan_preceding_succ(ring, n, k, oracle, trace, probed);
      // Both tables empty of preceding nodes: fall back to the first
      // alive successor, which is strictly inside (cur, k) here.
      if (!cpf) cpf = y;
    }
    ++trace.hops;
    cur = *cpf;
  }
  trace.broken_ring = true;
  trace.broken_at = cur;
  trace.result = kNilKey;
  return kNilKey;
}

namespace {

Key local_successor(const Ring& ring, Key n, const std::vector<Key>& table,
                    Key k) {
  for (const Key fin : table) {
    if (is_nil(fin)) continue;
    if (in_interval(ring, k, n, fin, Closure::OpenClosed)) return fin;
  }
  return kNilKey;
}

}  // namespace

void init_fingers(const Ring& ring, NodeState& n, Key s1, RingOracle& oracle) {
  const std::vector<Key> table = oracle.node(s1).fingers;
  for (int i = 1; i <= n.finger_len(); ++i) {
    const Key start = finger_start(ring, n.key, i);
    if (in_interval(ring, start, n.key, s1, Closure::OpenClosed)) {
      n.fingers[static_cast<std::size_t>(i - 1)] = s1;
    } else {
      n.fingers[static_cast<std::size_t>(i - 1)] =
          local_successor(ring, n.key, table, start);
    }
  }
}

bool fix_fingers(const Ring& ring, NodeState& n, int i, RingOracle& oracle,
                 LookupTrace* trace) {
  LookupTrace local;
  LookupTrace& t = trace ? *trace : local;
  const Key start = finger_start(ring, n.key, i);
  const Key found = find_successor(ring, n.key, start, oracle, t);
  if (t.broken_ring) return false;
  n.fingers[static_cast<std::size_t>(i - 1)] = found;
  return true;
}

bool join(const Ring& ring, NodeState& n, Key contact, RingOracle& oracle,
          LookupTrace* trace) {
  LookupTrace local;
  LookupTrace& t = trace ? *trace : local;
  const Key s1 = find_successor(ring, contact, n.key, oracle, t);
  if (t.broken_ring) return false;
  n.successors.front() = s1;
  fix_successors(ring, n, oracle);
  init_fingers(ring, n, s1, oracle);
  return true;
}

}  // namespace protocol
}  // namespace chordlab
