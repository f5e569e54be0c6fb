#include "chordlab/engine.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include "chordlab/observatory.hpp"
#include "chordlab/protocol.hpp"

namespace chordlab {
namespace engine {

void ChurnConfig::validate() const {
  if (K < 4 || !std::has_single_bit(K)) {
    throw std::invalid_argument("K must be a power of two >= 4");
  }
  if (N0 < 2 || static_cast<std::uint64_t>(N0) >= K) {
    throw std::invalid_argument("require 2 <= N0 < K");
  }
  if (S < 1) throw std::invalid_argument("require S >= 1");
  if (lambda_f < 0.0) throw std::invalid_argument("lambda_f must be >= 0");
  if (lambda_f > 0.0 && !(r > 0.0)) throw std::invalid_argument("require r > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("require 0 < alpha < 1");
  }
}

long ChurnConfig::effective_warmup() const {
  return warmup_events > 0 ? warmup_events : 10L * N0;
}

long ChurnConfig::effective_measure() const {
  return measure_events > 0 ? measure_events : 20L * N0;
}

long ChurnConfig::effective_snapshot_interval() const {
  return snapshot_interval > 0 ? snapshot_interval : N0;
}

SimState::SimState(const ChurnConfig& cfg)
    : cfg_(cfg), ring_(Ring::with_size(cfg.K)), rng_(cfg.seed) {
  cfg_.validate();
}

bool SimState::is_alive(Key k) const { return nodes_.count(k) != 0; }

NodeState& SimState::node(Key k) {
  auto it = nodes_.find(k);
  assert(it != nodes_.end());
  return it->second;
}

const NodeState& SimState::node(Key k) const {
  auto it = nodes_.find(k);
  assert(it != nodes_.end());
  return it->second;
}

Key SimState::true_successor(Key k) const {
  auto it = std::lower_bound(alive_keys_.begin(), alive_keys_.end(), k);
  return it == alive_keys_.end() ? alive_keys_.front() : *it;
}

Key SimState::true_kth_successor(Key node_key, int k) const {
  auto it = std::lower_bound(alive_keys_.begin(), alive_keys_.end(), node_key);
  assert(it != alive_keys_.end() && *it == node_key);
  const std::size_t idx = static_cast<std::size_t>(it - alive_keys_.begin());
  return alive_keys_[(idx + static_cast<std::size_t>(k)) % alive_keys_.size()];
}

void SimState::insert_alive(Key k) {
  alive_keys_.insert(
      std::lower_bound(alive_keys_.begin(), alive_keys_.end(), k), k);
}

void SimState::erase_alive(Key k) {
  auto it = std::lower_bound(alive_keys_.begin(), alive_keys_.end(), k);
  assert(it != alive_keys_.end() && *it == k);
  alive_keys_.erase(it);
}

Key SimState::random_alive() {
  std::uniform_int_distribution<std::size_t> pick(0, alive_keys_.size() - 1);
  return alive_keys_[pick(rng_)];
}

Key SimState::random_unpopulated() {
  std::uniform_int_distribution<std::uint64_t> pick(0, ring_.size - 1);
  for (;;) {
    const Key k = pick(rng_);
    if (!is_alive(k)) return k;
  }
}

void SimState::init_ring() {
  const double p = static_cast<double>(cfg_.N0) / static_cast<double>(cfg_.K);
  std::geometric_distribution<std::uint64_t> gap(p);
  for (;;) {
    nodes_.clear();
    alive_keys_.clear();
    std::uint64_t pos = gap(rng_);
    while (pos < ring_.size) {
      alive_keys_.push_back(pos);
      pos += 1 + gap(rng_);
    }
    if (alive_keys_.size() >= 2) break;  // degenerate draw: resample
  }

  const int n = alive_count();
  nodes_.reserve(alive_keys_.size() * 2);
  for (int idx = 0; idx < n; ++idx) {
    const Key key = alive_keys_[static_cast<std::size_t>(idx)];
    NodeState node(key, cfg_.S, ring_.bits);
    node.predecessor =
        alive_keys_[static_cast<std::size_t>((idx + n - 1) % n)];
    for (int i = 1; i <= cfg_.S && i < n; ++i) {
      node.successors[static_cast<std::size_t>(i - 1)] =
          alive_keys_[static_cast<std::size_t>((idx + i) % n)];
    }
    for (int i = 1; i <= ring_.bits; ++i) {
      node.fingers[static_cast<std::size_t>(i - 1)] =
          true_successor(finger_start(ring_, key, i));
    }
    nodes_.emplace(key, std::move(node));
  }
  clock_ = 0.0;
}

Event SimState::next_event() {
  assert(alive_count() >= 1 && cfg_.lambda_f > 0.0);
  const double total_rate =
      alive_count() * cfg_.lambda_f * (2.0 + cfg_.r);  // lambda_j = lambda_f
  std::exponential_distribution<double> wait(total_rate);
  clock_ += wait(rng_);

  std::uniform_real_distribution<double> pick(0.0, 2.0 + cfg_.r);
  const double u = pick(rng_);
  Event ev;
  if (u < 1.0) {
    ev.kind = EventKind::Join;
    ev.subject = random_unpopulated();
    ev.contact = random_alive();
  } else if (u < 2.0) {
    ev.kind = EventKind::Failure;
    ev.subject = random_alive();
  } else if (u < 2.0 + cfg_.alpha * cfg_.r) {
    ev.kind = EventKind::SuccessorStabilization;
    ev.subject = random_alive();
  } else {
    ev.kind = EventKind::FingerStabilization;
    ev.subject = random_alive();
  }
  return ev;
}

void SimState::repair(Key k) {
  ++breakup_events_;
  auto it = nodes_.find(k);
  if (it == nodes_.end()) return;
  NodeState& n = it->second;
  std::fill(n.successors.begin(), n.successors.end(), kNilKey);
  const int count = alive_count();
  for (int i = 1; i <= cfg_.S && i < count; ++i) {
    n.successors[static_cast<std::size_t>(i - 1)] =
        true_kth_successor(k, i);
  }
}

void SimState::apply_event(const Event& ev) {
  // Event-stream fingerprint for determinism checks.
  stream_hash_ ^= (static_cast<std::uint64_t>(ev.kind) << 56) ^ ev.subject;
  stream_hash_ *= 1099511628211ull;

  switch (ev.kind) {
    case EventKind::Join: {
      NodeState node(ev.subject, cfg_.S, ring_.bits);
      LookupTrace trace;
      bool ok = protocol::join(ring_, node, ev.contact, *this, &trace);
      if (!ok && trace.broken_ring && !is_nil(trace.broken_at)) {
        repair(trace.broken_at);
        trace = LookupTrace{};
        ok = protocol::join(ring_, node, ev.contact, *this, &trace);
      }
      if (ok) {
        nodes_.emplace(ev.subject, std::move(node));
        insert_alive(ev.subject);
      }
      break;
    }
    case EventKind::Failure: {
      // Fail-stop: the dead node's state is discarded. Keep at least
      // two nodes alive so the ring stays meaningful.
      if (alive_count() <= 2) break;
      nodes_.erase(ev.subject);
      erase_alive(ev.subject);
      break;
    }
    case EventKind::SuccessorStabilization: {
      NodeState& n = node(ev.subject);
      if (!protocol::fix_successors(ring_, n, *this)) {
        repair(ev.subject);
        protocol::fix_successors(ring_, n, *this);
      }
      break;
    }
    case EventKind::FingerStabilization: {
      std::uniform_int_distribution<int> pick(1, ring_.bits);
      const int i = pick(rng_);
      NodeState& n = node(ev.subject);
      LookupTrace trace;
      if (!protocol::fix_fingers(ring_, n, i, *this, &trace)) {
        if (!is_nil(trace.broken_at)) repair(trace.broken_at);
        protocol::fix_fingers(ring_, n, i, *this);
      }
      break;
    }
  }
}

SimState::ProbeOutcome SimState::probe() {
  const Key source = random_alive();
  std::uniform_int_distribution<std::uint64_t> pick(0, ring_.size - 1);
  return probe(source, pick(rng_));
}

SimState::ProbeOutcome SimState::probe(Key source, Key target) {
  ProbeOutcome out;
  out.source = source;
  out.target = target;
  protocol::find_successor(ring_, source, target, *this, out.trace);
  return out;
}

namespace {

void accumulate_census(const SimState& st, TrialResult& res) {
  const observatory::PointerCensus c = observatory::census(st);
  for (std::size_t i = 0; i < c.w.size(); ++i) {
    res.w[i] += c.w[i];
    res.d[i] += c.d[i];
    res.p_bu[i] += c.p_bu[i];
    if (i < 8) res.pbu_raw_count[i] += c.pbu_raw[i];
  }
  for (std::size_t i = 0; i < c.f.size(); ++i) res.f[i] += c.f[i];
  ++res.snapshots;
}

void run_probes(SimState& st, TrialResult& res, int count) {
  for (int i = 0; i < count; ++i) {
    const auto out = st.probe();
    if (out.trace.broken_ring) {
      ++res.broken_probes;
      continue;
    }
    ++res.probes;
    res.cost_sum += out.trace.cost();
    res.hops_sum += out.trace.hops;
    res.timeouts_sum += out.trace.timeouts;
    if (!observatory::probe_consistent(st, out.trace, out.target)) {
      ++res.inconsistent;
    }
  }
}

}  // namespace

TrialResult run_trial(const ChurnConfig& cfg) {
  cfg.validate();
  SimState st(cfg);
  st.init_ring();

  const Ring& ring = st.ring();
  TrialResult res;
  res.w.assign(static_cast<std::size_t>(cfg.S), 0.0);
  res.d.assign(static_cast<std::size_t>(cfg.S), 0.0);
  res.p_bu.assign(static_cast<std::size_t>(cfg.S), 0.0);
  res.f.assign(static_cast<std::size_t>(ring.bits), 0.0);

  const long snap = cfg.effective_snapshot_interval();

  if (cfg.lambda_f == 0.0) {
    // No churn: the converged initial ring is the steady state.
    const long snapshots = std::max(1L, cfg.effective_measure() / snap);
    for (long s = 0; s < snapshots; ++s) {
      accumulate_census(st, res);
      run_probes(st, res, cfg.probes_per_snapshot);
    }
  } else {
    const long warmup = cfg.effective_warmup();
    const long measure = cfg.effective_measure();
    double population_sum = 0.0;
    for (long e = 0; e < warmup; ++e) st.step();
    for (long e = 1; e <= measure; ++e) {
      const Event ev = st.next_event();
      st.apply_event(ev);
      ++res.event_counts[static_cast<int>(ev.kind)];
      population_sum += st.alive_count();
      ++res.events;
      if (e % snap == 0) {
        accumulate_census(st, res);
        run_probes(st, res, cfg.probes_per_snapshot);
      }
      if (st.breakup_events() > cfg.max_repairs) {
        res.aborted = true;  // partial results, flagged
        break;
      }
    }
    res.mean_population = res.events ? population_sum / res.events : 0.0;
  }

  if (res.snapshots > 0) {
    for (auto& v : res.w) v /= res.snapshots;
    for (auto& v : res.d) v /= res.snapshots;
    for (auto& v : res.f) v /= res.snapshots;
    for (auto& v : res.p_bu) v /= res.snapshots;
  }
  res.breakups = st.breakup_events();
  res.stream_hash = st.stream_hash();
  return res;
}

}  // namespace engine
}  // namespace chordlab
