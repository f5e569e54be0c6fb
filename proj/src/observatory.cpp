#include "chordlab/observatory.hpp"

#include <cmath>
#include <stdexcept>

namespace chordlab {
namespace observatory {

PointerCensus census(const engine::SimState& state) {
  const auto& keys = state.alive_keys();
  if (keys.size() < 2) throw std::invalid_argument("census needs >= 2 nodes");
  const engine::ChurnConfig& cfg = state.config();
  const int S = cfg.S;
  const int M = state.ring().bits;
  const int n_nodes = static_cast<int>(keys.size());

  PointerCensus out;
  out.w.assign(static_cast<std::size_t>(S), 0.0);
  out.d.assign(static_cast<std::size_t>(S), 0.0);
  out.f.assign(static_cast<std::size_t>(M), 0.0);
  out.p_bu.assign(static_cast<std::size_t>(S), 0.0);
  out.pbu_raw.assign(static_cast<std::size_t>(S), 0);

  std::vector<long> w_samples(static_cast<std::size_t>(S), 0);
  for (const Key key : keys) {
    const NodeState& node = state.node(key);
    bool all_dead_so_far = true;
    for (int k = 1; k <= S; ++k) {
      const std::size_t i = static_cast<std::size_t>(k - 1);
      const Key truth = state.true_kth_successor(key, k);
      // Degenerate wrap (the node is its own k-th successor) falls
      // outside the N >> 1 regime; skip such samples.
      if (truth == key) {
        all_dead_so_far = false;
        continue;
      }
      ++w_samples[i];
      const Key s = node.successors[i];
      const bool dead = is_nil(s) || !state.is_alive(s);
      if (dead) out.d[i] += 1.0;
      if (dead || s != truth) out.w[i] += 1.0;
      all_dead_so_far = all_dead_so_far && dead;
      if (all_dead_so_far) {
        out.p_bu[i] += 1.0;
        ++out.pbu_raw[i];
      }
    }
    for (int k = 1; k <= M; ++k) {
      const Key fin = node.fingers[static_cast<std::size_t>(k - 1)];
      if (is_nil(fin) || !state.is_alive(fin)) {
        out.f[static_cast<std::size_t>(k - 1)] += 1.0;
      }
    }
  }
  for (int k = 0; k < S; ++k) {
    const std::size_t i = static_cast<std::size_t>(k);
    const double denom = w_samples[i] > 0 ? static_cast<double>(w_samples[i])
                                          : 1.0;
    out.w[i] /= denom;
    out.d[i] /= denom;
    out.p_bu[i] /= denom;
  }
  for (auto& v : out.f) v /= n_nodes;
  out.nodes = n_nodes;
  return out;
}

bool probe_consistent(const engine::SimState& state, const LookupTrace& trace,
                      Key target) {
  if (is_nil(trace.result)) return false;
  return trace.result == state.true_successor(target);
}

std::vector<SummaryRow> aggregate(
    const std::vector<engine::TrialResult>& trials) {
  if (trials.size() < 2) throw std::invalid_argument("need >= 2 trials");
  const std::size_t S = trials.front().w.size();
  const std::size_t M = trials.front().f.size();
  for (const auto& t : trials) {
    if (t.w.size() != S || t.f.size() != M) {
      throw std::invalid_argument("mismatched trial shapes");
    }
  }
  const int n = static_cast<int>(trials.size());

  std::vector<SummaryRow> rows;
  auto emit = [&](const std::string& quantity, int index, auto getter,
                  long raw = 0) {
    double sum = 0.0;
    double sq = 0.0;
    for (const auto& t : trials) {
      const double v = getter(t);
      sum += v;
      sq += v * v;
    }
    const double mean = sum / n;
    const double var = std::max(0.0, (sq - n * mean * mean) / (n - 1));
    SummaryRow row;
    row.quantity = quantity;
    row.index = index;
    row.mean = mean;
    row.stderr_ = std::sqrt(var / n);
    row.raw_count = raw;
    row.trials = n;
    rows.push_back(row);
  };

  for (std::size_t k = 0; k < S; ++k) {
    emit("w", static_cast<int>(k + 1),
         [k](const engine::TrialResult& t) { return t.w[k]; });
    emit("d", static_cast<int>(k + 1),
         [k](const engine::TrialResult& t) { return t.d[k]; });
    long raw = 0;
    for (const auto& t : trials) {
      if (k < 8) raw += t.pbu_raw_count[k];
    }
    emit("pbu", static_cast<int>(k + 1),
         [k](const engine::TrialResult& t) { return t.p_bu[k]; }, raw);
  }
  for (std::size_t k = 0; k < M; ++k) {
    emit("f", static_cast<int>(k + 1),
         [k](const engine::TrialResult& t) { return t.f[k]; });
  }
  long probes = 0;
  for (const auto& t : trials) probes += t.probes;
  emit("inconsistency", 0,
       [](const engine::TrialResult& t) { return t.inconsistency(); }, probes);
  emit("lookup_cost", 0,
       [](const engine::TrialResult& t) { return t.mean_cost(); }, probes);
  emit("lookup_hops", 0,
       [](const engine::TrialResult& t) { return t.mean_hops(); }, probes);
  emit("population", 0,
       [](const engine::TrialResult& t) { return t.mean_population; });
  return rows;
}

}  // namespace observatory
}  // namespace chordlab
