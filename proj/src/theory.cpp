#include "chordlab/theory.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace chordlab {
namespace theory {

TheoryParams TheoryParams::make(std::uint64_t K, double N, int S, double r,
                                double alpha) {
  if (K < 2 || !std::has_single_bit(K)) {
    throw std::invalid_argument("K must be a power of two >= 2");
  }
  if (!(N > 0.0) || N >= static_cast<double>(K)) {
    throw std::invalid_argument("require 0 < N < K");
  }
  if (!(r > 0.0)) throw std::invalid_argument("require r > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("require 0 < alpha < 1");
  }
  TheoryParams p;
  p.K = K;
  p.N = N;
  p.S = S;
  p.r = r;
  p.alpha = alpha;
  p.M = std::countr_zero(K);
  p.rho = (static_cast<double>(K) - N) / static_cast<double>(K);
  return p;
}

double interval_pmf(const TheoryParams& p, std::uint64_t x) {
  if (x < 1) throw std::invalid_argument("interval length must be >= 1");
  return std::pow(p.rho, static_cast<double>(x - 1)) * (1.0 - p.rho);
}

double a_prob(const TheoryParams& p, double x) {
  if (x <= 0.0) return 0.0;
  return -std::expm1(x * std::log(p.rho));
}

double b_prob(const TheoryParams& p, std::uint64_t i) {
  return std::pow(p.rho, static_cast<double>(i)) * (1.0 - p.rho);
}

double bc_prob(const TheoryParams& p, std::uint64_t i, double x) {
  const double a = a_prob(p, x);
  if (a == 0.0) return 0.0;
  return b_prob(p, i) / a;
}

// p_j(k) sums the joint interval distribution over j predecessor gaps
// whose total T stays below 2^{k-1}, with no node in the T keys between
// the two finger starts:
//   p_j(k) = sum_{T=j}^{2^{k-1}-1} C(T-1, j-1) rho^{T-j} (1-rho)^j rho^T
// For j = 1 this telescopes to the closed form of the share property.
double p_share(const TheoryParams& p, int j, int k) {
  assert(j >= 1 && k >= 1);
  const double rho = p.rho;
  if (j == 1) {
    const double e = std::pow(2.0, k) - 2.0;
    return rho / (1.0 + rho) * -std::expm1(e * std::log(rho));
  }
  const double x_max = std::pow(2.0, k - 1) - 1.0;
  if (x_max < static_cast<double>(j)) return 0.0;
  const double rho2 = rho * rho;
  double binom = 1.0;  // C(T-1, j-1) at T = j
  double pw = std::pow(rho2, static_cast<double>(j));  // rho^{2T} at T = j
  const double front = std::pow((1.0 - rho) / rho, static_cast<double>(j));
  double sum = 0.0;
  for (double T = static_cast<double>(j); T <= x_max; T += 1.0) {
    const double term = binom * pw;
    sum += term;
    if (term < 1e-18 * sum && T > static_cast<double>(j) + 8) break;
    binom *= T / (T - j + 1.0);
    pw *= rho2;
  }
  return front * sum;
}

double p_join(const TheoryParams& p, int k) {
  if (k < 3) return 0.0;
  const double rho = p.rho;
  const double e = std::pow(2.0, k - 2) - 2.0;  // 2^{k-2} - 2
  const double rho_e = std::exp(e * std::log(rho));
  const double one_minus = 1.0 - rho_e;
  return rho * one_minus + (1.0 - rho) * one_minus -
         (1.0 - rho) * rho * e * (rho_e / rho);
}

SuccessorPredictions successor_predictions(const TheoryParams& p) {
  SuccessorPredictions out;
  const double ar = p.alpha * p.r;
  const double w1 = 2.0 / (3.0 + ar);
  const double d1 = w1 / 2.0;
  out.w.resize(static_cast<std::size_t>(p.S));
  out.d.resize(static_cast<std::size_t>(p.S));
  out.w_valid.resize(static_cast<std::size_t>(p.S));
  const double k_limit = std::sqrt(p.r);
  for (int k = 1; k <= p.S; ++k) {
    double wk = k == 1 ? w1 : static_cast<double>(k) * (k + 1) / ar;
    double dk = static_cast<double>(k) * d1;
    bool valid = k == 1 || (static_cast<double>(k) <= k_limit && wk <= 1.0);
    out.w[static_cast<std::size_t>(k - 1)] = std::min(wk, 1.0);
    out.d[static_cast<std::size_t>(k - 1)] = std::min(dk, 1.0);
    out.w_valid[static_cast<std::size_t>(k - 1)] = valid;
  }
  out.inconsistency = w1 - d1;
  return out;
}

double breakup_probability(const TheoryParams& p, int n) {
  assert(n >= 1 && n <= p.S);
  double fact = 1.0;
  for (int i = 2; i <= n + 1; ++i) fact *= i;
  return fact / (2.0 * std::pow(p.alpha * p.r, static_cast<double>(n)));
}

FingerPredictions finger_predictions(const TheoryParams& p) {
  FingerPredictions out;
  out.exact.resize(static_cast<std::size_t>(p.M));
  out.leading.resize(static_cast<std::size_t>(p.M));
  out.valid.resize(static_cast<std::size_t>(p.M));
  const double rate = (1.0 - p.alpha) * p.r / p.M;
  for (int k = 1; k <= p.M; ++k) {
    // First three terms of P~rep(k) = sum_j p_j(k).
    const double p_rep = p_share(p, 1, k) + p_share(p, 2, k) + p_share(p, 3, k);
    const double pj = p_join(p, k);
    const double q = 2.0 * (1.0 + p_rep) - pj + rate;
    const double disc = q * q - 4.0 * (1.0 + p_rep) * (1.0 + p_rep);
    const double leading = (1.0 + p_rep) * p.M / ((1.0 - p.alpha) * p.r);
    const std::size_t idx = static_cast<std::size_t>(k - 1);
    out.leading[idx] = leading;
    if (disc < 0.0) {
      out.valid[idx] = false;
      out.exact[idx] = std::min(1.0, leading);
    } else {
      out.valid[idx] = true;
      out.exact[idx] = (q - std::sqrt(disc)) / (2.0 * (1.0 + p_rep));
    }
  }
  out.plateau = out.exact.back();
  return out;
}

std::vector<double> h_probabilities(const TheoryParams& p, int k,
                                    const std::vector<double>& f) {
  assert(k >= 1 && k <= p.M);
  assert(static_cast<int>(f.size()) >= k - 1);
  const double xi = std::pow(2.0, k - 1);
  std::vector<double> h(static_cast<std::size_t>(k), 0.0);
  double prefix = 1.0;  // prod_{s=1}^{i-1} (1 - a(xi/2^s)(1 - f_{k-s}))
  for (int i = 1; i < k; ++i) {
    const double ai = a_prob(p, xi / std::pow(2.0, i));
    h[static_cast<std::size_t>(i - 1)] =
        ai * (1.0 - f[static_cast<std::size_t>(k - i - 1)]) * prefix;
    prefix *= 1.0 - ai + ai * f[static_cast<std::size_t>(k - i - 1)];
  }
  h[static_cast<std::size_t>(k - 1)] = prefix;
  return h;
}

namespace {

double c1_cost(const std::vector<double>& d) {
  const int s = static_cast<int>(d.size());
  double c1 = 0.0;
  double prod = 1.0;
  for (int j = 0; j < s; ++j) {
    c1 += (j + 1) * prod * (1.0 - d[static_cast<std::size_t>(j)]);
    prod *= d[static_cast<std::size_t>(j)];
  }
  return c1;
}

// Grid of evaluation distances: every small t, every power of two, and
// log-spaced samples up to K-1.
std::vector<std::uint64_t> build_grid(std::uint64_t K, int grid_points) {
  const std::uint64_t dense = std::min<std::uint64_t>(K - 1, 1024);
  std::vector<std::uint64_t> ts;
  for (std::uint64_t t = 1; t <= dense; ++t) ts.push_back(t);
  for (std::uint64_t v = 2; v < K; v <<= 1) ts.push_back(v);
  if (K - 1 > dense) {
    const int extra = std::max(grid_points - static_cast<int>(dense), 256);
    const double lo = std::log(static_cast<double>(dense));
    const double hi = std::log(static_cast<double>(K - 1));
    for (int i = 1; i <= extra; ++i) {
      const double lt = lo + (hi - lo) * i / extra;
      ts.push_back(static_cast<std::uint64_t>(std::llround(std::exp(lt))));
    }
  }
  ts.push_back(K - 1);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

// Piecewise log-linear view over the computed prefix of a grid.
class GridView {
 public:
  GridView(const std::vector<std::uint64_t>& ts, const std::vector<double>& cs)
      : ts_(ts), cs_(cs) {}

  void set_computed(std::size_t n) { computed_ = n; }

  double at(std::uint64_t x) const {
    if (x == 0) return 0.0;
    const auto end = ts_.begin() + static_cast<std::ptrdiff_t>(computed_);
    auto it = std::lower_bound(ts_.begin(), end, x);
    if (it != end && *it == x) {
      return cs_[static_cast<std::size_t>(it - ts_.begin())];
    }
    if (it == ts_.begin()) return cs_.empty() ? 0.0 : cs_.front();
    if (it == end) {
      // Beyond the computed prefix: extrapolate from the last two points.
      if (computed_ < 2) return cs_[computed_ - 1];
      return interp(computed_ - 2, computed_ - 1, x);
    }
    const std::size_t hi = static_cast<std::size_t>(it - ts_.begin());
    return interp(hi - 1, hi, x);
  }

 private:
  double interp(std::size_t i, std::size_t j, std::uint64_t x) const {
    const double la = std::log(static_cast<double>(ts_[i]));
    const double lb = std::log(static_cast<double>(ts_[j]));
    const double lx = std::log(static_cast<double>(x));
    const double t = (lx - la) / (lb - la);
    return cs_[i] + t * (cs_[j] - cs_[i]);
  }

  const std::vector<std::uint64_t>& ts_;
  const std::vector<double>& cs_;
  std::size_t computed_ = 0;
};

}  // namespace

double LookupCosts::at(std::uint64_t distance) const {
  GridView view(t, c);
  view.set_computed(t.size());
  return view.at(distance);
}

LookupCosts lookup_costs(const TheoryParams& p, const std::vector<double>& f,
                         const std::vector<double>& d,
                         const LookupOptions& opt) {
  assert(static_cast<int>(f.size()) == p.M);
  const double rho = p.rho;
  const bool exact = p.K <= opt.exact_max_K;

  LookupCosts out;
  out.exact = exact;
  out.t = exact ? std::vector<std::uint64_t>() : build_grid(p.K, opt.grid_points);
  if (exact) {
    out.t.resize(p.K - 1);
    for (std::uint64_t i = 0; i + 1 < p.K; ++i) out.t[i] = i + 1;
  }
  out.c.assign(out.t.size(), 0.0);

  // Geometric-tail truncation for bc-weighted sums.
  const std::uint64_t lmax = rho >= 1.0 ? ~std::uint64_t{0}
      : static_cast<std::uint64_t>(
            std::ceil(std::log(opt.tail_eps) / std::log(rho)));
  std::vector<double> rho_pow(static_cast<std::size_t>(
                                  std::min<std::uint64_t>(lmax + 1, p.K)),
                              1.0);
  for (std::size_t i = 1; i < rho_pow.size(); ++i) {
    rho_pow[i] = rho_pow[i - 1] * rho;
  }

  // h_k(i) per finger index, from the supplied failure vector.
  std::vector<std::vector<double>> h(static_cast<std::size_t>(p.M + 1));
  for (int k = 1; k <= p.M; ++k) {
    h[static_cast<std::size_t>(k)] = h_probabilities(p, k, f);
  }

  GridView view(out.t, out.c);
  out.c[0] = c1_cost(d);  // C_1
  view.set_computed(1);

  // Walk a decreasing sequence of distances base, base-1, ... through
  // the grid, interpolating each value; amortizes the segment search.
  auto weighted_tail = [&](std::uint64_t base, std::uint64_t len,
                           double offset) {
    const std::uint64_t n = std::min(len, lmax);
    double acc = 0.0;
    double wsum = 0.0;
    for (std::uint64_t l = 0; l < n; ++l) {
      const double w = rho_pow[static_cast<std::size_t>(l)];
      acc += w * (offset + view.at(base - l));
      wsum += w;
    }
    return acc / wsum;
  };

  for (std::size_t gi = 1; gi < out.t.size(); ++gi) {
    const std::uint64_t t = out.t[gi];
    const std::uint64_t xi = std::bit_floor(t - 1);
    const int k = std::countr_zero(xi) + 1;  // finger whose start is xi back
    const std::uint64_t m = t - xi;
    const double am = a_prob(p, static_cast<double>(m));
    const double fk = f[static_cast<std::size_t>(k - 1)];
    const auto& hk = h[static_cast<std::size_t>(k)];

    double c = (1.0 - am) * view.at(xi);
    if (am > 0.0) {
      // Alive intervening finger: hop to it, then cover m - i.
      c += (1.0 - fk) * am * (1.0 + weighted_tail(m, m, 0.0));
      // Dead finger: timeout, fall back to the k-i-th finger.
      double inner = 0.0;
      for (int i = 1; i < k; ++i) {
        const std::uint64_t x = xi >> i;          // start offset xi/2^i
        const std::uint64_t base = xi - x + m;    // xi_i + m
        inner += hk[static_cast<std::size_t>(i - 1)] *
                 weighted_tail(base, x, static_cast<double>(i));
      }
      // The O(h_k(k)) successor-list term is dropped.
      c += fk * am * (1.0 + inner);
    }
    out.c[gi] = c;
    view.set_computed(gi + 1);
  }

  // L = sum_t C_t / K; trapezoid over grid segments when not exact.
  double total = out.c[0];
  for (std::size_t gi = 1; gi < out.t.size(); ++gi) {
    const double span = static_cast<double>(out.t[gi] - out.t[gi - 1]);
    total += span * 0.5 * (out.c[gi] + out.c[gi - 1]);
  }
  out.mean = total / static_cast<double>(p.K);
  return out;
}

double lookup_fit(double zero_churn_mean, double f_plateau) {
  return zero_churn_mean * (1.0 + f_plateau + 3.0 * f_plateau * f_plateau);
}

PredictionSet predict(const TheoryParams& p, const LookupOptions& opt) {
  PredictionSet out;
  out.params = p;
  out.successors = successor_predictions(p);
  out.fingers = finger_predictions(p);
  out.p_bu.resize(static_cast<std::size_t>(p.S));
  for (int n = 1; n <= p.S; ++n) {
    out.p_bu[static_cast<std::size_t>(n - 1)] =
        std::min(1.0, breakup_probability(p, n));
  }
  out.lookup_mean = lookup_costs(p, out.fingers.exact, out.successors.d, opt).mean;
  const std::vector<double> zero_f(static_cast<std::size_t>(p.M), 0.0);
  const std::vector<double> zero_d(static_cast<std::size_t>(p.S), 0.0);
  out.lookup_zero_churn = lookup_costs(p, zero_f, zero_d, opt).mean;
  out.lookup_fit_value = lookup_fit(out.lookup_zero_churn, out.fingers.plateau);
  return out;
}

}  // namespace theory
}  // namespace chordlab
