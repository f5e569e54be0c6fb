#ifndef CHORDLAB_THEORY_HPP
#define CHORDLAB_THEORY_HPP

#include <cstdint>
#include <vector>

namespace chordlab {
namespace theory {

/// Parameter point for the steady-state predictions. rho is the
/// probability that a key is unpopulated; M = log2(K) fingers.
struct TheoryParams {
  std::uint64_t K = 0;
  double N = 0.0;
  int S = 0;
  double r = 0.0;
  double alpha = 0.0;
  int M = 0;        // derived
  double rho = 0.0; // derived

  static TheoryParams make(std::uint64_t K, double N, int S, double r,
                           double alpha);
};

/// P(x) = rho^{x-1}(1-rho): pmf of inter-node interval lengths.
double interval_pmf(const TheoryParams& p, std::uint64_t x);

/// a(x) = 1 - rho^x: probability of at least one node inside an
/// interval of length x.
double a_prob(const TheoryParams& p, double x);

/// b_i = rho^i (1-rho): first node at offset i.
double b_prob(const TheoryParams& p, std::uint64_t i);

/// bc(i,x) = b_i / a(x): offset of the first node given one exists.
double bc_prob(const TheoryParams& p, std::uint64_t i, double x);

/// p_j(k): probability that a node and at least j of its immediate
/// predecessors share the same k-th finger. Closed form for j = 1,
/// numerical summation over the interval distribution for j >= 2.
double p_share(const TheoryParams& p, int j, int k);

/// p_join(k,k): probability that a joinee replicates its successor's
/// k-th finger as its own k-th finger. Valid for k >= 3; 0 below.
double p_join(const TheoryParams& p, int k);

struct SuccessorPredictions {
  std::vector<double> w;        // w_k, k = 1..S
  std::vector<double> d;        // d_k, k = 1..S
  std::vector<bool> w_valid;    // leading-order validity (k <~ sqrt(r))
  double inconsistency = 0.0;   // I = w1 - d1
};

/// w1 = 2/(3+r*alpha); d1 = w1/2; w_k = k(k+1)/(alpha r) for k >= 2
/// (leading order); d_k = k d1.
SuccessorPredictions successor_predictions(const TheoryParams& p);

/// P_bu(n) = (n+1)! / (2 (alpha r)^n), 1 <= n <= S.
double breakup_probability(const TheoryParams& p, int n);

struct FingerPredictions {
  std::vector<double> exact;    // quadratic-root solution, k = 1..M
  std::vector<double> leading;  // (1+P~rep(k)) M / ((1-alpha) r)
  std::vector<bool> valid;      // discriminant non-negative
  double plateau = 0.0;         // large-k value of the exact root
};

FingerPredictions finger_predictions(const TheoryParams& p);

/// h_k(i), i = 1..k: probability the lookup falls back to the k-i-th
/// finger when the k-th is unusable. Sums to 1.
std::vector<double> h_probabilities(const TheoryParams& p, int k,
                                    const std::vector<double>& f);

struct LookupOptions {
  std::uint64_t exact_max_K = std::uint64_t{1} << 16;
  int grid_points = 4096;
  double tail_eps = 1e-6;
};

/// Expected per-distance lookup costs C_t and their mean L. Exact
/// dynamic program for small K; log-spaced grid with interpolation for
/// large K.
struct LookupCosts {
  std::vector<std::uint64_t> t;  // distances at which C was evaluated
  std::vector<double> c;         // C_t at those distances
  double mean = 0.0;             // L = sum_t C_t / K
  bool exact = false;

  double at(std::uint64_t distance) const;  // interpolated C_t
};

LookupCosts lookup_costs(const TheoryParams& p, const std::vector<double>& f,
                         const std::vector<double>& d,
                         const LookupOptions& opt = {});

/// Closed-fit approximation A(1 + f + 3 f^2) with A the zero-churn mean.
double lookup_fit(double zero_churn_mean, double f_plateau);

/// All theory outputs for one parameter point.
struct PredictionSet {
  TheoryParams params;
  SuccessorPredictions successors;
  FingerPredictions fingers;
  std::vector<double> p_bu;     // P_bu(n), n = 1..S
  double lookup_mean = 0.0;     // L from the recursion
  double lookup_zero_churn = 0.0;  // A
  double lookup_fit_value = 0.0;   // A(1+f+3f^2)
};

PredictionSet predict(const TheoryParams& p, const LookupOptions& opt = {});

}  // namespace theory
}  // namespace chordlab

#endif  // CHORDLAB_THEORY_HPP
