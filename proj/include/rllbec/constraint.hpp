#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace rllbec {

/// Default cap on d. The de Bruijn Q-graph has 2^d + d nodes, so the
/// product chain on S x Q stays near one million states at d = 16.
inline constexpr int kMaxRunLength = 16;

/// Deterministic presentation of the (d,inf)-RLL constraint.
///
/// State s counts the 0s seen since the last 1, saturated at d.
/// A 1 may only be emitted from state d, and resets the count.
struct RllPresentation {
  int d = 1;

  int num_states() const { return d + 1; }

  bool input_allowed(int s, int x) const { return x == 0 || s == d; }

  /// f(s,x): next state for an admissible (s,x) pair.
  int next_state(int s, int x) const {
    if (!input_allowed(s, x))
      throw std::invalid_argument("input 1 is inadmissible at state " +
                                  std::to_string(s));
    return x == 0 ? std::min(s + 1, d) : 0;
  }

  std::vector<int> allowed_inputs(int s) const {
    if (s < 0 || s > d) throw std::out_of_range("state out of range");
    if (s < d) return {0};
    return {0, 1};
  }
};

inline RllPresentation build_presentation(int d, int cap = kMaxRunLength) {
  if (d < 1)
    throw std::invalid_argument(
        "(d,inf)-RLL requires d >= 1; d = 0 is the unconstrained channel");
  if (d > cap)
    throw std::invalid_argument("d = " + std::to_string(d) +
                                " exceeds the size cap " + std::to_string(cap));
  return RllPresentation{d};
}

/// Noiseless capacity of the (d,inf) constraint in bits/symbol:
/// log2 of the spectral radius of the presentation's adjacency matrix.
///
/// Power iteration; the matrix is primitive, so convergence is guaranteed.
inline double noiseless_capacity(int d, int cap = kMaxRunLength) {
  const RllPresentation pres = build_presentation(d, cap);
  const int n = pres.num_states();
  std::vector<std::vector<double>> adj(n, std::vector<double>(n, 0.0));
  for (int s = 0; s <= d; ++s)
    for (int x : pres.allowed_inputs(s)) adj[s][pres.next_state(s, x)] = 1.0;

  std::vector<double> v(n, 1.0 / n), w(n);
  double lambda = 0.0;
  // Convergence is judged on the vector, not the eigenvalue estimate: the
  // sum-norm sequence is not monotone and can repeat a value early on.
  constexpr double kVecTol = 1e-14;
  constexpr long kMaxIter = 1000000;
  for (long it = 0; it < kMaxIter; ++it) {
    double norm = 0.0;
    for (int i = 0; i < n; ++i) {
      w[i] = 0.0;
      for (int j = 0; j < n; ++j) w[i] += adj[i][j] * v[j];
      norm += w[i];
    }
    double diff = 0.0;
    for (int i = 0; i < n; ++i) {
      w[i] /= norm;
      diff = std::max(diff, std::abs(w[i] - v[i]));
      v[i] = w[i];
    }
    lambda = norm;
    if (diff <= kVecTol) break;
  }
  return std::log2(lambda);
}

}  // namespace rllbec
