#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "rllbec/constraint.hpp"
#include "rllbec/entropy.hpp"
#include "rllbec/qgraph.hpp"

namespace rllbec {

/// P(X=1 | S=d, Q=v), one entry per Q-node. P(X=1|s,v) = 0 for s < d is
/// implicit: the constraint admits no other choice.
struct InputPolicy {
  std::vector<double> p_one;

  double at(int q) const { return p_one[q]; }
};

/// Markov chain on (s,q) pairs induced by a Q-graph, an input policy and a
/// BEC(eps). Zero-probability transitions are pruned at construction.
struct SQChain {
  struct Edge {
    int x;
    Output y;
    int to;
    double p;
  };

  RllPresentation pres;
  QGraph graph;
  double eps = 0.0;
  InputPolicy policy;
  std::vector<std::vector<Edge>> edges;  // per (s,q) state

  int num_q() const { return graph.node_count(); }
  int num_s() const { return pres.num_states(); }
  int num_states() const { return num_s() * num_q(); }

  int state_index(int s, int q) const { return q * num_s() + s; }
  int state_s(int i) const { return i % num_s(); }
  int state_q(int i) const { return i / num_s(); }

  /// P(x | s, q) under the policy.
  double input_prob(int s, int q, int x) const {
    const double a = (s == pres.d) ? policy.at(q) : 0.0;
    return x == 1 ? a : 1.0 - a;
  }

  /// BEC kernel P(y | x).
  double channel_prob(Output y, int x) const {
    if (y == Output::erasure) return eps;
    return (static_cast<int>(y) == 2 * x) ? 1.0 - eps : 0.0;
  }

  /// Probability of the labelled transition (s,q) --(x,y)--> (.,.),
  /// zero if pruned.
  double transition_probability(int s, int q, int x, Output y) const {
    for (const Edge& e : edges[state_index(s, q)])
      if (e.x == x && e.y == y) return e.p;
    return 0.0;
  }
};

inline SQChain build_sq_chain(const RllPresentation& pres, const QGraph& g,
                              double eps, const InputPolicy& policy) {
  if (!(eps >= 0.0 && eps <= 1.0))
    throw std::invalid_argument("erasure probability must lie in [0,1]");
  if (static_cast<int>(policy.p_one.size()) != g.node_count())
    throw std::invalid_argument("policy size does not match the Q-graph");
  for (double a : policy.p_one)
    if (!(a >= 0.0 && a <= 1.0))
      throw std::invalid_argument("policy values must lie in [0,1]");

  SQChain c;
  c.pres = pres;
  c.graph = g;
  c.eps = eps;
  c.policy = policy;
  c.edges.resize(c.num_states());
  for (int q = 0; q < c.num_q(); ++q)
    for (int s = 0; s <= pres.d; ++s) {
      auto& out = c.edges[c.state_index(s, q)];
      for (int x : pres.allowed_inputs(s)) {
        const double px = c.input_prob(s, q, x);
        if (px == 0.0) continue;
        const int s_next = pres.next_state(s, x);
        for (Output y : kOutputs) {
          const double pxy = px * c.channel_prob(y, x);
          if (pxy == 0.0) continue;
          out.push_back({x, y, c.state_index(s_next, g.step(q, y)), pxy});
        }
      }
    }
  return c;
}

/// Communicating-class structure of the pruned chain.
struct ClassAnalysis {
  std::vector<std::vector<int>> closed_classes;  // states, ascending
  std::vector<int> component;                    // SCC id per state
  int scc_count = 0;
};

inline ClassAnalysis closed_classes(const SQChain& c) {
  const int n = c.num_states();
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i)
    for (const auto& e : c.edges[i]) adj[i].push_back(e.to);

  ClassAnalysis a;
  a.scc_count = detail::strongly_connected_components(adj, a.component);
  std::vector<char> open(a.scc_count, 0);
  for (int i = 0; i < n; ++i)
    for (int to : adj[i])
      if (a.component[to] != a.component[i]) open[a.component[i]] = 1;
  std::vector<std::vector<int>> by_comp(a.scc_count);
  for (int i = 0; i < n; ++i) by_comp[a.component[i]].push_back(i);
  for (int k = 0; k < a.scc_count; ++k)
    if (!open[k]) a.closed_classes.push_back(std::move(by_comp[k]));
  return a;
}

inline bool is_in_omega(const SQChain& c) {
  return closed_classes(c).closed_classes.size() == 1;
}

namespace detail {

/// Period of a strongly connected state set: gcd of (dist[u]+1-dist[v])
/// over its edges, with BFS distances from an arbitrary member.
inline int class_period(const SQChain& c, const std::vector<int>& states) {
  std::vector<int> dist(c.num_states(), -1);
  std::vector<char> member(c.num_states(), 0);
  for (int s : states) member[s] = 1;
  std::vector<int> queue{states.front()};
  dist[states.front()] = 0;
  for (std::size_t h = 0; h < queue.size(); ++h) {
    const int u = queue[h];
    for (const auto& e : c.edges[u])
      if (member[e.to] && dist[e.to] == -1) {
        dist[e.to] = dist[u] + 1;
        queue.push_back(e.to);
      }
  }
  int g = 0;
  for (int u : states)
    for (const auto& e : c.edges[u])
      if (member[e.to]) g = std::gcd(g, std::abs(dist[u] + 1 - dist[e.to]));
  return g == 0 ? 1 : g;
}

}  // namespace detail

inline bool is_aperiodic(const SQChain& c) {
  const ClassAnalysis a = closed_classes(c);
  for (const auto& cls : a.closed_classes)
    if (detail::class_period(c, cls) != 1) return false;
  return !a.closed_classes.empty();
}

/// Stationary distribution of a chain in Omega, with per-node marginals
/// pi(q) and conditionals pi(s|q). Entries off the closed class are zero.
struct StationaryDistribution {
  std::vector<double> pi;          // per (s,q) state
  std::vector<double> pi_q;        // marginal per Q-node
  std::vector<double> pi_s_given_q;  // [q * (d+1) + s], zero where pi_q = 0
  std::vector<int> support;        // the closed class
  double residual = 0.0;           // max |pi T - pi|

  double at(const SQChain& c, int s, int q) const {
    return pi[c.state_index(s, q)];
  }
};

namespace detail {

inline std::vector<double> solve_stationary_dense(
    const SQChain& c, const std::vector<int>& states) {
  const int m = static_cast<int>(states.size());
  std::vector<int> local(c.num_states(), -1);
  for (int i = 0; i < m; ++i) local[states[i]] = i;

  // (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
  std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
  for (int i = 0; i < m; ++i) {
    for (const auto& e : c.edges[states[i]]) {
      const int j = local[e.to];
      if (j >= 0 && j < m - 1) a[j][i] += e.p;
    }
    if (i < m - 1) a[i][i] -= 1.0;
    a[m - 1][i] = 1.0;
  }
  a[m - 1][m] = 1.0;

  for (int col = 0; col < m; ++col) {
    int pivot = col;
    for (int r = col + 1; r < m; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    std::swap(a[col], a[pivot]);
    if (a[col][col] == 0.0)
      throw std::runtime_error("singular stationary system");
    for (int r = 0; r < m; ++r) {
      if (r == col || a[r][col] == 0.0) continue;
      const double f = a[r][col] / a[col][col];
      for (int k = col; k <= m; ++k) a[r][k] -= f * a[col][k];
    }
  }
  std::vector<double> pi(m);
  for (int i = 0; i < m; ++i) pi[i] = a[i][m] / a[i][i];
  return pi;
}

inline std::vector<double> solve_stationary_power(
    const SQChain& c, const std::vector<int>& states) {
  const int m = static_cast<int>(states.size());
  std::vector<int> local(c.num_states(), -1);
  for (int i = 0; i < m; ++i) local[states[i]] = i;
  std::vector<double> pi(m, 1.0 / m), nxt(m);
  for (long it = 0; it < 1000000; ++it) {
    std::fill(nxt.begin(), nxt.end(), 0.0);
    for (int i = 0; i < m; ++i)
      for (const auto& e : c.edges[states[i]]) nxt[local[e.to]] += pi[i] * e.p;
    double diff = 0.0, sum = 0.0;
    for (int i = 0; i < m; ++i) {
      diff = std::max(diff, std::abs(nxt[i] - pi[i]));
      sum += nxt[i];
    }
    for (int i = 0; i < m; ++i) pi[i] = nxt[i] / sum;
    if (diff <= 1e-13) break;
  }
  return pi;
}

}  // namespace detail

/// Solves pi T = pi on the single closed class. Dense elimination up to
/// `max_dense_states` class states, power iteration beyond.
inline StationaryDistribution stationary(const SQChain& c,
                                         int max_dense_states = 5000) {
  const ClassAnalysis a = closed_classes(c);
  if (a.closed_classes.size() != 1) {
    std::string msg = "chain is not in Omega: " +
                      std::to_string(a.closed_classes.size()) +
                      " closed classes:";
    for (const auto& cls : a.closed_classes) {
      msg += " {";
      for (std::size_t i = 0; i < std::min<std::size_t>(cls.size(), 4); ++i)
        msg += (i ? "," : "") + std::to_string(cls[i]);
      if (cls.size() > 4) msg += ",...";
      msg += "}";
    }
    throw std::runtime_error(msg);
  }
  const std::vector<int>& cls = a.closed_classes.front();
  const int period = detail::class_period(c, cls);
  if (period != 1)
    throw std::runtime_error("closed class is periodic with period " +
                             std::to_string(period));

  const std::vector<double> local =
      static_cast<int>(cls.size()) <= max_dense_states
          ? detail::solve_stationary_dense(c, cls)
          : detail::solve_stationary_power(c, cls);

  StationaryDistribution st;
  st.support = cls;
  st.pi.assign(c.num_states(), 0.0);
  for (std::size_t i = 0; i < cls.size(); ++i)
    st.pi[cls[i]] = std::max(local[i], 0.0);

  st.pi_q.assign(c.num_q(), 0.0);
  for (int i : cls) st.pi_q[c.state_q(i)] += st.pi[i];
  st.pi_s_given_q.assign(c.num_states(), 0.0);
  for (int i : cls)
    if (st.pi_q[c.state_q(i)] > 0.0)
      st.pi_s_given_q[i] = st.pi[i] / st.pi_q[c.state_q(i)];

  std::vector<double> flow(c.num_states(), 0.0);
  for (int i : cls)
    for (const auto& e : c.edges[i]) flow[e.to] += st.pi[i] * e.p;
  for (int i : cls) st.residual = std::max(st.residual, std::abs(flow[i] - st.pi[i]));
  return st;
}

/// Output distribution P_Y(. | q) under the stationary law.
inline std::array<double, 3> output_distribution(const SQChain& c,
                                                 const StationaryDistribution& st,
                                                 int q) {
  std::array<double, 3> py{0.0, 0.0, 0.0};
  for (int s = 0; s <= c.pres.d; ++s) {
    const double ps = st.pi_s_given_q[c.state_index(s, q)];
    if (ps == 0.0) continue;
    for (int x : c.pres.allowed_inputs(s)) {
      const double px = c.input_prob(s, q, x);
      if (px == 0.0) continue;
      for (Output y : kOutputs)
        py[static_cast<int>(y)] += ps * px * c.channel_prob(y, x);
    }
  }
  return py;
}

/// I(X;Y|Q) = H(Y|Q) - H(Y|X,Q) in bits; H(Y|X,Q) = h_b(eps) for the BEC.
inline double conditional_mutual_information(const SQChain& c,
                                             const StationaryDistribution& st) {
  double h_y_given_q = 0.0;
  for (int q = 0; q < c.num_q(); ++q) {
    if (st.pi_q[q] == 0.0) continue;
    const auto py = output_distribution(c, st, q);
    h_y_given_q += st.pi_q[q] * entropy_bits(py);
  }
  return h_y_given_q - binary_entropy(c.eps);
}

}  // namespace rllbec
