#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "rllbec/qgraph.hpp"
#include "rllbec/sq_chain.hpp"

namespace rllbec {

/// beta_s = number of 0s strictly left of position s in the d-tuple.
inline std::vector<int> beta_vector(int tuple_mask, int d) {
  std::vector<int> beta(d, 0);
  int zeros = 0;
  for (int s = 0; s < d; ++s) {
    beta[s] = zeros;
    if (((tuple_mask >> s) & 1) == 0) ++zeros;
  }
  return beta;
}

inline void check_base_parameter(double a, int d) {
  if (!(a >= 0.0 && a <= 1.0 / (d + 1)))
    throw std::domain_error("base parameter a must lie in [0, 1/(d+1)] = [0, 1/" +
                            std::to_string(d + 1) + "]");
}

/// Belief vector theta_v over states for one Q-node.
///
/// Chain nodes Q_i carry the unit vector e_i. A de Bruijn tuple q gets
/// theta_q(s) = 0 where w_s = 0 and a/(1-a)^{beta_s} where w_s = ?, with
/// theta_q(d) absorbing the remainder.
inline std::vector<double> theta_vector(const QGraph& g, int v, double a) {
  const int d = g.d;
  check_base_parameter(a, d);
  std::vector<double> theta(d + 1, 0.0);
  const QNodeKind& kind = g.kinds[v];
  if (kind.is_chain) {
    theta[kind.value] = 1.0;
    return theta;
  }
  const std::vector<int> beta = beta_vector(kind.value, d);
  double sum = 0.0;
  for (int s = 0; s < d; ++s)
    if ((kind.value >> s) & 1) {
      theta[s] = a / std::pow(1.0 - a, beta[s]);
      sum += theta[s];
    }
  theta[d] = 1.0 - sum;
  return theta;
}

/// All belief vectors of a graph, indexed by node.
inline std::vector<std::vector<double>> theta_assignment(const QGraph& g,
                                                         double a) {
  std::vector<std::vector<double>> thetas(g.node_count());
  for (int v = 0; v < g.node_count(); ++v) thetas[v] = theta_vector(g, v, a);
  return thetas;
}

/// The BCJR-invariant policy on the de Bruijn graph: a_{Q_i} = 0 for the
/// chain nodes, a_q = a / theta_q(d) for the tuple nodes (a at Q_d).
/// The ratio is 1 exactly at the domain boundary; clamping absorbs the
/// one-ulp overshoot that rounding can produce there.
inline InputPolicy build_policy(const QGraph& g, double a) {
  check_base_parameter(a, g.d);
  InputPolicy policy;
  policy.p_one.resize(g.node_count(), 0.0);
  for (int v = 0; v < g.node_count(); ++v) {
    if (g.kinds[v].is_chain) continue;
    const double theta_d = theta_vector(g, v, a).back();
    policy.p_one[v] = a == 0.0 ? 0.0 : std::clamp(a / theta_d, 0.0, 1.0);
  }
  return policy;
}

inline InputPolicy build_policy(int d, double a) {
  return build_policy(build_debruijn_qgraph(d), a);
}

/// Probability of output y at node v given belief theta_v and the node's
/// P(X=1|S=d) value a_v.
inline double output_prob_at_node(const std::vector<double>& theta_v, double a_v,
                                  Output y, double eps) {
  const int d = static_cast<int>(theta_v.size()) - 1;
  const double p_one = theta_v[d] * a_v;  // P(X=1 | v)
  switch (y) {
    case Output::erasure: return eps;
    case Output::one: return (1.0 - eps) * p_one;
    case Output::zero: return (1.0 - eps) * (1.0 - p_one);
  }
  return 0.0;
}

/// One step of the Bayesian state-belief update: the posterior over s+
/// after observing y at a node with belief theta_v and parameter a_v.
/// Throws when y has zero probability there.
inline std::vector<double> bcjr_update(const std::vector<double>& theta_v,
                                       Output y, double a_v, int d, double eps) {
  const double denom = output_prob_at_node(theta_v, a_v, y, eps);
  if (denom <= 0.0)
    throw std::domain_error("impossible observation: P(y|v) = 0");
  std::vector<double> post(d + 1, 0.0);
  RllPresentation pres{d};
  for (int s = 0; s <= d; ++s) {
    if (theta_v[s] == 0.0) continue;
    for (int x : pres.allowed_inputs(s)) {
      const double px = (s == d) ? (x == 1 ? a_v : 1.0 - a_v) : (x == 0 ? 1.0 : 0.0);
      if (px == 0.0) continue;
      double py;
      if (y == Output::erasure) py = eps;
      else py = (static_cast<int>(y) == 2 * x) ? 1.0 - eps : 0.0;
      if (py == 0.0) continue;
      post[pres.next_state(s, x)] += theta_v[s] * px * py;
    }
  }
  for (double& p : post) p /= denom;
  return post;
}

/// Closed-form counterpart of bcjr_update for the constructed beliefs:
/// e_{i+1} at chain nodes; at tuple nodes, y=1 resets to e_0, y=? shifts
/// with a in front, y=0 shifts with a 1/(1-a) rescale.
inline std::vector<double> bcjr_update_closed_form(const QGraph& g, int v,
                                                   const std::vector<double>& theta_v,
                                                   Output y, double a) {
  const int d = g.d;
  std::vector<double> post(d + 1, 0.0);
  if (g.kinds[v].is_chain) {
    if (y == Output::one)
      throw std::domain_error("impossible observation: P(1|Q_i) = 0");
    if (g.kinds[v].value >= d)
      throw std::invalid_argument("closed form covers chain nodes Q_0..Q_{d-1}");
    post[g.kinds[v].value + 1] = 1.0;
    return post;
  }
  switch (y) {
    case Output::one:
      post[0] = 1.0;
      return post;
    case Output::erasure: {
      post[0] = a;  // a_q * theta_q(d)
      double sum = post[0];
      for (int s = 1; s < d; ++s) {
        post[s] = theta_v[s - 1];
        sum += post[s];
      }
      post[d] = 1.0 - sum;
      return post;
    }
    case Output::zero: {
      double sum = 0.0;
      for (int s = 1; s < d; ++s) {
        post[s] = theta_v[s - 1] / (1.0 - a);
        sum += post[s];
      }
      post[d] = 1.0 - sum;
      return post;
    }
  }
  return post;
}

/// Worst-case |theta_{Phi(v,y)}(s) - B_s(theta_v, y)| over realizable
/// (v,y) pairs; zero-probability outputs are skipped.
inline double verify_invariance(int d, double a, double eps) {
  const QGraph g = build_debruijn_qgraph(d);
  const InputPolicy policy = build_policy(g, a);
  const auto thetas = theta_assignment(g, a);
  double worst = 0.0;
  for (int v = 0; v < g.node_count(); ++v)
    for (Output y : kOutputs) {
      if (output_prob_at_node(thetas[v], policy.at(v), y, eps) <= 0.0) continue;
      const auto post = bcjr_update(thetas[v], y, policy.at(v), d, eps);
      const auto& target = thetas[g.step(v, y)];
      for (int s = 0; s <= d; ++s)
        worst = std::max(worst, std::abs(target[s] - post[s]));
    }
  return worst;
}

/// Worst-case |theta_v(s) pi(v) - pi(s,v)| over all (s,v); pi(s,v) is zero
/// off the closed class.
inline double verify_stationary_identification(int d, double a, double eps) {
  const RllPresentation pres = build_presentation(d);
  const QGraph g = build_debruijn_qgraph(d);
  const InputPolicy policy = build_policy(g, a);
  const SQChain chain = build_sq_chain(pres, g, eps, policy);
  const StationaryDistribution st = stationary(chain);
  const auto thetas = theta_assignment(g, a);
  double worst = 0.0;
  for (int v = 0; v < g.node_count(); ++v)
    for (int s = 0; s <= d; ++s) {
      const double lhs = thetas[v][s] * st.pi_q[v];
      const double rhs = st.at(chain, s, v);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  return worst;
}

}  // namespace rllbec
