#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rllbec/entropy.hpp"
#include "rllbec/rng.hpp"
#include "rllbec/sq_chain.hpp"

namespace rllbec {

struct SimReport {
  long long n = 0;
  long long burn_in = 0;
  std::uint64_t seed = 0;
  double eps = 0.0;
  int d = 0;
  int num_s = 0;
  int num_q = 0;
  // Joint visit frequencies over (s,q), indexed like SQChain::state_index.
  std::vector<double> empirical_pi;
  // Raw (x, q, y) counts: counts[q][x][y].
  std::vector<std::array<std::array<long long, kOutputCount>, 2>> counts;
  // Plug-in estimate of I(X;Y|Q) = H(Y|Q) - H(Y|X,Q) in bits.
  double empirical_i = 0.0;
};

/// Runs the (S,Q) chain for n steps after burn_in discarded steps, drawing
/// x ~ policy and y ~ BEC(eps) at each step. State tallies are taken
/// before each transition, starting from (s = d, q = root).
inline SimReport simulate(const RllPresentation& pres, const QGraph& g,
                          const InputPolicy& policy, double eps, long long n,
                          std::uint64_t seed, long long burn_in = 1000) {
  if (n < 10000)
    throw std::invalid_argument("simulation length must be at least 10^4 steps");
  if (burn_in < 0) throw std::invalid_argument("burn_in must be nonnegative");
  const SQChain chain = build_sq_chain(pres, g, eps, policy);
  const ClassAnalysis classes = closed_classes(chain);
  if (classes.closed_classes.size() != 1)
    throw std::invalid_argument(
        "simulation requires a single closed class, found " +
        std::to_string(classes.closed_classes.size()));
  if (!is_aperiodic(chain))
    throw std::invalid_argument("simulation requires an aperiodic chain");

  SimReport rep;
  rep.n = n;
  rep.burn_in = burn_in;
  rep.seed = seed;
  rep.eps = eps;
  rep.d = pres.d;
  rep.num_s = pres.num_states();
  rep.num_q = g.node_count();
  rep.empirical_pi.assign(static_cast<std::size_t>(rep.num_s) * rep.num_q, 0.0);
  rep.counts.assign(rep.num_q, {});

  Xoshiro256pp rng(seed);
  int s = pres.d;
  int q = g.root;
  std::vector<long long> visits(rep.empirical_pi.size(), 0);
  for (long long t = 0; t < burn_in + n; ++t) {
    const bool record = t >= burn_in;
    if (record) ++visits[chain.state_index(s, q)];
    int x = 0;
    if (s == pres.d && rng.next_double() < policy.at(q)) x = 1;
    const bool erased = rng.next_double() < eps;
    const Output y = erased ? Output::erasure : (x ? Output::one : Output::zero);
    if (record) ++rep.counts[q][x][static_cast<int>(y)];
    s = pres.next_state(s, x);
    q = g.step(q, y);
    if (q < 0) throw std::logic_error("Q-graph missing label reached in simulation");
  }
  for (std::size_t i = 0; i < visits.size(); ++i)
    rep.empirical_pi[i] = static_cast<double>(visits[i]) / static_cast<double>(n);

  // Plug-in conditional mutual information from the (x,q,y) table.
  double h_y_q = 0.0, h_y_xq = 0.0;
  for (int qi = 0; qi < rep.num_q; ++qi) {
    std::array<double, kOutputCount> py{};
    double pq = 0.0;
    for (int x = 0; x < 2; ++x) {
      double pxq = 0.0;
      std::array<double, kOutputCount> pyx{};
      for (int y = 0; y < kOutputCount; ++y) {
        const double p = static_cast<double>(rep.counts[qi][x][y]) / n;
        py[y] += p;
        pyx[y] = p;
        pxq += p;
        pq += p;
      }
      for (int y = 0; y < kOutputCount; ++y)
        if (pyx[y] > 0.0) h_y_xq -= pyx[y] * std::log2(pyx[y] / pxq);
    }
    for (int y = 0; y < kOutputCount; ++y)
      if (py[y] > 0.0) h_y_q -= py[y] * std::log2(py[y] / pq);
  }
  rep.empirical_i = h_y_q - h_y_xq;
  return rep;
}

/// Convenience overload on the de Bruijn Q-graph for constraint order d.
inline SimReport simulate(int d, double eps, const InputPolicy& policy,
                          long long n, std::uint64_t seed,
                          long long burn_in = 1000) {
  return simulate(build_presentation(d), build_debruijn_qgraph(d), policy, eps,
                  n, seed, burn_in);
}

/// Max-abs gap between empirical visit frequencies and an exact stationary
/// distribution over all (s,q) pairs.
inline double empirical_stationary_residual(const SimReport& rep,
                                            const StationaryDistribution& st) {
  if (rep.empirical_pi.size() != st.pi.size())
    throw std::invalid_argument("dimension mismatch between report and distribution");
  double worst = 0.0;
  for (std::size_t i = 0; i < st.pi.size(); ++i)
    worst = std::max(worst, std::abs(rep.empirical_pi[i] - st.pi[i]));
  return worst;
}

/// One row per (s,q) pair: s, q-node name, empirical frequency (%.9g).
inline void write_sim_csv(std::ostream& os, const SimReport& rep, const QGraph& g) {
  os << "s,q,frequency\n";
  char buf[64];
  for (int q = 0; q < rep.num_q; ++q)
    for (int s = 0; s < rep.num_s; ++s) {
      std::snprintf(buf, sizeof buf, "%.9g",
                    rep.empirical_pi[static_cast<std::size_t>(q) * rep.num_s + s]);
      os << s << ',' << g.node_name(q) << ',' << buf << '\n';
    }
}

}  // namespace rllbec
