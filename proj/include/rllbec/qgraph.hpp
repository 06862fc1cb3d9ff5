#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rllbec/constraint.hpp"

namespace rllbec {

/// BEC output symbols. The erasure is written '?' in listings.
enum class Output : int { zero = 0, erasure = 1, one = 2 };

inline constexpr int kOutputCount = 3;
inline constexpr std::array<Output, kOutputCount> kOutputs = {
    Output::zero, Output::erasure, Output::one};

inline char output_char(Output y) {
  switch (y) {
    case Output::zero: return '0';
    case Output::erasure: return '?';
    case Output::one: return '1';
  }
  return '!';
}

/// A node is either a de Bruijn d-tuple over {0,?} (stored as a bit mask,
/// bit i set <=> w_i = '?') or a chain node with an index.
struct QNodeKind {
  bool is_chain = false;
  int value = 0;  // tuple mask, or chain index
};

/// Finite directed graph with one outgoing transition per output symbol.
/// Immutable after construction.
struct QGraph {
  int d = 0;
  int root = 0;
  std::vector<QNodeKind> kinds;
  std::vector<std::array<int, 3>> next;  // next[q][y], -1 = missing

  int node_count() const { return static_cast<int>(next.size()); }

  int step(int q, Output y) const { return next[q][static_cast<int>(y)]; }

  std::string node_name(int q) const {
    const QNodeKind& k = kinds[q];
    if (k.is_chain) return "Q" + std::to_string(k.value);
    std::string s = "(";
    for (int i = 0; i < d; ++i) {
      s += (k.value >> i) & 1 ? '?' : '0';
      if (i + 1 < d) s += ',';
    }
    return s + ")";
  }

  /// Plain-text adjacency listing: one "node y next" line per transition.
  void dump(std::ostream& os) const {
    for (int q = 0; q < node_count(); ++q)
      for (Output y : kOutputs) {
        const int to = step(q, y);
        os << node_name(q) << ' ' << output_char(y) << ' '
           << (to >= 0 ? node_name(to) : "-") << '\n';
      }
  }
};

/// Q-graph used for the lower bound: a de Bruijn graph of order d on {0,?}
/// (2^d tuple nodes) plus chain nodes Q_0..Q_{d-1}.
///
/// Tuples shift from the left: the new output symbol becomes w_0 and the
/// oldest coordinate w_{d-1} drops out. Output 1 always resets to Q_0; from
/// Q_i both 0 and ? lead to Q_{i+1}, with Q_d denoting the all-zero tuple.
/// Output 1 cannot occur at a chain node, so its transition (required for
/// totality) conventionally targets Q_0.
inline QGraph build_debruijn_qgraph(int d, int cap = kMaxRunLength) {
  build_presentation(d, cap);  // validates d
  QGraph g;
  g.d = d;
  const int ntuples = 1 << d;
  const int n = ntuples + d;
  const int mask_all = ntuples - 1;
  const int q0 = ntuples;  // chain node Q_0
  g.kinds.resize(n);
  g.next.resize(n);
  for (int m = 0; m < ntuples; ++m) {
    g.kinds[m] = {false, m};
    const int shifted = (m << 1) & mask_all;
    g.next[m][static_cast<int>(Output::zero)] = shifted;
    g.next[m][static_cast<int>(Output::erasure)] = shifted | 1;
    g.next[m][static_cast<int>(Output::one)] = q0;
  }
  for (int i = 0; i < d; ++i) {
    const int id = ntuples + i;
    g.kinds[id] = {true, i};
    const int succ = (i + 1 < d) ? id + 1 : 0;  // Q_d is the all-zero tuple
    g.next[id][static_cast<int>(Output::zero)] = succ;
    g.next[id][static_cast<int>(Output::erasure)] = succ;
    g.next[id][static_cast<int>(Output::one)] = q0;
  }
  g.root = 0;  // Q_d: both sides know the initial state
  return g;
}

/// Q-graph used for the analytic upper bound: a chain Q^_0 -> ... -> Q^_d
/// advanced by outputs 0 and ?, absorbing at Q^_d, with output 1 resetting
/// every node to Q^_0.
inline QGraph build_chain_qgraph(int d, int cap = kMaxRunLength) {
  build_presentation(d, cap);
  QGraph g;
  g.d = d;
  g.kinds.resize(d + 1);
  g.next.resize(d + 1);
  for (int i = 0; i <= d; ++i) {
    g.kinds[i] = {true, i};
    const int succ = std::min(i + 1, d);
    g.next[i][static_cast<int>(Output::zero)] = succ;
    g.next[i][static_cast<int>(Output::erasure)] = succ;
    g.next[i][static_cast<int>(Output::one)] = 0;
  }
  g.root = d;
  return g;
}

namespace detail {

/// Iterative Tarjan SCC over an adjacency-list digraph.
/// Returns the component id per vertex; ids are in reverse topological order.
inline int strongly_connected_components(
    const std::vector<std::vector<int>>& adj, std::vector<int>& comp) {
  const int n = static_cast<int>(adj.size());
  comp.assign(n, -1);
  std::vector<int> index(n, -1), lowlink(n, 0), stack, frame_child(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<int> call;
  int next_index = 0, ncomp = 0;
  for (int start = 0; start < n; ++start) {
    if (index[start] != -1) continue;
    call.push_back(start);
    while (!call.empty()) {
      const int v = call.back();
      if (index[v] == -1) {
        index[v] = lowlink[v] = next_index++;
        stack.push_back(v);
        on_stack[v] = 1;
        frame_child[v] = 0;
      }
      bool descended = false;
      while (frame_child[v] < static_cast<int>(adj[v].size())) {
        const int w = adj[v][frame_child[v]++];
        if (index[w] == -1) {
          call.push_back(w);
          descended = true;
          break;
        }
        if (on_stack[w]) lowlink[v] = std::min(lowlink[v], index[w]);
      }
      if (descended) continue;
      if (lowlink[v] == index[v]) {
        while (true) {
          const int w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = ncomp;
          if (w == v) break;
        }
        ++ncomp;
      }
      call.pop_back();
      if (!call.empty()) {
        const int parent = call.back();
        lowlink[parent] = std::min(lowlink[parent], lowlink[v]);
      }
    }
  }
  return ncomp;
}

}  // namespace detail

/// Checks the Q-graph properties: a transition per output symbol at every
/// node, and strong connectivity. Returns the list of violations.
inline std::vector<std::string> validate(const QGraph& g) {
  std::vector<std::string> violations;
  const int n = g.node_count();
  for (int q = 0; q < n; ++q)
    for (Output y : kOutputs) {
      const int to = g.step(q, y);
      if (to < 0 || to >= n)
        violations.push_back("missing label " + std::string(1, output_char(y)) +
                             " at node " + g.node_name(q));
    }
  if (!violations.empty()) return violations;

  std::vector<std::vector<int>> adj(n);
  for (int q = 0; q < n; ++q)
    for (Output y : kOutputs) adj[q].push_back(g.step(q, y));
  std::vector<int> comp;
  if (detail::strongly_connected_components(adj, comp) != 1)
    violations.push_back("graph is not strongly connected");
  return violations;
}

}  // namespace rllbec
