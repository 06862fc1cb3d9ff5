#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rllbec/bcjr.hpp"
#include "rllbec/entropy.hpp"
#include "rllbec/rng.hpp"
#include "rllbec/sq_chain.hpp"

namespace rllbec {

enum class BoundKind { lower, upper_analytic, noncausal, numeric_upper };

struct BoundResult {
  double value = 0.0;
  double argmax = 0.0;  // NaN for the numeric kind (multi-parameter search)
  double lo = 0.0;
  double hi = 1.0;
  BoundKind kind = BoundKind::lower;
};

/// R(delta) = h_b(delta) / (d*delta + 1/(1-eps)) in bits/channel use.
/// All three analytic bounds are maxima of R over different intervals.
inline double rate(double delta, int d, double eps) {
  if (eps >= 1.0) return 0.0;
  return binary_entropy(delta) / (d * delta + 1.0 / (1.0 - eps));
}

/// R'(delta) = ((k+d) log2(1-delta) - k log2(delta)) / (k + d*delta)^2
/// with k = 1/(1-eps). Strictly decreasing in delta; signed infinities at
/// the endpoints.
inline double rate_derivative(double delta, int d, double eps) {
  if (eps >= 1.0) return 0.0;
  if (delta <= 0.0) return std::numeric_limits<double>::infinity();
  if (delta >= 1.0) return -std::numeric_limits<double>::infinity();
  const double k = 1.0 / (1.0 - eps);
  const double num = (k + d) * std::log2(1.0 - delta) - k * std::log2(delta);
  const double den = k + d * delta;
  return num / (den * den);
}

/// Maximizes the concave R over [lo,hi]: clipped to hi when R' stays
/// positive there, otherwise golden-section to width 1e-12 followed by a
/// sign-bisection pass on R' inside the final bracket.
inline BoundResult maximize_rate(int d, double eps, double lo, double hi,
                                 BoundKind kind = BoundKind::lower) {
  if (!(0.0 <= lo && lo < hi && hi <= 1.0))
    throw std::invalid_argument("maximization interval must satisfy 0 <= lo < hi <= 1");
  BoundResult r;
  r.lo = lo;
  r.hi = hi;
  r.kind = kind;
  if (eps >= 1.0) {
    r.value = 0.0;
    r.argmax = lo;
    return r;
  }
  if (rate_derivative(hi, d, eps) >= 0.0) {
    r.argmax = hi;
    r.value = rate(hi, d, eps);
    return r;
  }

  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = rate(x1, d, eps);
  double f2 = rate(x2, d, eps);
  while (b - a > 1e-12) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = rate(x2, d, eps);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = rate(x1, d, eps);
    }
  }
  double x = 0.5 * (a + b);
  // Near the maximum, value comparisons are noise-limited, so the golden
  // bracket can sit ~1e-8 off the true argmax. Polish by bisecting the
  // derivative over a window wide enough to straddle the root.
  double ga = std::max(lo, x - 1e-6), gb = std::min(hi, x + 1e-6);
  if (rate_derivative(ga, d, eps) > 0.0 && rate_derivative(gb, d, eps) < 0.0) {
    for (int i = 0; i < 80; ++i) {
      const double mid = 0.5 * (ga + gb);
      if (rate_derivative(mid, d, eps) > 0.0)
        ga = mid;
      else
        gb = mid;
    }
    x = 0.5 * (ga + gb);
  }
  r.argmax = x;
  r.value = rate(x, d, eps);
  return r;
}

/// Achievable-rate bound: max of R over [0, 1/(d+1)].
inline BoundResult lower_bound(int d, double eps) {
  return maximize_rate(d, eps, 0.0, 1.0 / (d + 1), BoundKind::lower);
}

/// Analytic converse from the chain Q-graph: max of R over [0, 1/(1+d*eps)].
inline BoundResult upper_bound_analytic(int d, double eps) {
  return maximize_rate(d, eps, 0.0, 1.0 / (1.0 + d * eps),
                       BoundKind::upper_analytic);
}

/// Capacity with non-causal erasure knowledge: max of R over [0, 1/2].
inline BoundResult noncausal_capacity(int d, double eps) {
  return maximize_rate(d, eps, 0.0, 0.5, BoundKind::noncausal);
}

/// Threshold from the power equation
/// (d*eps)^(1/(1-eps)+d) = (1+d*eps)^d, solved in the log domain.
/// Kept as an independent consistency check on epsilon_star.
inline std::optional<double> epsilon_star_power_equation(int d) {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  const auto log_gap = [d](double eps) {
    const double k = 1.0 / (1.0 - eps);
    return (k + d) * std::log(d * eps) - d * std::log(1.0 + d * eps);
  };
  double lo = 1e-9, hi = 1.0 - 1e-12;
  if (!(log_gap(lo) < 0.0 && log_gap(hi) > 0.0)) return std::nullopt;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (log_gap(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// Erasure probability above which the analytic upper bound drops strictly
/// below the non-causal capacity: the root of R'(1/(1+d*eps)) = 0, solved
/// by bisection (better conditioned near eps -> 1 than the power form) and
/// cross-checked against the power equation to 1e-8.
/// No root exists for d = 1 (the two bounds coincide for every eps).
inline std::optional<double> epsilon_star(int d) {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  const auto boundary_slope = [d](double eps) {
    return rate_derivative(1.0 / (1.0 + d * eps), d, eps);
  };
  double lo = 1e-9, hi = 1.0 - 1e-12;
  if (!(boundary_slope(lo) < 0.0 && boundary_slope(hi) > 0.0))
    return std::nullopt;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (boundary_slope(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double root = 0.5 * (lo + hi);
  const auto check = epsilon_star_power_equation(d);
  if (!check || std::abs(*check - root) > 1e-8)
    throw std::logic_error("derivative and power forms of the threshold disagree");
  return root;
}

/// For d = 2, the erasure probability below which the feedback capacity
/// equals the non-causal capacity: 1 - 1/(2 log2(3/2)).
inline double d2_threshold() { return 1.0 - 1.0 / (2.0 * std::log2(1.5)); }

/// The boundary value R(1/(d+1)): equals the lower bound for d >= 3, and
/// for d = 2 whenever eps exceeds d2_threshold().
inline double achievable_endpoint_rate(int d, double eps) {
  return rate(1.0 / (d + 1), d, eps);
}

struct NumericUbOptions {
  int starts = 8;
  std::uint64_t seed = 0x5eedULL;
  int simplex_evals = 6000;     // per start
  int gradient_steps = 80;
  int max_dense_states = 5000;
};

namespace detail {

/// I(X;Y|Q) for a clamped policy vector; -1 when the chain leaves Omega.
class PolicyObjective {
 public:
  PolicyObjective(const QGraph& g, int d, double eps, int max_dense)
      : pres_{build_presentation(d)}, graph_(g), eps_(eps), max_dense_(max_dense) {}

  // Deterministic policies (parameters at exactly 1) can make the chain
  // periodic, so the search box is capped just below 1.
  static constexpr double kEdge = 1e-9;

  InputPolicy clamp_to_policy(const std::vector<double>& params) const {
    InputPolicy policy;
    policy.p_one.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i)
      policy.p_one[i] = std::clamp(params[i], 0.0, 1.0 - kEdge);
    return policy;
  }

  double operator()(const std::vector<double>& params) const {
    const SQChain chain = build_sq_chain(pres_, graph_, eps_, clamp_to_policy(params));
    if (!is_in_omega(chain) || !is_aperiodic(chain)) return -1.0;
    const StationaryDistribution st = stationary(chain, max_dense_);
    return conditional_mutual_information(chain, st);
  }

  std::string class_diagnostic(const std::vector<double>& params) const {
    const SQChain chain = build_sq_chain(pres_, graph_, eps_, clamp_to_policy(params));
    const ClassAnalysis a = closed_classes(chain);
    return std::to_string(a.closed_classes.size()) + " closed classes among " +
           std::to_string(a.scc_count) + " communicating classes";
  }

 private:
  RllPresentation pres_;
  const QGraph& graph_;
  double eps_;
  int max_dense_;
};

/// Nelder-Mead ascent with box clamping inside the objective.
inline std::pair<std::vector<double>, double> nelder_mead_max(
    const PolicyObjective& f, std::vector<double> x0, int max_evals) {
  const int n = static_cast<int>(x0.size());
  std::vector<std::vector<double>> pts(n + 1, x0);
  std::vector<double> vals(n + 1);
  for (int i = 0; i < n; ++i)
    pts[i + 1][i] = std::clamp(x0[i] + (x0[i] > 0.5 ? -0.15 : 0.15), 0.0, 1.0);
  int evals = 0;
  for (int i = 0; i <= n; ++i) vals[i] = f(pts[i]), ++evals;

  const auto order = [&] {
    std::vector<int> idx(n + 1);
    for (int i = 0; i <= n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return vals[a] > vals[b]; });
    std::vector<std::vector<double>> p2(n + 1);
    std::vector<double> v2(n + 1);
    for (int i = 0; i <= n; ++i) p2[i] = pts[idx[i]], v2[i] = vals[idx[i]];
    pts.swap(p2);
    vals.swap(v2);
  };
  order();

  while (evals < max_evals && vals[0] - vals[n] > 1e-13) {
    std::vector<double> centroid(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) centroid[j] += pts[i][j] / n;
    const auto affine = [&](double t) {
      std::vector<double> p(n);
      for (int j = 0; j < n; ++j) p[j] = centroid[j] + t * (centroid[j] - pts[n][j]);
      return p;
    };
    const auto refl = affine(1.0);
    const double frefl = f(refl);
    ++evals;
    if (frefl > vals[0]) {
      const auto exp_pt = affine(2.0);
      const double fexp = f(exp_pt);
      ++evals;
      if (fexp > frefl)
        pts[n] = exp_pt, vals[n] = fexp;
      else
        pts[n] = refl, vals[n] = frefl;
    } else if (frefl > vals[n - 1]) {
      pts[n] = refl, vals[n] = frefl;
    } else {
      const auto contr = affine(frefl > vals[n] ? 0.5 : -0.5);
      const double fcontr = f(contr);
      ++evals;
      if (fcontr > std::max(frefl, vals[n])) {
        pts[n] = contr, vals[n] = fcontr;
      } else {
        for (int i = 1; i <= n; ++i) {
          for (int j = 0; j < n; ++j) pts[i][j] = 0.5 * (pts[i][j] + pts[0][j]);
          vals[i] = f(pts[i]);
          ++evals;
        }
      }
    }
    order();
  }
  return {pts[0], vals[0]};
}

/// Projected finite-difference gradient ascent with backtracking.
inline std::pair<std::vector<double>, double> gradient_polish(
    const PolicyObjective& f, std::vector<double> x, double fx, int steps) {
  const int n = static_cast<int>(x.size());
  const double h = 1e-7;
  for (int it = 0; it < steps; ++it) {
    std::vector<double> grad(n);
    double gnorm = 0.0;
    for (int i = 0; i < n; ++i) {
      auto xp = x, xm = x;
      xp[i] = std::min(1.0, x[i] + h);
      xm[i] = std::max(0.0, x[i] - h);
      grad[i] = (f(xp) - f(xm)) / (xp[i] - xm[i]);
      gnorm = std::max(gnorm, std::abs(grad[i]));
    }
    if (gnorm == 0.0) break;
    double t = 0.25 / gnorm;
    bool improved = false;
    while (t > 1e-14) {
      std::vector<double> xn(n);
      for (int i = 0; i < n; ++i) xn[i] = std::clamp(x[i] + t * grad[i], 0.0, 1.0);
      const double fn = f(xn);
      if (fn > fx) {
        x = std::move(xn);
        fx = fn;
        improved = true;
        break;
      }
      t *= 0.5;
    }
    if (!improved) break;
  }
  return {x, fx};
}

}  // namespace detail

/// Best-found value of sup over policies in Omega of I(X;Y|Q) on the given
/// Q-graph: multi-start Nelder-Mead plus a projected finite-difference
/// gradient polish over the per-node parameters P(X=1|S=d,Q=v).
inline BoundResult numeric_upper_bound(const QGraph& g, int d, double eps,
                                       const NumericUbOptions& opts = {}) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("numeric upper bound requires eps in (0,1)");
  const int n = g.node_count();
  const detail::PolicyObjective objective(g, d, eps, opts.max_dense_states);

  std::vector<std::vector<double>> starts;
  for (double c : {0.5, 0.25, 0.75, 0.9, 1.0 - detail::PolicyObjective::kEdge})
    starts.emplace_back(n, c);
  const bool has_tuple_nodes =
      std::any_of(g.kinds.begin(), g.kinds.end(),
                  [](const QNodeKind& k) { return !k.is_chain; });
  if (has_tuple_nodes)
    starts.push_back(build_policy(g, lower_bound(d, eps).argmax).p_one);
  Xoshiro256pp rng(opts.seed);
  while (static_cast<int>(starts.size()) < std::max(opts.starts, 8)) {
    std::vector<double> x(n);
    for (double& v : x) v = 0.02 + 0.96 * rng.next_double();
    starts.push_back(std::move(x));
  }

  std::vector<double> best;
  double best_val = -1.0;
  for (const auto& start : starts) {
    auto [x, fx] = detail::nelder_mead_max(objective, start, opts.simplex_evals);
    std::tie(x, fx) = detail::gradient_polish(objective, x, fx, opts.gradient_steps);
    if (fx > best_val) {
      best_val = fx;
      best = x;
    }
  }
  if (best_val < 0.0)
    throw std::runtime_error("no start stayed in Omega: " +
                             objective.class_diagnostic(starts.front()));

  // The invariant-belief policy at the best analytic base parameter is a
  // known interior point; folding it in keeps the numeric bound at or above
  // the achievable rate even if every search start under-converges.
  if (has_tuple_nodes) {
    const InputPolicy exact = build_policy(g, lower_bound(d, eps).argmax);
    const SQChain chain = build_sq_chain(build_presentation(d), g, eps, exact);
    if (is_in_omega(chain) && is_aperiodic(chain)) {
      const double v = conditional_mutual_information(
          chain, stationary(chain, opts.max_dense_states));
      best_val = std::max(best_val, v);
    }
  }

  BoundResult r;
  r.value = best_val;
  r.argmax = std::numeric_limits<double>::quiet_NaN();
  r.lo = 0.0;
  r.hi = 1.0;
  r.kind = BoundKind::numeric_upper;
  return r;
}

}  // namespace rllbec
