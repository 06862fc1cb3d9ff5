#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rllbec/bcjr.hpp"
#include "rllbec/bounds.hpp"
#include "rllbec/qgraph.hpp"
#include "rllbec/simulate.hpp"
#include "rllbec/sweep.hpp"
#include "rllbec/verify.hpp"

namespace {

void print_bound(const char* name, const rllbec::BoundResult& r) {
  std::cout << name << ' ' << rllbec::format_g9(r.value) << " argmax "
            << rllbec::format_g9(r.argmax) << '\n';
}

int run_bounds(int d, double eps) {
  std::cout << "d " << d << " eps " << rllbec::format_g9(eps) << '\n';
  print_bound("lower", rllbec::lower_bound(d, eps));
  print_bound("upper_analytic", rllbec::upper_bound_analytic(d, eps));
  print_bound("noncausal", rllbec::noncausal_capacity(d, eps));
  return 0;
}

int run_curve(const rllbec::SweepConfig& cfg) {
  rllbec::validate(cfg);
  rllbec::write_curve_csv_file(cfg);
  std::cout << "wrote " << cfg.out << " ("
            << cfg.d_list.size() * static_cast<std::size_t>(cfg.eps_points)
            << " rows)\n";
  return 0;
}

int run_verify(const rllbec::VerifyOptions& opts, const std::string& dump_path) {
  if (!dump_path.empty()) {
    std::ofstream os(dump_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + dump_path + "'");
    os << "# de Bruijn family, d = " << opts.dmax << '\n';
    rllbec::build_debruijn_qgraph(opts.dmax).dump(os);
    os << "# chain family, d = " << opts.dmax << '\n';
    rllbec::build_chain_qgraph(opts.dmax).dump(os);
    std::cout << "graph listing written to " << dump_path << '\n';
  }
  bool all_pass = true;
  for (const rllbec::VerifyCheck& c : rllbec::run_verification(opts)) {
    std::cout << "check=" << c.name << " worst=" << rllbec::format_g9(c.worst)
              << " tol=" << rllbec::format_g9(c.tol)
              << " status=" << (c.pass ? "PASS" : "FAIL");
    if (!c.note.empty()) std::cout << " note=\"" << c.note << '"';
    std::cout << '\n';
    all_pass = all_pass && c.pass;
  }
  std::cout << (all_pass ? "PASS" : "FAIL") << '\n';
  return all_pass ? 0 : 3;
}

int run_threshold(bool have_d, int d, bool d2_equality) {
  if (d2_equality)
    std::cout << "d2_equality_threshold " << rllbec::format_g9(rllbec::d2_threshold())
              << '\n';
  if (have_d) {
    const auto star = rllbec::epsilon_star(d);
    if (star)
      std::cout << "epsilon_star " << rllbec::format_g9(*star) << '\n';
    else
      std::cout << "epsilon_star none (the analytic and non-causal bounds "
                   "coincide for every erasure probability)\n";
  }
  return 0;
}

int run_simulate(int d, double eps, double a, long long n, std::uint64_t seed,
                 long long burn_in, const std::string& out_path) {
  const rllbec::RllPresentation pres = rllbec::build_presentation(d);
  const rllbec::QGraph g = rllbec::build_debruijn_qgraph(d);
  const rllbec::InputPolicy policy = rllbec::build_policy(g, a);
  const rllbec::SimReport rep =
      rllbec::simulate(pres, g, policy, eps, n, seed, burn_in);
  std::cout << "n " << rep.n << '\n'
            << "seed " << rep.seed << '\n'
            << "empirical_I " << rllbec::format_g9(rep.empirical_i) << '\n';

  const rllbec::SQChain chain = rllbec::build_sq_chain(pres, g, eps, policy);
  if (rllbec::is_in_omega(chain) && rllbec::is_aperiodic(chain)) {
    const rllbec::StationaryDistribution st = rllbec::stationary(chain);
    std::cout << "analytic_I "
              << rllbec::format_g9(
                     rllbec::conditional_mutual_information(chain, st))
              << '\n'
              << "stationary_residual "
              << rllbec::format_g9(rllbec::empirical_stationary_residual(rep, st))
              << '\n';
  }
  if (!out_path.empty()) {
    std::ofstream os(out_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + out_path + "'");
    rllbec::write_sim_csv(os, rep, g);
    std::cout << "report written to " << out_path << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Rate bounds, invariant checks and simulation for the binary erasure "
      "channel with a (d,inf) run-length input constraint"};
  app.require_subcommand(1);

  int b_d = 1;
  double b_eps = 0.0;
  CLI::App* bounds = app.add_subcommand(
      "bounds", "Print the three rate bounds at one (d, eps) point");
  bounds->add_option("--d", b_d, "constraint order")
      ->required()
      ->check(CLI::PositiveNumber);
  bounds->add_option("--eps", b_eps, "erasure probability")
      ->required()
      ->check(CLI::Range(0.0, 1.0));

  rllbec::SweepConfig cfg;
  std::string config_path;
  CLI::App* curve =
      app.add_subcommand("curve", "Write a CSV sweep of the bounds over an "
                                  "erasure grid");
  curve->add_option("--config", config_path,
                    "key=value file (d_list, eps_start, eps_stop, eps_points, "
                    "numeric_upper, out, seed)");
  auto* opt_d = curve->add_option("--d", cfg.d_list, "constraint orders");
  auto* opt_start = curve->add_option("--eps-start", cfg.eps_start, "grid start");
  auto* opt_stop = curve->add_option("--eps-stop", cfg.eps_stop, "grid stop");
  auto* opt_points = curve->add_option("--eps-points", cfg.eps_points,
                                       "grid size (>= 2)");
  auto* opt_numeric = curve->add_flag(
      "--numeric-ub", "add the numerically optimized upper-bound column "
                      "(expensive)");
  auto* opt_out = curve->add_option("--out", cfg.out, "output CSV path");
  auto* opt_seed = curve->add_option("--seed", cfg.seed, "optimizer seed");

  rllbec::VerifyOptions vopts;
  std::string dump_path;
  CLI::App* verify = app.add_subcommand(
      "verify", "Run the invariant suite and report worst residuals");
  verify->add_option("--dmax", vopts.dmax, "largest constraint order checked")
      ->check(CLI::Range(1, rllbec::kMaxRunLength))
      ->capture_default_str();
  verify->add_option("--a-grid", vopts.a_points, "input-parameter grid size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  verify->add_option("--eps-grid", vopts.eps_points, "erasure grid size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  verify->add_option("--inject-fault", vopts.fault,
                     "deliberately break a check (theta)")
      ->check(CLI::IsMember({"theta"}));
  verify->add_option("--dump-graph", dump_path,
                     "write the Q-graph adjacency listings to this path");

  int t_d = 2;
  bool t_d2 = false;
  CLI::App* threshold =
      app.add_subcommand("threshold", "Print threshold erasure probabilities");
  CLI::Option* t_d_opt =
      threshold->add_option("--d", t_d, "order for the bound-separation "
                                        "threshold")
          ->check(CLI::PositiveNumber);
  threshold->add_flag("--d2-equality", t_d2,
                      "print the d=2 lower-bound/non-causal equality "
                      "threshold");

  int s_d = 2;
  double s_eps = 0.5, s_a = 0.25;
  long long s_n = 1000000, s_burn = 1000;
  std::uint64_t s_seed = 1;
  std::string s_out;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Monte Carlo run of the constrained-input erasure channel");
  simulate->add_option("--d", s_d, "constraint order")
      ->required()
      ->check(CLI::PositiveNumber);
  simulate->add_option("--eps", s_eps, "erasure probability")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--a", s_a, "base input parameter in [0, 1/(d+1)]")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--n", s_n, "recorded steps (>= 10000)")
      ->check(CLI::Range(static_cast<long long>(10000),
                         static_cast<long long>(1e12)))
      ->capture_default_str();
  simulate->add_option("--seed", s_seed, "PRNG seed")->capture_default_str();
  simulate->add_option("--burn-in", s_burn, "discarded leading steps")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  simulate->add_option("--out", s_out, "write per-(s,q) frequencies as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (bounds->parsed()) return run_bounds(b_d, b_eps);
    if (curve->parsed()) {
      rllbec::SweepConfig file_cfg =
          config_path.empty() ? rllbec::SweepConfig{}
                              : rllbec::load_sweep_config(config_path);
      // Explicit flags override the config file.
      if (!*opt_d) cfg.d_list = file_cfg.d_list;
      if (!*opt_start) cfg.eps_start = file_cfg.eps_start;
      if (!*opt_stop) cfg.eps_stop = file_cfg.eps_stop;
      if (!*opt_points) cfg.eps_points = file_cfg.eps_points;
      if (!*opt_numeric) cfg.numeric_upper = file_cfg.numeric_upper;
      if (!*opt_out) cfg.out = file_cfg.out;
      if (!*opt_seed) cfg.seed = file_cfg.seed;
      return run_curve(cfg);
    }
    if (verify->parsed()) return run_verify(vopts, dump_path);
    if (threshold->parsed()) {
      if (!*t_d_opt && !t_d2) {
        std::cerr << "threshold: pass --d N and/or --d2-equality\n";
        return 2;
      }
      return run_threshold(static_cast<bool>(*t_d_opt), t_d, t_d2);
    }
    if (simulate->parsed())
      return run_simulate(s_d, s_eps, s_a, s_n, s_seed, s_burn, s_out);
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
