#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <future>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rllbec/bounds.hpp"
#include "rllbec/qgraph.hpp"

namespace rllbec {

/// Curve sweep over constraint orders and an erasure grid.
struct SweepConfig {
  std::vector<int> d_list{1, 2, 3, 4};
  double eps_start = 0.0;
  double eps_stop = 1.0;
  int eps_points = 101;
  bool numeric_upper = false;  // de Bruijn numeric column (expensive)
  std::string out = "curve.csv";
  std::uint64_t seed = 0x5eedULL;
};

inline void validate(const SweepConfig& cfg) {
  if (cfg.d_list.empty())
    throw std::invalid_argument("d_list must not be empty");
  for (int d : cfg.d_list) build_presentation(d);
  if (!(0.0 <= cfg.eps_start && cfg.eps_start < cfg.eps_stop &&
        cfg.eps_stop <= 1.0))
    throw std::invalid_argument("erasure grid must satisfy 0 <= start < stop <= 1");
  if (cfg.eps_points < 2)
    throw std::invalid_argument("erasure grid needs at least 2 points");
  if (cfg.out.empty()) throw std::invalid_argument("output path must not be empty");
}

inline double sweep_epsilon(const SweepConfig& cfg, int i) {
  return cfg.eps_start +
         (cfg.eps_stop - cfg.eps_start) * i / (cfg.eps_points - 1);
}

/// Fixed 9-significant-digit formatting ('.' decimal separator, no locale),
/// so CSV output is byte-stable across runs and platforms.
inline std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

template <typename T, typename F>
T parse_number(const std::string& v, F&& conv) {
  std::size_t used = 0;
  const T out = conv(v, &used);
  if (used != v.size())
    throw std::invalid_argument("trailing characters in number '" + v + "'");
  return out;
}

}  // namespace detail

/// Flat key=value configuration: d_list (comma-separated), eps_start,
/// eps_stop, eps_points, numeric_upper, out, seed. '#' starts a comment.
inline SweepConfig parse_sweep_config(std::istream& in) {
  SweepConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    try {
      if (key == "d_list") {
        cfg.d_list.clear();
        std::stringstream ss(val);
        std::string item;
        while (std::getline(ss, item, ','))
          cfg.d_list.push_back(detail::parse_number<int>(
              detail::trim(item),
              [](const std::string& s, std::size_t* u) { return std::stoi(s, u); }));
      } else if (key == "eps_start") {
        cfg.eps_start = detail::parse_number<double>(
            val, [](const std::string& s, std::size_t* u) { return std::stod(s, u); });
      } else if (key == "eps_stop") {
        cfg.eps_stop = detail::parse_number<double>(
            val, [](const std::string& s, std::size_t* u) { return std::stod(s, u); });
      } else if (key == "eps_points") {
        cfg.eps_points = detail::parse_number<int>(
            val, [](const std::string& s, std::size_t* u) { return std::stoi(s, u); });
      } else if (key == "numeric_upper") {
        cfg.numeric_upper = detail::parse_bool(val);
      } else if (key == "out") {
        cfg.out = val;
      } else if (key == "seed") {
        cfg.seed = detail::parse_number<std::uint64_t>(
            val, [](const std::string& s, std::size_t* u) {
              return static_cast<std::uint64_t>(std::stoull(s, u));
            });
      } else {
        throw std::invalid_argument("unknown config key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": " +
                                  e.what());
    }
  }
  return cfg;
}

inline SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
  return parse_sweep_config(in);
}

namespace detail {

inline std::string curve_row(const SweepConfig& cfg, int d, double eps) {
  std::string row = std::to_string(d) + ',' + format_g9(eps) + ',' +
                    format_g9(lower_bound(d, eps).value) + ',' +
                    format_g9(upper_bound_analytic(d, eps).value) + ',' +
                    format_g9(noncausal_capacity(d, eps).value);
  if (cfg.numeric_upper) {
    // The endpoint capacities are exact (noiseless / zero), so only the
    // interior of the grid pays for the numeric search.
    double value;
    if (eps <= 0.0 || eps >= 1.0) {
      value = upper_bound_analytic(d, eps).value;
    } else {
      NumericUbOptions opts;
      opts.seed = cfg.seed;
      value = numeric_upper_bound(build_debruijn_qgraph(d), d, eps, opts).value;
    }
    row += ',' + format_g9(value);
  }
  return row + '\n';
}

}  // namespace detail

/// Writes the sweep as CSV: header then one row per (d, eps) in d_list x
/// grid order. Rows are computed in parallel; output order is fixed.
inline void write_curve_csv(std::ostream& os, const SweepConfig& cfg) {
  validate(cfg);
  os << "d,epsilon,lower,upper_analytic,noncausal"
     << (cfg.numeric_upper ? ",numeric_upper" : "") << '\n';
  std::vector<std::pair<int, double>> grid;
  for (int d : cfg.d_list)
    for (int i = 0; i < cfg.eps_points; ++i)
      grid.emplace_back(d, sweep_epsilon(cfg, i));

  std::vector<std::string> rows(grid.size());
  const unsigned workers =
      std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                         static_cast<unsigned>(grid.size()));
  std::vector<std::future<void>> tasks;
  for (unsigned w = 0; w < workers; ++w)
    tasks.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < grid.size(); i += workers)
        rows[i] = detail::curve_row(cfg, grid[i].first, grid[i].second);
    }));
  for (auto& t : tasks) t.get();
  for (const std::string& row : rows) os << row;
}

inline void write_curve_csv_file(const SweepConfig& cfg) {
  validate(cfg);
  std::ofstream os(cfg.out, std::ios::binary);  // binary: LF endings everywhere
  if (!os) throw std::runtime_error("cannot open output file '" + cfg.out + "'");
  write_curve_csv(os, cfg);
  os.flush();
  if (!os) throw std::runtime_error("write failed for '" + cfg.out + "'");
}

}  // namespace rllbec
