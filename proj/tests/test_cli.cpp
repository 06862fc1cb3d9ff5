#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string output;  // stdout + stderr
};

const fs::path& work_dir() {
  static const fs::path dir = [] {
    const fs::path p = fs::temp_directory_path() / "rllbec_cli_tests";
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path log = work_dir() / ("out_" + std::to_string(counter++) + ".txt");
  const std::string cmd =
      std::string("\"") + RLLBEC_CLI_PATH + "\" " + args + " > \"" +
      log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::ostringstream os;
  os << in.rdbuf();
  r.output = os.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

// value printed after a "name " token on its own line
double value_after(const std::string& text, const std::string& token) {
  const auto pos = text.find(token + " ");
  REQUIRE(pos != std::string::npos);
  return std::stod(text.substr(pos + token.size() + 1));
}

}  // namespace

TEST_CASE("bounds prints the three rates with their maximizers", "[cli]") {
  const RunResult r = run_cli("bounds --d 2 --eps 0.5");
  REQUIRE(r.code == 0);
  REQUIRE(contains(r.output, "d 2 eps 0.5"));
  REQUIRE_THAT(value_after(r.output, "lower"),
               Catch::Matchers::WithinAbs(0.34436093777043357, 1e-8));
  REQUIRE_THAT(value_after(r.output, "upper_analytic"),
               Catch::Matchers::WithinAbs(0.34712095681530865, 1e-8));
  REQUIRE_THAT(value_after(r.output, "noncausal"),
               Catch::Matchers::WithinAbs(0.34712095681530865, 1e-8));
  REQUIRE(contains(r.output, "argmax 0.333333333"));
}

TEST_CASE("bounds handles the endpoints", "[cli]") {
  const RunResult zero = run_cli("bounds --d 2 --eps 0");
  REQUIRE(zero.code == 0);
  REQUIRE_THAT(value_after(zero.output, "noncausal"),
               Catch::Matchers::WithinAbs(0.55146308974559555, 1e-8));

  const RunResult one = run_cli("bounds --d 1 --eps 1");
  REQUIRE(one.code == 0);
  REQUIRE(contains(one.output, "lower 0 argmax 0"));
}

TEST_CASE("usage errors exit with 2", "[cli]") {
  REQUIRE(run_cli("").code == 2);                       // missing subcommand
  REQUIRE(run_cli("frobnicate").code == 2);             // unknown subcommand
  REQUIRE(run_cli("bounds --d 2").code == 2);           // missing --eps
  REQUIRE(run_cli("bounds --d 0 --eps 0.5").code == 2); // invalid d
  REQUIRE(run_cli("bounds --d 2 --eps 1.5").code == 2); // eps out of range
  REQUIRE(run_cli("simulate --d 2 --eps 0.5 --a 0.25 --n 100").code == 2);
  REQUIRE(run_cli("verify --inject-fault bogus").code == 2);
  REQUIRE(run_cli("threshold").code == 2);              // nothing requested
  REQUIRE(run_cli("--help").code == 0);
  REQUIRE(run_cli("bounds --help").code == 0);
}

TEST_CASE("curve writes the requested sweep", "[cli]") {
  const fs::path csv = work_dir() / "curve_small.csv";
  const RunResult r = run_cli("curve --d 1 --d 2 --eps-points 5 --out \"" +
                              csv.string() + "\"");
  REQUIRE(r.code == 0);
  REQUIRE(contains(r.output, "wrote"));
  REQUIRE(contains(r.output, "(10 rows)"));

  const std::string text = slurp(csv);
  REQUIRE(contains(text, "d,epsilon,lower,upper_analytic,noncausal"));
  REQUIRE(std::count(text.begin(), text.end(), '\n') == 11);
  REQUIRE(text.find('\r') == std::string::npos);

  // byte-for-byte stable on a second run
  const fs::path csv2 = work_dir() / "curve_small_2.csv";
  run_cli("curve --d 1 --d 2 --eps-points 5 --out \"" + csv2.string() + "\"");
  REQUIRE(slurp(csv2) == text);
}

TEST_CASE("curve honors a config file with flag overrides", "[cli]") {
  const fs::path conf = work_dir() / "sweep.conf";
  const fs::path out_a = work_dir() / "conf_a.csv";
  {
    std::ofstream os(conf);
    os << "d_list = 2\n"
       << "eps_points = 3\n"
       << "out = " << out_a.string() << "\n";
  }
  const RunResult a = run_cli("curve --config \"" + conf.string() + "\"");
  REQUIRE(a.code == 0);
  const std::string text_a = slurp(out_a);
  REQUIRE(std::count(text_a.begin(), text_a.end(), '\n') == 4);

  // --eps-points wins over the file; --out redirects
  const fs::path out_b = work_dir() / "conf_b.csv";
  const RunResult b = run_cli("curve --config \"" + conf.string() +
                              "\" --eps-points 4 --out \"" + out_b.string() + "\"");
  REQUIRE(b.code == 0);
  const std::string text = slurp(out_b);
  REQUIRE(std::count(text.begin(), text.end(), '\n') == 5);
  REQUIRE(contains(text, "2,0.333333333,"));  // 4-point grid hits 1/3

  const RunResult bad = run_cli("curve --config \"" +
                                (work_dir() / "missing.conf").string() + "\"");
  REQUIRE(bad.code == 1);
}

TEST_CASE("curve reports unwritable output paths", "[cli]") {
  const RunResult r = run_cli("curve --d 1 --eps-points 2 --out /nonexistent_dir_rllbec/x.csv");
  REQUIRE(r.code == 1);
  REQUIRE(contains(r.output, "error:"));
}

TEST_CASE("verify passes on the default grid", "[cli]") {
  const RunResult r = run_cli("verify --dmax 2 --a-grid 4 --eps-grid 3");
  REQUIRE(r.code == 0);
  for (const char* name :
       {"policy_validity", "belief_update_consistency", "bcjr_invariance",
        "stationary_identification", "rate_formula_agreement",
        "chain_family_stationary", "chain_unit_beliefs",
        "output_one_probability"})
    REQUIRE(contains(r.output, std::string("check=") + name));
  REQUIRE(contains(r.output, "status=PASS"));
  REQUIRE_FALSE(contains(r.output, "status=FAIL"));
  REQUIRE(r.output.substr(r.output.size() - 5) == "PASS\n");
}

TEST_CASE("verify smallest case passes", "[cli]") {
  const RunResult r = run_cli("verify --dmax 1 --a-grid 3 --eps-grid 3");
  REQUIRE(r.code == 0);
}

TEST_CASE("injected fault trips the invariance check", "[cli]") {
  const RunResult r =
      run_cli("verify --dmax 2 --a-grid 4 --eps-grid 3 --inject-fault theta");
  REQUIRE(r.code == 3);
  REQUIRE(contains(r.output, "check=bcjr_invariance"));
  REQUIRE(contains(r.output, "status=FAIL"));
  REQUIRE(contains(r.output, "fault 'theta' injected"));
  REQUIRE(r.output.substr(r.output.size() - 5) == "FAIL\n");
}

TEST_CASE("verify dumps both graph families", "[cli]") {
  const fs::path dump = work_dir() / "graphs.txt";
  const RunResult r =
      run_cli("verify --dmax 2 --a-grid 2 --eps-grid 2 --dump-graph \"" +
              dump.string() + "\"");
  REQUIRE(r.code == 0);
  const std::string text = slurp(dump);
  REQUIRE(contains(text, "# de Bruijn family, d = 2"));
  REQUIRE(contains(text, "# chain family, d = 2"));
  REQUIRE(contains(text, "(0,?) ? (?,0)"));
  REQUIRE(contains(text, "Q1 0 (0,0)"));
  REQUIRE(contains(text, "Q2 0 Q2"));
}

TEST_CASE("threshold prints the separation points", "[cli]") {
  const RunResult d2 = run_cli("threshold --d 2");
  REQUIRE(d2.code == 0);
  REQUIRE(contains(d2.output, "epsilon_star 0.695453438"));

  const RunResult d3 = run_cli("threshold --d 3");
  REQUIRE(contains(d3.output, "epsilon_star 0.584729435"));

  const RunResult d1 = run_cli("threshold --d 1");
  REQUIRE(d1.code == 0);
  REQUIRE(contains(d1.output, "epsilon_star none"));

  const RunResult eq = run_cli("threshold --d2-equality");
  REQUIRE(eq.code == 0);
  REQUIRE(contains(eq.output, "d2_equality_threshold 0.145244354"));

  const RunResult both = run_cli("threshold --d 2 --d2-equality");
  REQUIRE(contains(both.output, "epsilon_star"));
  REQUIRE(contains(both.output, "d2_equality_threshold"));
}

TEST_CASE("simulate reports empirical and analytic information", "[cli]") {
  const RunResult r =
      run_cli("simulate --d 2 --eps 0.5 --a 0.25 --n 1000000 --seed 7");
  REQUIRE(r.code == 0);
  REQUIRE(contains(r.output, "n 1000000"));
  REQUIRE(contains(r.output, "seed 7"));
  REQUIRE_THAT(value_after(r.output, "empirical_I"),
               Catch::Matchers::WithinAbs(0.32451124978365315, 0.01));
  REQUIRE_THAT(value_after(r.output, "analytic_I"),
               Catch::Matchers::WithinAbs(0.32451124978365315, 1e-8));
  REQUIRE(value_after(r.output, "stationary_residual") < 5e-3);
}

TEST_CASE("simulate writes the frequency table", "[cli]") {
  const fs::path csv = work_dir() / "sim.csv";
  const RunResult r = run_cli(
      "simulate --d 1 --eps 0.25 --a 0.3 --n 10000 --seed 5 --out \"" +
      csv.string() + "\"");
  REQUIRE(r.code == 0);
  const std::string text = slurp(csv);
  REQUIRE(contains(text, "s,q,frequency"));
  // (d+1) * (2^d + d) rows plus the header
  REQUIRE(std::count(text.begin(), text.end(), '\n') == 1 + 2 * 3);
}

TEST_CASE("simulate rejects an out-of-domain input parameter", "[cli]") {
  const RunResult r = run_cli("simulate --d 2 --eps 0.5 --a 0.4 --n 10000");
  REQUIRE(r.code == 2);
  REQUIRE(contains(r.output, "error:"));
}
