// End-to-end checks of the command-line driver: exit-code contract,
// emitted files, and byte-for-byte determinism of repeated runs.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

std::string g_bin;
int g_failures = 0;

#define CLI_CHECK(cond)                                                      \
  do {                                                                       \
    if (!(cond)) {                                                           \
      std::cerr << "FAILED at " << __LINE__ << ": " #cond "\n";              \
      ++g_failures;                                                          \
    }                                                                        \
  } while (0)

int run(const std::string& args) {
  const std::string cmd = g_bin + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

}  // namespace

int main(int, char** argv) {
  g_bin = (fs::path(argv[0]).parent_path().parent_path() / "proxgal").string();
  if (!fs::exists(g_bin)) {
    std::cerr << "driver binary not found at " << g_bin << "\n";
    return 1;
  }
  const fs::path tmp = fs::temp_directory_path() / "proxgal_cli_test";
  fs::remove_all(tmp);
  fs::create_directories(tmp);

  // trivial solve: converges, emits trajectory/solution/summary, exit 0
  const fs::path trivial = tmp / "trivial.json";
  write(trivial, R"({
    "problem": {"kind": "obstacle", "data": {"preset": "trivial"}},
    "discretization": {"mesh": "interval", "levels": [8]},
    "outputs": {"directory": ")" + (tmp / "out1").string() + R"("}
  })");
  CLI_CHECK(run("solve --config " + trivial.string()) == 0);
  CLI_CHECK(fs::exists(tmp / "out1" / "trajectory.csv"));
  CLI_CHECK(fs::exists(tmp / "out1" / "u.csv"));
  CLI_CHECK(fs::exists(tmp / "out1" / "psi.csv"));
  CLI_CHECK(fs::exists(tmp / "out1" / "lambda.csv"));
  CLI_CHECK(fs::exists(tmp / "out1" / "summary.json"));
  CLI_CHECK(slurp(tmp / "out1" / "summary.json").find("\"converged\": true") !=
            std::string::npos);

  // determinism: identical config gives byte-identical bodies
  const std::string first = slurp(tmp / "out1" / "trajectory.csv");
  CLI_CHECK(run("solve --config " + trivial.string()) == 0);
  CLI_CHECK(first == slurp(tmp / "out1" / "trajectory.csv"));

  // malformed config: exit 2 naming the offending key
  const fs::path bad = tmp / "bad.json";
  write(bad, R"({"problem": {"kind": "obstacle", "frobnicate": 1}})");
  CLI_CHECK(run("solve --config " + bad.string()) == 2);
  CLI_CHECK(run("solve --config " + (tmp / "missing.json").string()) == 2);
  CLI_CHECK(run("study --config " + trivial.string()) == 2);  // trivial preset has no reference

  // solver failure: exit 3 with partial logs kept
  const fs::path starved = tmp / "starved.json";
  write(starved, R"({
    "problem": {"kind": "obstacle", "data": {"preset": "analytic1d"}},
    "discretization": {"mesh": "interval", "levels": [16]},
    "solver": {"newton": {"max_iters": 1}},
    "outputs": {"directory": ")" + (tmp / "out_fail").string() + R"("}
  })");
  CLI_CHECK(run("solve --config " + starved.string()) == 3);
  CLI_CHECK(fs::exists(tmp / "out_fail" / "trajectory.csv"));
  CLI_CHECK(slurp(tmp / "out_fail" / "summary.json").find("\"converged\": false") !=
            std::string::npos);

  // a benchmark solve keeps the decay inequality clean
  const fs::path bench = tmp / "bench.json";
  write(bench, R"({
    "problem": {"kind": "obstacle", "data": {"preset": "analytic1d", "f0": -2.0, "phi0": -0.125}},
    "discretization": {"mesh": "interval", "levels": [32]},
    "outputs": {"directory": ")" + (tmp / "out_bench").string() + R"("}
  })");
  CLI_CHECK(run("solve --config " + bench.string()) == 0);
  CLI_CHECK(slurp(tmp / "out_bench" / "summary.json").find("\"dissipation_violations\": 0") !=
            std::string::npos);

  // a small study with reference: report + plot data + decay series
  const fs::path study = tmp / "study.json";
  write(study, R"({
    "problem": {"kind": "obstacle", "data": {"preset": "analytic1d", "f0": -2.0, "phi0": -0.125}},
    "discretization": {"mesh": "interval", "levels": [16, 32]},
    "outputs": {"directory": ")" + (tmp / "out2").string() + R"("}
  })");
  CLI_CHECK(run("study --config " + study.string()) == 0);
  CLI_CHECK(fs::exists(tmp / "out2" / "report.csv"));
  CLI_CHECK(fs::exists(tmp / "out2" / "plot_h1.csv"));
  CLI_CHECK(fs::exists(tmp / "out2" / "decay.csv"));
  CLI_CHECK(fs::exists(tmp / "out2" / "summary.json"));
  CLI_CHECK(slurp(tmp / "out2" / "report.csv").find("eoc_h1") != std::string::npos);

  // mesh info runs on the study config
  CLI_CHECK(run("mesh-info --config " + study.string()) == 0);

  // the level-range flag replaces the configured levels by powers of two
  CLI_CHECK(run("study --config " + study.string() + " --levels 3..4 --out " +
                (tmp / "out_lv").string()) == 0);
  const std::string lv = slurp(tmp / "out_lv" / "report.csv");
  CLI_CHECK(lv.find("\n8,") != std::string::npos);
  CLI_CHECK(lv.find("\n16,") != std::string::npos);

  // operator/entropy verification emits its tables and passes
  CLI_CHECK(run("verify-operators --seed 7 --out " + (tmp / "out3").string()) == 0);
  CLI_CHECK(fs::exists(tmp / "out3" / "verification.csv"));
  CLI_CHECK(fs::exists(tmp / "out3" / "operators.csv"));
  CLI_CHECK(fs::exists(tmp / "out3" / "summary.json"));
  CLI_CHECK(run("verify --seed 7 --out " + (tmp / "out3").string()) == 0);  // alias

  // worker parallelism must not change the emitted bytes
  const std::string serial_report = slurp(tmp / "out2" / "report.csv");
  const int status = std::system(("PROXGAL_THREADS=2 " + g_bin + " study --config " +
                                  study.string() + " >/dev/null 2>&1")
                                     .c_str());
  CLI_CHECK(WIFEXITED(status) && WEXITSTATUS(status) == 0);
  CLI_CHECK(serial_report == slurp(tmp / "out2" / "report.csv"));

  if (g_failures == 0) std::cout << "cli checks passed\n";
  return g_failures == 0 ? 0 : 1;
}
