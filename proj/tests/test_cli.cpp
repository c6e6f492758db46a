// Exercises the installed command-line entry points end to end through
// std::system, checking exit codes and emitted files.

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

std::string binary() {
  const char* b = std::getenv("CORNERFLOW_BIN");
  REQUIRE(b != nullptr);
  return b;
}

int run(const std::string& args) {
  int rc = std::system((binary() + " " + args + " > /dev/null 2>&1").c_str());
  return WEXITSTATUS(rc);
}

std::string capture(const std::string& args) {
  std::string tmp = (fs::temp_directory_path() / "cornerflow_cli_out.txt").string();
  std::system((binary() + " " + args + " > " + tmp + " 2>&1").c_str());
  std::ifstream f(tmp);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const std::string& body) {
  fs::path dir = fs::temp_directory_path() / "cornerflow_cli";
  fs::create_directories(dir);
  fs::path p = dir / name;
  std::ofstream(p) << body;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("geodesic command writes the trajectory files") {
  fs::path out = fs::temp_directory_path() / "cornerflow_cli" / "geo";
  fs::remove_all(out);
  fs::path cfg = write_config("geo.cfg",
                              "[metric]\nfamily = hyperbolic\n"
                              "[boundary]\ntype = constant\ntheta0 = 1.5707963267948966\n"
                              "[geodesic]\nx = [0.0]\nrho = 1.0\n"
                              "[integrate]\ntol = 1e-10\nt_end = 10\n");
  CHECK(run("geodesic --config " + cfg.string() + " --out " + out.string() +
            " --quiet") == 0);
  REQUIRE(fs::exists(out / "trajectory.csv"));
  REQUIRE(fs::exists(out / "trajectory.bin"));
  std::string csv = slurp(out / "trajectory.csv");
  CHECK(csv.rfind("t,tau,theta,x1,rho,xibar0,xibar1,xibar2,norm_drift\n", 0) == 0);
  // rho column stays at 1 for the model circle
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    std::stringstream ss(line);
    std::string cell;
    for (int i = 0; i < 5; ++i) std::getline(ss, cell, ',');
    CHECK(std::abs(std::strtod(cell.c_str(), nullptr) - 1.0) < 1e-8);
  }
  CHECK(rows > 10);

  // idempotence: byte-identical on re-run
  std::string first = csv;
  CHECK(run("geodesic --config " + cfg.string() + " --out " + out.string() +
            " --quiet") == 0);
  CHECK(slurp(out / "trajectory.csv") == first);
}

TEST_CASE("geodesic with t_end = 0 emits only the initial sample") {
  fs::path out = fs::temp_directory_path() / "cornerflow_cli" / "geo0";
  fs::path cfg = write_config("geo0.cfg",
                              "[geodesic]\nx = [0.0]\nrho = 1.0\n");
  CHECK(run("geodesic --config " + cfg.string() + " --out " + out.string() +
            " --t-end 0 --quiet") == 0);
  std::string csv = slurp(out / "trajectory.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);  // header + one row
}

TEST_CASE("malformed configs exit with code 2") {
  fs::path bad = write_config("bad.cfg", "[metric\nfamily = hyperbolic\n");
  CHECK(run("geodesic --config " + bad.string()) == 2);
  fs::path bad2 = write_config("bad2.cfg", "[integrate]\ntol = 1.0\n");
  CHECK(run("verify --config " + bad2.string()) == 2);
  fs::path bad3 = write_config("bad3.cfg", "[run]\nsuites = [no-such-suite]\n");
  CHECK(run("verify --config " + bad3.string()) == 2);
}

TEST_CASE("forcing the theta-form on a non-constant corner angle exits with 2") {
  fs::path wob = write_config("wobble.cfg",
                              "[metric]\nfamily = hyperbolic\n"
                              "[boundary]\ntype = graph\ntheta0 = 1.3\n"
                              "x_coef = 0.1\n"
                              "[windows]\nn_param = 4\nn_x = 2\nn_rho = 4\n"
                              "rho_max = 0.2\n");
  fs::path out = fs::temp_directory_path() / "cornerflow_cli" / "nf";
  CHECK(run("normal-form --config " + wob.string() + " --out " + out.string() +
            " --form theta --quiet") == 2);
  // a rho-tilt keeps the corner angle constant; forcing theta is then fine
  fs::path tilt = write_config("tilt.cfg",
                               "[metric]\nfamily = hyperbolic\n"
                               "[boundary]\ntype = tilted\ntheta0 = 1.3\n"
                               "rho_coef = 0.15\nrho_x_coef = 0.1\n"
                               "[windows]\nn_param = 4\nn_x = 2\nn_rho = 4\n"
                               "rho_max = 0.2\n");
  CHECK(run("normal-form --config " + tilt.string() + " --out " + out.string() +
            " --form theta --quiet") == 0);
}

TEST_CASE("list-suites prints the suite registry") {
  std::string text = capture("list-suites");
  CHECK(text.find("metric-invariants") != std::string::npos);
  CHECK(text.find("flow-oracle") != std::string::npos);
  CHECK(text.find("normal-form") != std::string::npos);
  CHECK(capture("verify --list") == text);
}

TEST_CASE("verify: pass, forced failure, and report artifacts") {
  fs::path out = fs::temp_directory_path() / "cornerflow_cli" / "verify";
  fs::remove_all(out);
  fs::path cfg = write_config("verify.cfg",
                              "[run]\nsuites = [metric-invariants]\nseed = 0\n");
  CHECK(run("verify --config " + cfg.string() + " --out " + out.string() +
            " --quiet") == 0);
  REQUIRE(fs::exists(out / "report.json"));
  REQUIRE(fs::exists(out / "metric-invariants.csv"));
  std::string report = slurp(out / "report.json");
  CHECK(report.find("\"report_version\": 1") != std::string::npos);
  CHECK(report.find("\"pass\": true") != std::string::npos);

  // byte-identical reports across runs with the same config and seed
  CHECK(run("verify --config " + cfg.string() + " --out " + out.string() +
            " --quiet") == 0);
  CHECK(slurp(out / "report.json") == report);

  // deliberately broken tolerance: every finite measured value now fails
  fs::path broken = write_config("broken.cfg",
                                 "[run]\nsuites = [metric-invariants]\n"
                                 "max_measured = 1e-300\n");
  std::string text = capture("verify --config " + broken.string() + " --out " +
                             (out / "broken").string());
  CHECK(run("verify --config " + broken.string() + " --out " +
            (out / "broken2").string() + " --quiet") == 1);
  CHECK(text.find("FAIL") != std::string::npos);
  CHECK(text.find("inverse-consistency") != std::string::npos);
}

TEST_CASE("expmap-scan writes its report") {
  fs::path out = fs::temp_directory_path() / "cornerflow_cli" / "scan";
  fs::path cfg = write_config("scan.cfg",
                              "[windows]\nrho_min = 0.3\nrho_max = 1.0\n");
  CHECK(run("expmap-scan --config " + cfg.string() + " --out " + out.string() +
            " --quiet") == 0);
  std::string rep = slurp(out / "expmap_scan.json");
  CHECK(rep.find("\"min_image_distance\"") != std::string::npos);
  CHECK(rep.find("\"pass\": true") != std::string::npos);
}

TEST_CASE("normal-form round trip through the CLI files") {
  fs::path out = fs::temp_directory_path() / "cornerflow_cli" / "nf2";
  fs::remove_all(out);
  fs::path cfg = write_config("nf2.cfg",
                              "[metric]\nfamily = hyperbolic\n"
                              "[boundary]\ntype = constant\ntheta0 = 1.5707963267948966\n"
                              "[windows]\nn_param = 5\nn_x = 2\nn_rho = 4\n");
  CHECK(run("normal-form --config " + cfg.string() + " --out " + out.string() +
            " --quiet") == 0);
  REQUIRE(fs::exists(out / "normal_form_theta.nfg"));
  std::string first = slurp(out / "normal_form_theta.nfg");
  CHECK(first.find("\"form\":\"theta\"") != std::string::npos);
  CHECK(run("normal-form --config " + cfg.string() + " --out " + out.string() +
            " --quiet") == 0);
  CHECK(slurp(out / "normal_form_theta.nfg") == first);
}
