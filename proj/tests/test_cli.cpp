#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "aqrm/io.hpp"
#include "aqrm/types.hpp"

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  static int counter = 0;
  const std::string capture = "/tmp/aqrm_cli_out_" + std::to_string(counter++) + ".txt";
  const std::string cmd =
      env_prefix + std::string(AQRM_CLI_PATH) + " " + args + " > " + capture + " 2>&1";
  const int raw = std::system(cmd.c_str());
  RunResult res;
  if (raw >= 0 && WIFEXITED(raw)) res.exit_code = WEXITSTATUS(raw);
  res.output = slurp(capture);
  std::remove(capture.c_str());
  return res;
}

size_t count_lines(const std::string& text) {
  size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("quantify prints a versioned csv row", "[cli]") {
  const RunResult res = run_cli("quantify --lambda1 0.5 --lambda2 0.25 --temp 0.1");
  REQUIRE(res.exit_code == 0);
  CHECK(res.output.rfind("# aqrm-quantify-csv-v1\n", 0) == 0);
  CHECK(res.output.find("lambda1,lambda2,T,") != std::string::npos);
  REQUIRE(count_lines(res.output) == 3);

  // Last line is the data row: 11 comma-separated cells, none of them nan.
  const size_t last_nl = res.output.rfind('\n', res.output.size() - 2);
  const std::string row = res.output.substr(last_nl + 1);
  CHECK(std::count(row.begin(), row.end(), ',') == 10);
  CHECK(row.find("nan") == std::string::npos);
  CHECK(row.rfind("0.5,0.25,", 0) == 0);
}

TEST_CASE("quantify emits json with convergence metadata", "[cli]") {
  const RunResult res = run_cli("quantify --lambda1 0.5 --lambda2 0.25 --temp 0.1 --format json");
  REQUIRE(res.exit_code == 0);
  const auto j = nlohmann::json::parse(res.output);
  CHECK(j.at("lambda1").get<double>() == 0.5);
  CHECK(j.at("g2_dressed").is_number());
  CHECK(j.at("g2_bare").is_number());
  CHECK(j.at("zeta2").is_number());
  CHECK(j.at("macroscopicity").is_number());
  CHECK(j.at("negativity").get<double>() > 0.0);
  CHECK(j.at("discord").get<double>() > 0.0);
  CHECK(j.at("convergence").at("fock_cutoff").get<int>() >= 2);
  CHECK(j.at("convergence").at("discord_evaluations").get<int>() > 0);
  CHECK(j.at("flags").empty());
}

TEST_CASE("undefined quantifiers come back as missing with flags and exit 0", "[cli]") {
  const RunResult res = run_cli("quantify --lambda1 0 --lambda2 0 --temp 0.02");
  REQUIRE(res.exit_code == 0);
  CHECK(res.output.find("g2_bare_undefined") != std::string::npos);
  CHECK(res.output.find("g2_dressed_undefined") != std::string::npos);
  CHECK(res.output.find("nan") != std::string::npos);
}

TEST_CASE("quantify dumps the thermal state as density json", "[cli]") {
  const std::string path = "/tmp/aqrm_state_dump.json";
  std::remove(path.c_str());
  const RunResult res = run_cli("quantify --lambda1 0.3 --lambda2 0.1 --temp 0.2 --cutoff 10 "
                                "--dump-state " + path);
  REQUIRE(res.exit_code == 0);
  const aqrm::Operator rho = aqrm::io::read_density_json(path);
  CHECK(rho.rows() == 20);
  CHECK(std::abs(rho.trace().real() - 1.0) <= 1e-12);
  CHECK(aqrm::max_abs(aqrm::Operator(rho - rho.adjoint())) <= 1e-14);
  std::remove(path.c_str());
}

TEST_CASE("spectrum with one level prints the zero column", "[cli]") {
  const RunResult res = run_cli("spectrum --ratio 0.5 --grid-start 0 --grid-stop 1 "
                                "--grid-points 3 --levels 1");
  REQUIRE(res.exit_code == 0);
  CHECK(res.output.rfind("# aqrm-spectrum-csv-v1\n", 0) == 0);
  CHECK(res.output.find("lambda,E0,parity0\n") != std::string::npos);
  CHECK(res.output.find("0.5,0,") != std::string::npos);
  CHECK(res.output.find("1,0,") != std::string::npos);
}

TEST_CASE("empty spectrum grid is a usage error", "[cli]") {
  const RunResult res = run_cli("spectrum --grid-points 0");
  CHECK(res.exit_code == 1);
  CHECK(res.output.find("points must be >= 1") != std::string::npos);
}

TEST_CASE("invalid flags exit with usage errors", "[cli]") {
  CHECK(run_cli("walkabout").exit_code == 1);
  CHECK(run_cli("quantify --cutoff zero").exit_code == 1);
  CHECK(run_cli("quantify --cutoff 1").exit_code == 1);
  CHECK(run_cli("quantify --temp -0.5").exit_code == 1);
  CHECK(run_cli("sweep --ratio 1.5").exit_code == 1);
  CHECK(run_cli("").exit_code == 1);
}

TEST_CASE("sweep from flags writes csv and a provenance sidecar", "[cli]") {
  const std::string out = "/tmp/aqrm_sweep_flags.csv";
  std::remove(out.c_str());
  std::remove((out + ".provenance.json").c_str());
  const RunResult res = run_cli("sweep --ratio 0 --grid-start 0 --grid-stop 0.4 "
                                "--grid-points 3 --temp 0.2 --out " + out);
  REQUIRE(res.exit_code == 0);
  const std::string body = slurp(out);
  CHECK(body.rfind("# aqrm-quantify-csv-v1\n", 0) == 0);
  CHECK(count_lines(body) == 5);

  const auto prov = nlohmann::json::parse(slurp(out + ".provenance.json"));
  CHECK(prov.at("rows_total").get<int>() == 3);
  CHECK(prov.at("rows_failed").get<int>() == 0);
  CHECK(prov.at("spec_hash").get<std::string>().size() == 16);
  std::remove(out.c_str());
  std::remove((out + ".provenance.json").c_str());
}

TEST_CASE("sweep bodies are identical across reruns and worker counts", "[cli]") {
  const std::string args = "sweep --ratio 0.5 --grid-start 0 --grid-stop 1 --grid-points 4 "
                           "--temp 0.1";
  const RunResult a = run_cli(args);
  const RunResult b = run_cli(args);
  const RunResult c = run_cli(args + " --workers 3");
  REQUIRE(a.exit_code == 0);
  CHECK(a.output == b.output);
  CHECK(a.output == c.output);

  const RunResult env = run_cli(args, "AQRM_WORKERS=2 ");
  CHECK(env.output == a.output);
}

TEST_CASE("worker count defaults from the environment", "[cli]") {
  const std::string out = "/tmp/aqrm_sweep_env.csv";
  const RunResult res = run_cli("sweep --ratio 0 --grid-start 0 --grid-stop 0.2 "
                                "--grid-points 2 --temp 0.2 --out " + out,
                                "AQRM_WORKERS=2 ");
  REQUIRE(res.exit_code == 0);
  const auto prov = nlohmann::json::parse(slurp(out + ".provenance.json"));
  CHECK(prov.at("workers").get<int>() == 2);
  std::remove(out.c_str());
  std::remove((out + ".provenance.json").c_str());
}

TEST_CASE("sweep accepts a json spec file", "[cli]") {
  const std::string spec_path = "/tmp/aqrm_spec_cli.json";
  aqrm::io::write_text_file(spec_path, R"({
    "mode": "quantify_1d",
    "ratio": 0.0,
    "coupling_grid": [0.0, 0.3],
    "temperature": 0.2,
    "quantifiers": ["g2_bare", "negativity"]
  })");
  const RunResult res = run_cli("sweep --spec " + spec_path);
  REQUIRE(res.exit_code == 0);
  CHECK(count_lines(res.output) == 4);
  // Unselected columns are nan; the selected ones carry values.
  CHECK(res.output.find(",nan,") != std::string::npos);
  std::remove(spec_path.c_str());
}

TEST_CASE("sweep rejects malformed specs and conflicting flags", "[cli]") {
  const std::string spec_path = "/tmp/aqrm_spec_bad.json";
  aqrm::io::write_text_file(spec_path, "not json at all");
  const RunResult bad = run_cli("sweep --spec " + spec_path);
  CHECK(bad.exit_code == 1);
  CHECK(bad.output.find("parse error") != std::string::npos);

  aqrm::io::write_text_file(spec_path, R"({"mode": "quantify_1d"})");
  const RunResult conflict = run_cli("sweep --spec " + spec_path + " --ratio 0.5");
  CHECK(conflict.exit_code == 1);

  const RunResult missing = run_cli("sweep --spec /tmp/aqrm_no_such_spec.json");
  CHECK(missing.exit_code == 1);
  std::remove(spec_path.c_str());
}

TEST_CASE("sweep json format wraps rows and provenance", "[cli]") {
  const RunResult res = run_cli("sweep --ratio 0 --grid-start 0 --grid-stop 0.3 "
                                "--grid-points 2 --temp 0.2 --format json");
  REQUIRE(res.exit_code == 0);
  const auto j = nlohmann::json::parse(res.output);
  REQUIRE(j.at("rows").size() == 2);
  CHECK(j.at("rows")[0].at("T").get<double>() == 0.2);
  CHECK(j.at("provenance").at("rows_total").get<int>() == 2);
}

TEST_CASE("validate passes at the default point and reports skips", "[cli]") {
  const RunResult res = run_cli("validate");
  REQUIRE(res.exit_code == 0);
  CHECK(res.output.find("parity-commutator: pass") != std::string::npos);
  CHECK(res.output.find("gibbs-fixed-point: pass") != std::string::npos);
  CHECK(res.output.find("steady-state-match: pass") != std::string::npos);
  CHECK(res.output.find("relaxation: pass") != std::string::npos);
  CHECK(res.output.find("oracle-battery: pass") != std::string::npos);
  CHECK(res.output.find("validate: OK") != std::string::npos);

  const RunResult skipped = run_cli("validate --alpha 0");
  REQUIRE(skipped.exit_code == 0);
  CHECK(skipped.output.find("gibbs-fixed-point: skipped") != std::string::npos);
  CHECK(skipped.output.find("validate: OK") != std::string::npos);
}

TEST_CASE("validate reports the nonequilibrium case as expected-fail", "[cli]") {
  const RunResult res = run_cli("validate --temp-qubit 0.3");
  REQUIRE(res.exit_code == 0);
  CHECK(res.output.find("gibbs-fixed-point: expected-fail") != std::string::npos);
  CHECK(res.output.find("steady-state-match: expected-fail") != std::string::npos);
  CHECK(res.output.find("validate: OK") != std::string::npos);
}
