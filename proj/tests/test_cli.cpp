#include <catch2/catch.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = RANKSPEC_CLI_PATH;
const std::string kData = RANKSPEC_DATA_DIR;

int run(const std::string& args) {
  const std::string command = kCli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "rankspec_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("verify exits cleanly on the default model") {
  const fs::path out = fresh_dir("verify");
  CHECK(run("verify --out " + out.string()) == 0);
  CHECK(fs::exists(out / "report.json"));
}

TEST_CASE("usage errors exit with status 1") {
  CHECK(run("") == 1);
  CHECK(run("no-such-command") == 1);
  CHECK(run("ids-mc --level 2 --samples 10") == 1);  // --seed is mandatory
  CHECK(run("ids-approx --model /nonexistent.json --out /tmp/x") == 1);
  // enumeration cap: level 5 site model has 2^32 configurations
  const fs::path out = fresh_dir("cap");
  CHECK(run("ids-approx --model " + kData + "/site_j23.json --levels 5 --out " + out.string()) ==
        1);
}

TEST_CASE("invariant violations exit with status 2") {
  const fs::path out = fresh_dir("violation");
  // an absurd sampling tolerance cannot be met, so the emitted distance
  // exceeds its bound and the run must flag itself
  CHECK(run("ids-mc --model " + kData + "/site_j23.json --level 2 --samples 20 --seed 3 "
            "--tol 1e-9 --out " +
            out.string()) == 2);
}

TEST_CASE("reruns with the same configuration are byte-identical") {
  const fs::path a = fresh_dir("rerun_a");
  const fs::path b = fresh_dir("rerun_b");
  const std::string args = "ids-empirical --model " + kData +
                           "/site_j23.json --side 64 --level 2 --seed 11 --threads 2 --out ";
  REQUIRE(run(args + a.string()) == 0);
  REQUIRE(run(args + b.string()) == 0);
  for (const auto& entry : fs::directory_iterator(a))
    CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
}

TEST_CASE("percolation run emits closed-form checks and csv attachments") {
  const fs::path out = fresh_dir("percolation");
  REQUIRE(run("percolation --level 1 --out " + out.string()) == 0);
  CHECK(fs::exists(out / "bond_p0.5.csv"));
  CHECK(fs::exists(out / "site_p0.9.csv"));
  const std::string report = slurp(out / "report.json");
  CHECK(report.find("\"closed_form\"") != std::string::npos);
  const std::string csv = slurp(out / "bond_p0.5.csv");
  CHECK(csv.rfind("lambda,value\n-inf,0\n", 0) == 0);
}

TEST_CASE("selfsimilar run reports the tower and census") {
  const fs::path out = fresh_dir("selfsimilar");
  REQUIRE(run("selfsimilar --spec " + kData + "/path_tower.json --levels 5 --out " +
              out.string()) == 0);
  CHECK(fs::exists(out / "tower_level_5.csv"));
  const std::string report = slurp(out / "report.json");
  CHECK(report.find("\"ratio_vanishing\": true") != std::string::npos);
}

TEST_CASE("ids-approx with a degenerate chain records distance zero") {
  const fs::path out = fresh_dir("degenerate");
  REQUIRE(run("ids-approx --model " + kData + "/site_j23.json --level 2 --levels 2 --out " +
              out.string()) == 0);
  const std::string report = slurp(out / "report.json");
  CHECK(report.find("\"rank_distance\": 0.0") != std::string::npos);
  CHECK(report.find("\"ids_distance\": 0.0") != std::string::npos);
}
