#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Runs every case inside a fresh scratch directory.
struct Scratch {
  fs::path old = fs::current_path();
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("boxctl_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
    fs::current_path(dir);
  }
  ~Scratch() {
    fs::current_path(old);
    fs::remove_all(dir);
  }
};

struct Run {
  int status;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int s = boxctl::cli::dispatch(args, out, err);
  return {s, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("spectrum: CSV, manifest and the tie warning") {
  Scratch s;
  const Run r = run({"spectrum", "--a", "1", "--b", "1", "--count", "6"});
  REQUIRE(r.status == 0);
  const json m = json::parse(r.out);
  CHECK(m["schema_version"] == 1);
  CHECK(m["command"] == "spectrum");
  CHECK(m["files"][0]["path"] == "spectrum.csv");
  CHECK(m["files"][0]["rows"] == 6);
  CHECK(!m["warnings"].empty());
  CHECK(json::parse(slurp("spectrum.csv.manifest.json")) == m);
  const std::string csv = slurp("spectrum.csv");
  CHECK(csv.rfind("rank,m,n,energy\n1,1,1,", 0) == 0);
}

TEST_CASE("reruns produce byte-identical CSV") {
  Scratch s;
  REQUIRE(run({"sigma", "--a", "1.5707963267948966", "--atilde", "0.5235987755982988", "--K", "300", "--out", "x.csv"}).status == 0);
  REQUIRE(run({"sigma", "--a", "1.5707963267948966", "--atilde", "0.5235987755982988", "--K", "300", "--out", "y.csv"}).status == 0);
  CHECK(slurp("x.csv") == slurp("y.csv"));
  CHECK(!slurp("x.csv").empty());
}

TEST_CASE("exit statuses and error objects") {
  Scratch s;
  const Run usage = run({"spectrum", "--a", "-1", "--count", "3"});
  CHECK(usage.status == 2);
  const json e = json::parse(usage.err);
  CHECK(e["exit_status"] == 2);
  CHECK(e["command"] == "spectrum");
  CHECK(e["error"]["kind"] == "usage");
  CHECK(run({"nonsense"}).status == 2);
  const Run numeric = run({"sigma", "--a", "1", "--atilde", "0.5", "--K", "50"});
  CHECK(numeric.status == 3);
  CHECK(json::parse(numeric.err)["error"]["code"] == "tie_in_index");
  CHECK(run({"evolve", "--config", "missing.json"}).status == 2);
}

TEST_CASE("evolve reruns from its own manifest") {
  Scratch s;
  {
    std::ofstream cfg("run.json");
    cfg << R"({"path": {"type": "smoothstep", "a0": 1.2, "a1": 1.0, "t1": 1.0},
               "basis": 6, "dt": 0.01, "initial": {"mode": [2, 1]},
               "breaker": {"strength": 5, "seed": 3}, "observe_every": 10, "output": "first.csv"})";
  }
  const Run first = run({"evolve", "--config", "run.json"});
  REQUIRE(first.status == 0);
  const json m = json::parse(first.out);
  CHECK(m["config"]["breaker"]["seed"] == 3);
  CHECK(m["files"][0]["rows"] == 11);
  const Run again = run({"evolve", "--config", "first.csv.manifest.json", "--out", "second.csv"});
  REQUIRE(again.status == 0);
  CHECK(slurp("first.csv") == slurp("second.csv"));
  const Run serial = run({"evolve", "--config", "run.json", "--serial", "--out", "serial.csv"});
  REQUIRE(serial.status == 0);
  CHECK(json::parse(serial.out)["threads"].get<int>() >= 1);
}
