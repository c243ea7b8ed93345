#include <unistd.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "doctest.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("sparsedoa-cli-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs the CLI with the given argument string; stdout/stderr land in capture
// files under dir so assertions can read them.
RunResult run_cli(const TempDir& dir, const std::string& args) {
  const auto out_path = dir.path / "stdout.txt";
  const auto err_path = dir.path / "stderr.txt";
  const std::string command = std::string(SPARSEDOA_CLI_PATH) + " " + args + " > " +
                              out_path.string() + " 2> " + err_path.string();
  const int status = std::system(command.c_str());
  RunResult result;
  REQUIRE(status != -1);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  return result;
}

int count_lines(const std::string& text) {
  int lines = 0;
  for (char c : text)
    if (c == '\n') ++lines;
  return lines;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("geometry json reports layout and coarray facts") {
  TempDir dir;
  const auto r = run_cli(dir, "geometry --geometry coprime:4,2,4,3");
  CHECK(r.exit_code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["positions"] == json::array({0, 2, 3, 4, 6, 9}));
  CHECK(j["aperture"] == 9);
  CHECK(j["equivalent_ula_size"] == 10);
  CHECK(j["coarray"]["contiguous_len"] == 8);
  CHECK(j["coarray"]["lags"].size() == j["coarray"]["weights"].size());
  CHECK(j.contains("warning"));

  const auto rn = run_cli(dir, "geometry --geometry nested:3,4");
  const auto jn = json::parse(rn.out);
  CHECK(jn["positions"] == json::array({0, 1, 2, 3, 6, 9}));
  CHECK(jn["coarray"]["contiguous_len"] == 10);
  CHECK(!jn.contains("warning"));
}

TEST_CASE("geometry csv emits one sensor per line") {
  TempDir dir;
  const auto planar = run_cli(dir, "geometry --geometry sirca:2 --format csv");
  CHECK(planar.exit_code == 0);
  CHECK(count_lines(planar.out) == 36);
  CHECK(planar.out.find(',') != std::string::npos);

  const auto linear = run_cli(dir, "geometry --geometry ula:4 --format csv");
  CHECK(linear.out == "0\n1\n2\n3\n");

  const auto sirna = run_cli(dir, "geometry --geometry sirna:3,4");
  const auto j = json::parse(sirna.out);
  CHECK(j["sensor_count"] == 36);
  CHECK(j["contiguous_halfwidth"] == 9);
  CHECK(j["block_dimension"] == 100);
}

TEST_CASE("geometry rejects malformed specs") {
  TempDir dir;
  const auto r = run_cli(dir, "geometry --geometry ring:9");
  CHECK(r.exit_code != 0);
  CHECK(r.err.find("ring:9") != std::string::npos);
}

TEST_CASE("simulate writes snapshot csv with sidecar") {
  TempDir dir;
  const auto out = dir.path / "sim";
  const auto r = run_cli(dir, "simulate --geometry nested:3,4 --source 0.3 "
                              "--source -0.2,2 --snapshots 7 --seed 11 "
                              "--output-dir " + out.string());
  CHECK(r.exit_code == 0);
  const auto body = slurp(out / "snapshots.csv");
  CHECK(count_lines(body) == 7);
  const auto first_line = body.substr(0, body.find('\n'));
  int commas = 0;
  for (char c : first_line)
    if (c == ',') ++commas;
  CHECK(commas == 2 * 6 - 1);

  const auto sidecar = json::parse(slurp(out / "snapshots.json"));
  CHECK(sidecar["rows"] == 7);
  CHECK(sidecar["columns"] == 12);
  CHECK(sidecar["scenario"]["seed"] == 11);
  CHECK(sidecar["scenario"]["geometry"] == "nested:3,4");
  CHECK(sidecar["scenario"]["sources"].size() == 2);
  CHECK(sidecar["scenario"]["sources"][1][2] == 2.0);
}

TEST_CASE("simulate reruns are byte-identical and seeds differ") {
  TempDir dir;
  const std::string base = "simulate --geometry ula:5 --source 0.4 --snapshots 9 ";
  const auto a = dir.path / "a";
  const auto b = dir.path / "b";
  const auto c = dir.path / "c";
  CHECK(run_cli(dir, base + "--seed 3 --output-dir " + a.string()).exit_code == 0);
  CHECK(run_cli(dir, base + "--seed 3 --output-dir " + b.string()).exit_code == 0);
  CHECK(run_cli(dir, base + "--seed 4 --output-dir " + c.string()).exit_code == 0);
  CHECK(slurp(a / "snapshots.csv") == slurp(b / "snapshots.csv"));
  CHECK(slurp(a / "snapshots.csv") != slurp(c / "snapshots.csv"));
}

TEST_CASE("simulate rejects invalid scenarios without writing") {
  TempDir dir;
  const auto out = dir.path / "never";
  const auto r = run_cli(dir, "simulate --geometry nested:3,4 --source 2.0 "
                              "--snapshots 0 --output-dir " + out.string());
  CHECK(r.exit_code != 0);
  CHECK(r.err.find("direction cosine") != std::string::npos);
  CHECK(r.err.find("snapshot count") != std::string::npos);
  CHECK(!fs::exists(out));
}

TEST_CASE("correlate emits the toeplitz matrix and lag bookkeeping") {
  TempDir dir;
  const auto out = dir.path / "corr";
  const auto r = run_cli(dir, "correlate --geometry nested:3,4 --source 0.3 "
                              "--snapshots 50 --seed 2 --lag-count 8 "
                              "--output-dir " + out.string());
  CHECK(r.exit_code == 0);
  const auto body = slurp(out / "correlation.csv");
  CHECK(count_lines(body) == 8);
  const auto sidecar = json::parse(slurp(out / "correlation.json"));
  CHECK(sidecar["dimension"] == 8);
  CHECK(sidecar["construction"] == "toeplitz");
  CHECK(sidecar["lag-count"] == 8);
  CHECK(sidecar["lag_counts"].size() == 8);
  // lag 0 pools every sensor over every snapshot
  CHECK(sidecar["lag_counts"][0] == json::array({0, 0, 6 * 50}));
}

TEST_CASE("correlate picks the block construction for planar arrays") {
  TempDir dir;
  const auto out = dir.path / "corr";
  const auto r = run_cli(dir, "correlate --geometry sirca:2 --source 0.2,-0.4 "
                              "--snapshots 10 --output-dir " + out.string());
  CHECK(r.exit_code == 0);
  const auto sidecar = json::parse(slurp(out / "correlation.json"));
  CHECK(sidecar["dimension"] == 64);
  CHECK(sidecar["construction"] == "planar-block");

  const auto axis_out = dir.path / "axis";
  const auto ra = run_cli(dir, "correlate --geometry sirca:2 --source 0.2,-0.4 "
                               "--snapshots 10 --construction axis-y "
                               "--output-dir " + axis_out.string());
  CHECK(ra.exit_code == 0);
  const auto axis_sidecar = json::parse(slurp(axis_out / "correlation.json"));
  CHECK(axis_sidecar["construction"] == "column-averaged");
  CHECK(axis_sidecar["dimension"] == 8);
}

TEST_CASE("correlate rejects constructions that need the other geometry class") {
  TempDir dir;
  const auto r = run_cli(dir, "correlate --geometry ula:6 --source 0.1 "
                              "--construction block");
  CHECK(r.exit_code != 0);
  CHECK(r.err.find("planar") != std::string::npos);
  const auto rp = run_cli(dir, "correlate --geometry sirca:2 --source 0.1,0.2 "
                               "--construction toeplitz");
  CHECK(rp.exit_code != 0);
  CHECK(rp.err.find("linear") != std::string::npos);
}

TEST_CASE("spectrum locates linear sources and reruns byte-identical") {
  TempDir dir;
  const auto out = dir.path / "spec";
  const std::string base = "spectrum --geometry nested:3,4 --source 0.3 "
                           "--source -0.2 --snapshots 200 --seed 4 "
                           "--grid-step 0.002 --output-dir ";
  const auto r = run_cli(dir, base + out.string());
  CHECK(r.exit_code == 0);
  const auto body = slurp(out / "spectrum.csv");
  CHECK(count_lines(body) == 1002);
  CHECK(body.rfind("u,value\n", 0) == 0);

  const auto sidecar = json::parse(slurp(out / "peaks.json"));
  CHECK(sidecar["method"] == "mnm");
  CHECK(sidecar["complete"] == true);
  CHECK(sidecar["grid"]["count"] == 1001);
  REQUIRE(sidecar["peaks"].size() == 2);
  double hi = sidecar["peaks"][0]["u"].get<double>();
  double lo = sidecar["peaks"][1]["u"].get<double>();
  if (hi < lo) std::swap(hi, lo);
  CHECK(hi == doctest::Approx(0.3).epsilon(0.05));
  CHECK(lo == doctest::Approx(-0.2).epsilon(0.05));

  const auto out2 = dir.path / "spec2";
  CHECK(run_cli(dir, base + out2.string()).exit_code == 0);
  CHECK(slurp(out2 / "spectrum.csv") == body);
}

TEST_CASE("spectrum music method is selectable") {
  TempDir dir;
  const auto out = dir.path / "spec";
  const auto r = run_cli(dir, "spectrum --geometry coprime:4,2,4,3 --source 0.5 "
                              "--snapshots 300 --seed 8 --method music "
                              "--grid-step 0.005 --output-dir " + out.string());
  CHECK(r.exit_code == 0);
  const auto sidecar = json::parse(slurp(out / "peaks.json"));
  CHECK(sidecar["method"] == "music");
  REQUIRE(sidecar["peaks"].size() == 1);
  CHECK(sidecar["peaks"][0]["u"].get<double>() == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("spectrum pairs planar sources through the axis estimator") {
  TempDir dir;
  const auto out = dir.path / "plin";
  const auto r = run_cli(dir, "spectrum --geometry sirca:2 --source 0.297,0.46 "
                              "--source 0,-0.094 --snapshots 100 --seed 3 "
                              "--planar linear --grid-step 0.002 "
                              "--output-dir " + out.string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out / "spectrum-x.csv"));
  CHECK(fs::exists(out / "spectrum-y.csv"));
  const auto sidecar = json::parse(slurp(out / "peaks.json"));
  CHECK(sidecar["mode"] == "linear-planar");
  REQUIRE(sidecar["pairs"].size() == 2);
  // pairing must attach each elevation to its own azimuth, not swap them
  for (const auto& pair : sidecar["pairs"]) {
    const double ux = pair["ux"].get<double>();
    const double uy = pair["uy"].get<double>();
    if (ux > 0.15)
      CHECK(uy == doctest::Approx(0.46).epsilon(0.1));
    else
      CHECK(uy == doctest::Approx(-0.094).epsilon(0.2));
  }
}

TEST_CASE("spectrum sweeps the planar grid directly") {
  TempDir dir;
  const auto out = dir.path / "pdir";
  const auto r = run_cli(dir, "spectrum --geometry sirca:2 --source 0.4,-0.3 "
                              "--snapshots 60 --seed 5 --planar direct "
                              "--method music --grid-step 0.02 "
                              "--output-dir " + out.string());
  CHECK(r.exit_code == 0);
  const auto body = slurp(out / "spectrum.csv");
  CHECK(body.rfind("ux,uy,value\n", 0) == 0);
  CHECK(count_lines(body) == 101 * 101 + 1);
  const auto sidecar = json::parse(slurp(out / "peaks.json"));
  REQUIRE(sidecar["peaks"].size() == 1);
  CHECK(sidecar["peaks"][0]["ux"].get<double>() == doctest::Approx(0.4).epsilon(0.1));
  CHECK(sidecar["peaks"][0]["uy"].get<double>() ==
        doctest::Approx(-0.3).epsilon(0.1));
}

TEST_CASE("metrics runs a config file and embeds it in the sidecar") {
  TempDir dir;
  const auto config_path = dir.path / "exp.toml";
  std::ofstream(config_path) << "kind = \"linear-sweep\"\n"
                                "geometry = \"nested:3,4\"\n"
                                "sweep = \"snr-db\"\n"
                                "sweep-values = [0, 10]\n"
                                "trials = 5\n"
                                "seed = 21\n"
                                "grid-step = 0.01\n";
  const auto out = dir.path / "met";
  const auto r = run_cli(dir, "metrics --config " + config_path.string() +
                              " --output-dir " + out.string());
  CHECK(r.exit_code == 0);

  const auto prob = slurp(out / "probability.csv");
  CHECK(prob.rfind("sweep_value,algorithm,value,stderr,trials\n", 0) == 0);
  CHECK(count_lines(prob) == 1 + 2 * 2);
  CHECK(prob.find("0,mnm,") != std::string::npos);
  CHECK(prob.find("10,music,") != std::string::npos);
  const auto rmse = slurp(out / "rmse.csv");
  CHECK(count_lines(rmse) == 1 + 2 * 2);

  const auto sidecar = json::parse(slurp(out / "experiment.json"));
  CHECK(sidecar["config"]["seed"] == 21);
  CHECK(sidecar["config"]["trials"] == 5);
  CHECK(sidecar["config"]["snapshots"] == 100);
  CHECK(sidecar["config"]["sweep-values"] == json::array({0.0, 10.0}));

  const auto out2 = dir.path / "met2";
  CHECK(run_cli(dir, "metrics --config " + config_path.string() +
                     " --output-dir " + out2.string()).exit_code == 0);
  CHECK(slurp(out2 / "probability.csv") == prob);
  CHECK(slurp(out2 / "rmse.csv") == rmse);
}

TEST_CASE("metrics accepts json configs and flag overrides") {
  TempDir dir;
  const auto config_path = dir.path / "exp.json";
  std::ofstream(config_path) << R"({
    "kind": "linear-sweep",
    "geometry": "nested:3,4",
    "sweep": "snapshots",
    "sweep-values": [40, 80],
    "snr-db": 10,
    "trials": 9,
    "seed": 2,
    "grid-step": 0.01
  })";
  const auto out = dir.path / "met";
  const auto r = run_cli(dir, "metrics --config " + config_path.string() +
                              " --trials 4 --seed 7 --output-dir " + out.string());
  CHECK(r.exit_code == 0);
  const auto sidecar = json::parse(slurp(out / "experiment.json"));
  CHECK(sidecar["config"]["trials"] == 4);
  CHECK(sidecar["config"]["seed"] == 7);
  CHECK(sidecar["config"]["sweep"] == "snapshots");
  const auto prob = slurp(out / "probability.csv");
  CHECK(prob.find("40,mnm,") != std::string::npos);
  CHECK(prob.find(",4\n") != std::string::npos);
}

TEST_CASE("metrics runs planar experiments") {
  TempDir dir;
  const auto config_path = dir.path / "planar.toml";
  std::ofstream(config_path) << "kind = \"planar-rmse\"\n"
                                "geometry = \"sirca:2\"\n"
                                "sweep = \"snr-db\"\n"
                                "sweep-values = [20]\n"
                                "snapshots = 12\n"
                                "trials = 3\n"
                                "seed = 14\n"
                                "grid-step = 0.005\n"
                                "sources = [[0.297, 0.46], [0, -0.094]]\n";
  const auto out = dir.path / "met";
  const auto r = run_cli(dir, "metrics --config " + config_path.string() +
                              " --output-dir " + out.string());
  CHECK(r.exit_code == 0);
  for (const char* name : {"rmse.csv", "rmse-x.csv", "rmse-y.csv"}) {
    const auto body = slurp(out / name);
    CHECK(body.rfind("sweep_value,algorithm,value,stderr,trials\n", 0) == 0);
    CHECK(count_lines(body) == 1 + 2);
  }
  const auto sidecar = json::parse(slurp(out / "experiment.json"));
  CHECK(sidecar["config"]["kind"] == "planar-rmse");
  CHECK(sidecar["config"]["snapshots"] == 12);
}

TEST_CASE("metrics lists every config violation and writes nothing") {
  TempDir dir;
  const auto config_path = dir.path / "bad.toml";
  std::ofstream(config_path) << "kind = \"linear-sweep\"\n"
                                "geometry = \"ring:9\"\n"
                                "sweep-values = []\n"
                                "trials = 0\n";
  const auto out = dir.path / "never";
  const auto r = run_cli(dir, "metrics --config " + config_path.string() +
                              " --output-dir " + out.string());
  CHECK(r.exit_code != 0);
  CHECK(r.err.find("ring:9") != std::string::npos);
  CHECK(r.err.find("sweep-values") != std::string::npos);
  CHECK(r.err.find("trials") != std::string::npos);
  CHECK(!fs::exists(out));
}

TEST_CASE("metrics reports a missing config file") {
  TempDir dir;
  const auto r = run_cli(dir, "metrics --config " +
                              (dir.path / "absent.toml").string());
  CHECK(r.exit_code != 0);
  CHECK(r.err.find("absent.toml") != std::string::npos);
}

TEST_CASE("environment variable supplies the output directory") {
  TempDir dir;
  const auto out = dir.path / "from-env";
  const std::string command = "SPARSEDOA_OUTPUT_DIR=" + out.string() + " " +
                              SPARSEDOA_CLI_PATH +
                              " simulate --geometry ula:4 --source 0.1 "
                              "--snapshots 2 > /dev/null 2>&1";
  REQUIRE(std::system(command.c_str()) == 0);
  CHECK(fs::exists(out / "snapshots.csv"));

  // an explicit flag wins over the environment
  const auto flag_out = dir.path / "from-flag";
  const std::string override_cmd =
      "SPARSEDOA_OUTPUT_DIR=" + (dir.path / "ignored").string() + " " +
      SPARSEDOA_CLI_PATH +
      " simulate --geometry ula:4 --source 0.1 --snapshots 2 --output-dir " +
      flag_out.string() + " > /dev/null 2>&1";
  REQUIRE(std::system(override_cmd.c_str()) == 0);
  CHECK(fs::exists(flag_out / "snapshots.csv"));
  CHECK(!fs::exists(dir.path / "ignored"));
}

TEST_CASE("usage errors exit nonzero") {
  TempDir dir;
  CHECK(run_cli(dir, "").exit_code != 0);
  CHECK(run_cli(dir, "frobnicate").exit_code != 0);
  CHECK(run_cli(dir, "geometry").exit_code != 0);
  CHECK(run_cli(dir, "spectrum --geometry ula:5 --snapshots 5").exit_code != 0);
  CHECK(run_cli(dir, "spectrum --geometry ula:5 --source 0.1 --method fft")
            .exit_code != 0);
}

}  // TEST_SUITE
