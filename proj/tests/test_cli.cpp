#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("causig_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// Constructed after the directory itself, so it is destroyed first.
struct Cleanup {
  Cleanup() { workdir(); }
  ~Cleanup() { fs::remove_all(workdir()); }
} cleanup;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Result {
  int status;
  std::string out;
  std::string err;
};

Result causig(const std::string& args) {
  const fs::path out = workdir() / "stdout.txt";
  const fs::path err = workdir() / "stderr.txt";
  const std::string cmd = std::string("\"") + CAUSIG_CLI_PATH + "\" " + args + " >\"" + out.string() +
                          "\" 2>\"" + err.string() + "\"";
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out), slurp(err)};
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

void write(const std::string& name, const std::string& text) { std::ofstream(workdir() / name) << text; }

}  // namespace

TEST_CASE("version and help") {
  const Result v = causig("--version");
  CHECK(v.status == 0);
  CHECK(v.out.find("0.1.0") != std::string::npos);
  CHECK(v.out.find("params format 1") != std::string::npos);
  CHECK(causig("--help").status == 0);
  CHECK(causig("fit --help").out.find("--recording") != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
  const Result unknown = causig("fit --recording a.csv --meta a.json --out x.json --bogus");
  CHECK(unknown.status == 2);
  CHECK(unknown.err.find("Usage") != std::string::npos);
  CHECK(unknown.err.find("\"error\":\"usage\"") != std::string::npos);
  CHECK(causig("").status == 2);
  CHECK(causig("simulate --config c.json --out-dir d").status == 2);  // --seed is required
  CHECK(causig("reach --params p.json --out-values v.csv --mode l3").status == 2);
}

TEST_CASE("computation errors exit 1 with a JSON message") {
  const Result r = causig("fit --recording " + path("missing.csv") + " --meta " + path("missing.json") +
                          " --out " + path("x.json"));
  CHECK(r.status == 1);
  const json e = json::parse(r.err);
  CHECK(e.at("error") == "io");
  CHECK_FALSE(e.at("message").get<std::string>().empty());
}

TEST_CASE("simulate, fit, identify") {
  write("sim.json", R"({"m": 6, "n": 2, "T": 400, "noise_sigma": 0.01})");
  REQUIRE(causig("simulate --config " + path("sim.json") + " --out-dir " + path("sim") +
                 " --seed 3 --subject subA --task rest --scan scan1")
              .status == 0);
  CHECK(fs::exists(path("sim/subA_rest_scan1_true_params.json")));
  const json meta = json::parse(slurp(path("sim/subA_rest_scan1.json")));
  CHECK(meta.at("input_indices") == json::array({6, 7}));

  REQUIRE(causig("fit --recording " + path("sim/subA_rest_scan1.csv") + " --meta " +
                 path("sim/subA_rest_scan1.json") + " --out " + path("db/subA.json"))
              .status == 0);
  const json params = json::parse(slurp(path("db/subA.json")));
  CHECK(params.at("m") == 6);
  CHECK(params.at("n") == 2);
  CHECK(params.at("Q").size() == 36);
  CHECK(params.at("subject_id") == "subA");
  CHECK(params.at("lambda").get<double>() == doctest::Approx(0.4));

  const Result id = causig("identify --query " + path("db/subA.json") + " --db " + path("db") + " --task rest");
  REQUIRE(id.status == 0);
  const json answer = json::parse(id.out);
  CHECK(answer.at("subject_id") == "subA");
  CHECK(answer.at("distance").get<double>() < 1e-9);

  CHECK(causig("fit --recording " + path("sim/subA_rest_scan1.csv") + " --meta " +
               path("sim/subA_rest_scan1.json") + " --out " + path("single.json") +
               " --single-timescale --penalty group --lambda 1")
            .status == 0);
}

TEST_CASE("cohort and evaluate with four conditions") {
  write("cohort.json", R"({"sim": {"T": 300}})");
  REQUIRE(causig("make-cohort --subjects 5 --scans 4 --config " + path("cohort.json") + " --out-dir " +
                 path("cohort") + " --seed 9")
              .status == 0);
  json manifest = json::parse(slurp(path("cohort/manifest.json")));
  CHECK(manifest.at("recordings").size() == 20);
  manifest["folds"] = {{"conditions", {"scan1", "scan2", "scan3", "scan4"}}};
  std::ofstream(workdir() / "cohort/manifest4.json") << manifest.dump();

  const Result r = causig("evaluate --manifest " + path("cohort/manifest4.json") + " --out " + path("acc.csv"));
  REQUIRE(r.status == 0);
  const std::string csv = slurp(path("acc.csv"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(csv.find("3,scan4,scan1|scan2|scan3,15,") != std::string::npos);

  // Defaults to output_dir from the manifest.
  CHECK(causig("evaluate --manifest " + path("cohort/manifest.json") + " --jobs 3").status == 0);
  CHECK(fs::exists(path("cohort/results/accuracy.csv")));

  write("bad_manifest.json", R"({"recordings": []})");
  CHECK(causig("evaluate --manifest " + path("bad_manifest.json")).status == 2);
}

TEST_CASE("reach, export-graph, downsample") {
  write("sim2.json", R"({"m": 5, "n": 2, "T": 300})");
  REQUIRE(causig("simulate --config " + path("sim2.json") + " --out-dir " + path("s2") + " --seed 4").status == 0);
  const std::string params = path("s2/sim_task_scan1_true_params.json");

  REQUIRE(causig("reach --params " + params + " --horizon 4 --out-values " + path("v.csv") +
                 " --out-grid " + path("g.csv"))
              .status == 0);
  const std::string values = slurp(path("v.csv"));
  CHECK(values.rfind("region,value\n0,", 0) == 0);
  CHECK(std::count(values.begin(), values.end(), '\n') == 6);
  const std::string grid = slurp(path("g.csv"));
  CHECK(std::count(grid.begin(), grid.end(), '\n') == 12);

  write("layout.json", R"({"cells": [[0,0],[1,1],[2,2],[3,3]]})");
  CHECK(causig("reach --params " + params + " --out-values " + path("v2.csv") + " --layout " +
               path("layout.json"))
            .status == 1);  // layout covers 4 of 5 regions

  REQUIRE(causig("export-graph --params " + params + " --threshold 0.5 --top-k 3 --out " + path("e.csv")).status == 0);
  const std::string edges = slurp(path("e.csv"));
  CHECK(edges.rfind("source,target,weight,timescale\n", 0) == 0);
  CHECK(std::count(edges.begin(), edges.end(), '\n') <= 4);

  REQUIRE(causig("downsample --recording " + path("s2/sim_task_scan1.csv") + " --meta " +
                 path("s2/sim_task_scan1.json") + " --factor 3 --out-recording " + path("d.csv") +
                 " --out-meta " + path("d.json"))
              .status == 0);
  CHECK(json::parse(slurp(path("d.json"))).at("dt").get<double>() == doctest::Approx(2.16));
}
