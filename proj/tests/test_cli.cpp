// Copyright 2026 The duxwb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "duxwb/cli.hpp"
#include "duxwb/dataset.hpp"

using namespace duxwb;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct Workspace {
  fs::path root;
  explicit Workspace(const std::string& name) : root(fs::temp_directory_path() / name) {
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Workspace() { fs::remove_all(root); }
  std::string operator/(const std::string& rel) const { return (root / rel).string(); }
};

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit with 2") {
    CHECK(cli({}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({"gen-data"}).code == 2);
    CHECK(cli({"gen-data", "--out", "x", "--scenes", "many"}).code == 2);
    CHECK(cli({"eval", "--ckpt", "a", "--baseline", "gray_world"}).code == 2);
    CHECK(cli({"eval", "--baseline", "gray_world"}).code == 2);
    CHECK(cli({"extract-def", "--long", "a.dxt"}).code == 2);
    const Run r = cli({"train", "--data", "d"});
    CHECK(r.code == 2);
    CHECK_FALSE(r.err.empty());
  }

  TEST_CASE("help documents the flags") {
    const Run r = cli({"train", "--help"});
    CHECK(r.code == 0);
    for (const char* flag : {"--model", "--e", "--seed", "--n", "--hist-size", "--variant", "--no-def", "--color-repr",
                             "--mapping", "--no-augment"})
      CHECK(r.out.find(flag) != std::string::npos);
  }

  TEST_CASE("runtime failures exit with 1") {
    Workspace ws("duxwb_cli_fail");
    const Run r = cli({"eval", "--baseline", "gray_world", "--data", ws / "missing"});
    CHECK(r.code == 1);
    CHECK(r.err.find("error:") != std::string::npos);
    CHECK(cli({"gen-data", "--scenes", "5", "--out", ws / "d"}).code == 1);
    CHECK(cli({"infer", "--ckpt", ws / "none.json", "--long", "a", "--short", "b"}).code == 1);
  }

  TEST_CASE("end-to-end workflow") {
    Workspace ws("duxwb_cli_e2e");
    const std::string data = ws / "data";
    Run r = cli({"gen-data", "--scenes", "12", "--seed", "3", "--small", "--out", data});
    REQUIRE(r.code == 0);
    CHECK(r.err.find("config {\"command\":\"gen-data\"") != std::string::npos);

    r = cli({"extract-def", "--data", data, "--e", "8", "--split", "all", "--out", ws / "def.csv"});
    REQUIRE(r.code == 0);
    std::istringstream csv(slurp(ws / "def.csv"));
    std::string header, row;
    std::getline(csv, header);
    CHECK(header.rfind("scene_id,e,def0,", 0) == 0);
    CHECK(header.find(",def14,gt_r,gt_g,gt_b") != std::string::npos);
    int rows = 0;
    while (std::getline(csv, row)) {
      ++rows;
      CHECK(std::count(row.begin(), row.end(), ',') == 1 + 15 + 3);
    }
    CHECK(rows == 12);

    const ManifestSource src = ManifestSource::open(data);
    const std::string long8 = (fs::path(data) / src.records()[0].files.at("long_x8")).string();
    const std::string short8 = (fs::path(data) / src.records()[0].files.at("short_x8")).string();
    r = cli({"extract-def", "--long", long8, "--short", short8});
    REQUIRE(r.code == 0);
    CHECK(nlohmann::json::parse(r.out)["def"].size() == 15);

    r = cli({"train", "--model", "emlp", "--data", data, "--out", ws / "m/emlp.json", "--epochs", "30", "--clusters",
             "3", "--copies", "1"});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(ws / "m/emlp.json.loss.csv"));
    r = cli({"train", "--model", "eccc", "--data", data, "--out", ws / "m/eccc.json", "--epochs", "3", "--n", "2",
             "--hist-size", "16", "--no-augment"});
    REQUIRE(r.code == 0);

    r = cli({"eval", "--ckpt", ws / "m/emlp.json", "--split", "all", "--out", ws / "rep"});
    REQUIRE(r.code == 0);
    const auto rep = nlohmann::json::parse(slurp(ws / "rep/report.json"));
    CHECK(rep["model"] == "emlp");
    CHECK(rep["n_scenes"] == 12);
    for (const char* k : {"mean", "median", "trimean", "best25", "worst25", "worst5", "max"}) CHECK(rep.contains(k));
    CHECK(fs::exists(ws / "rep/scenes.csv"));

    r = cli({"eval", "--baseline", "shades_of_gray", "--data", data, "--split", "val"});
    CHECK(r.code == 0);
    CHECK(nlohmann::json::parse(r.out)["model"] == "shades_of_gray");

    r = cli({"ensemble-eval", "--ckpt-a", ws / "m/emlp.json", "--ckpt-b", ws / "m/eccc.json", "--split", "all"});
    REQUIRE(r.code == 0);
    CHECK(nlohmann::json::parse(r.out)["model"] == "emlp+eccc");

    r = cli({"infer", "--ckpt", ws / "m/eccc.json", "--long", long8, "--short", short8});
    REQUIRE(r.code == 0);
    const auto inf = nlohmann::json::parse(r.out);
    CHECK(inf["illuminant"].size() == 3);

    // A missing frame names the scene.
    fs::remove(long8);
    r = cli({"eval", "--ckpt", ws / "m/emlp.json", "--split", "all"});
    CHECK(r.code == 1);
    CHECK(r.err.find(src.records()[0].scene_id) != std::string::npos);
  }

  TEST_CASE("identical seeds give identical artifacts") {
    Workspace ws("duxwb_cli_det");
    for (const char* run : {"a", "b"}) {
      const std::string d = ws / (std::string(run) + "/data");
      REQUIRE(cli({"gen-data", "--scenes", "10", "--seed", "5", "--small", "--out", d}).code == 0);
      REQUIRE(cli({"train", "--data", d, "--out", ws / (std::string(run) + "/m.json"), "--epochs", "10",
                   "--clusters", "2", "--copies", "1"})
                  .code == 0);
      REQUIRE(cli({"eval", "--ckpt", ws / (std::string(run) + "/m.json"), "--data", d, "--split", "all", "--out",
                   ws / (std::string(run) + "/rep")})
                  .code == 0);
    }
    CHECK(slurp(ws / "a/data/manifest.json") == slurp(ws / "b/data/manifest.json"));
    CHECK(slurp(ws / "a/m.json.bin") == slurp(ws / "b/m.json.bin"));
    CHECK(slurp(ws / "a/rep/report.json") == slurp(ws / "b/rep/report.json"));
    CHECK(slurp(ws / "a/rep/scenes.csv") == slurp(ws / "b/rep/scenes.csv"));
  }
}
