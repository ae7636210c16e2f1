// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "geolid/cli.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "geolid");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = geolid::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("geolid_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("version and usage") {
  const auto v = cli({"version"});
  CHECK(v.code == 0);
  CHECK(v.out == "geolid 0.1.0\n");

  CHECK(cli({}).code == 1);
  CHECK(cli({"frobnicate"}).code == 1);
  CHECK(cli({"geovec", "--lat", "10"}).code == 1);
  CHECK(cli({"train", "--steps", "5"}).code == 1);

  const auto help = cli({"train", "--help"});
  CHECK(help.code == 0);
  for (const char* flag : {"--config", "--seed", "--steps", "--mode", "--layers", "--cond-share",
                           "--cond-freeze", "--lambda", "--gamma", "--no-detach", "--data", "--resume",
                           "--out", "--threads"}) {
    CHECK_MESSAGE(help.out.find(flag) != std::string::npos, flag);
  }
  CHECK(help.out.find("[0.2]") != std::string::npos);
  CHECK(help.out.find("[1500]") != std::string::npos);
}

TEST_CASE("geovec") {
  const auto r = cli({"geovec", "--lat", "51.5", "--lon", "-0.1", "--points", "4"});
  REQUIRE(r.code == 0);
  const auto values = lines(r.out);
  REQUIRE(values.size() == 4);
  for (const auto& v : values) {
    const double x = std::stod(v);
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }
  CHECK(cli({"geovec", "--lat", "91", "--lon", "0"}).code == 2);
}

TEST_CASE("runtime failures exit with 2") {
  const auto dir = scratch("missing");
  const auto r = cli({"train", "--config", "tiny", "--data", (dir / "nowhere").string(), "--out", dir.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("error:") == 0);
  CHECK(cli({"train", "--config", "tiny", "--set", "bogus=1", "--data", dir.string()}).code == 2);
  CHECK(cli({"eval", "--checkpoint", (dir / "none.ckpt").string(), "--data", dir.string()}).code == 2);
}

TEST_CASE("gradcheck on the tiny preset") {
  const auto r = cli({"gradcheck", "--config", "tiny"});
  CHECK(r.code == 0);
  CHECK(r.out.find("max relative error") != std::string::npos);
}

TEST_CASE("gen-data, train and eval") {
  const auto root = scratch("pipeline");
  const auto data = root / "data";
  REQUIRE(cli({"gen-data", "--out", data.string(), "--train", "3", "--dev", "1", "--dialect-dev", "1"}).code == 0);
  CHECK(fs::exists(data / "manifest.jsonl"));
  CHECK(fs::exists(data / "languages.csv"));
  CHECK(read_json(data / "run.meta")["command"] == "gen-data");

  auto train = [&](const fs::path& out) {
    return cli({"train", "--config", "tiny", "--steps", "4", "--mode", "geo-cond", "--layers", "0", "--set",
                "checkpoint_interval=2", "--data", data.string(), "--out", out.string()});
  };
  const auto t = train(root / "run");
  REQUIRE_MESSAGE(t.code == 0, t.err);
  for (const char* f : {"config.txt", "latest.ckpt", "best.ckpt", "train_log.csv", "run.meta"}) {
    CHECK_MESSAGE(fs::exists(root / "run" / f), f);
  }
  const auto meta = read_json(root / "run" / "run.meta");
  CHECK(meta["command"] == "train");
  CHECK(meta["config"]["mode"] == "geo-cond");
  CHECK(meta["config"]["steps"] == "4");
  CHECK(meta["artifacts"].contains("latest.ckpt"));
  CHECK(!meta["artifacts"].contains("train_log.csv"));

  SUBCASE("a rerun reproduces every artifact checksum") {
    REQUIRE(train(root / "again").code == 0);
    CHECK(read_json(root / "again" / "run.meta")["artifacts"] == meta["artifacts"]);
  }
  SUBCASE("eval writes the report and embeddings") {
    const auto e = cli({"eval", "--checkpoint", (root / "run" / "best.ckpt").string(), "--data", data.string(),
                        "--splits", "dev,dialect-dev", "--dump", "--out", (root / "eval").string()});
    REQUIRE_MESSAGE(e.code == 0, e.err);
    CHECK(e.out.find("| dev |") != std::string::npos);
    CHECK(e.out.find("macro avg") != std::string::npos);
    for (const char* f : {"report.md", "report.csv", "embeddings.bin", "run.meta"}) {
      CHECK_MESSAGE(fs::exists(root / "eval" / f), f);
    }
    CHECK(read_json(root / "eval" / "run.meta")["config"].contains("checkpoint_crc32"));
  }
  SUBCASE("GEOLID_OUT sets the default output directory") {
    const auto env = root / "from_env";
    ::setenv("GEOLID_OUT", env.string().c_str(), 1);
    const auto r = cli({"geovec", "--lat", "0", "--lon", "0", "--points", "2"});
    const auto g = cli({"gen-data", "--train", "1", "--dev", "1", "--dialect-dev", "1"});
    ::unsetenv("GEOLID_OUT");
    CHECK(r.code == 0);
    CHECK(g.code == 0);
    CHECK(fs::exists(env / "manifest.jsonl"));
  }
  SUBCASE("ablate over one strategy") {
    const auto a = cli({"ablate", "--config", "tiny", "--steps", "2", "--grid", "bottom", "--data", data.string(),
                        "--out", (root / "ablate").string()});
    REQUIRE_MESSAGE(a.code == 0, a.err);
    CHECK(fs::exists(root / "ablate" / "ablation.md"));
    CHECK(fs::exists(root / "ablate" / "ablation.csv"));
    // Header, rule, baseline, geo-pred and four bottom cells.
    CHECK(lines(a.out).size() == 8);
  }
}
