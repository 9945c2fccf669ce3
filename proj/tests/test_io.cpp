#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "bzwalk/error.hpp"
#include "bzwalk/io.hpp"

using namespace bzwalk;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("bzwalk_test_io_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) CHECK(std::stod(format_number(v)) == v);
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("CSV writer") {
  const fs::path d = scratch_dir("csv");
  fs::create_directories(d);
  {
    CsvWriter w(d / "a.csv");
    w.comment("k in k_R").header({"k", "p"}).row({0.5, 0.25});
    w.row("x", {1.0});
    CHECK_THROWS_AS(w.row({1.0}), Error);
  }
  CHECK(slurp(d / "a.csv") == "# k in k_R\nk,p\n0.5,0.25\nx,1\n");
  CHECK_THROWS_AS(CsvWriter(d / "missing" / "b.csv"), Error);
  fs::remove_all(d);
}

TEST_CASE("output directory precedence") {
  const fs::path env_dir = scratch_dir("env");
  const fs::path flag_dir = scratch_dir("flag");
  ::setenv(kOutputDirEnv, env_dir.c_str(), 1);
  CHECK(resolve_output_directory("") == env_dir);
  CHECK(fs::is_directory(env_dir));
  CHECK(resolve_output_directory(flag_dir.string()) == flag_dir);
  CHECK(fs::is_directory(flag_dir));
  ::unsetenv(kOutputDirEnv);
  CHECK(resolve_output_directory("") == fs::path("."));
  fs::remove_all(env_dir);
  fs::remove_all(flag_dir);
}

TEST_CASE("run manifest round trip") {
  const fs::path d = scratch_dir("manifest");
  fs::create_directories(d);
  RunManifest m;
  m.command = "walk";
  m.config = {{"steps", 10}, {"alpha", 1.5}};
  m.seed = 42;
  m.version = code_version();
  m.outputs = {"walk.csv"};
  m.write(d / "walk.manifest.json");
  const auto back = RunManifest::from_json(read_json_file(d / "walk.manifest.json"));
  CHECK(back.command == "walk");
  CHECK(back.config == m.config);
  CHECK(back.seed == 42);
  CHECK(back.outputs == m.outputs);
  {
    std::ofstream bad(d / "bad.json");
    bad << "{ \"steps\": ";
  }
  CHECK_THROWS_AS(read_json_file(d / "bad.json"), InvalidParameter);
  CHECK_THROWS_AS(read_json_file(d / "absent.json"), Error);
  fs::remove_all(d);
}
