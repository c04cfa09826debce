#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kDir = fs::temp_directory_path() / "polya_cli_test";

int run(const std::string& args) {
  const std::string cmd = std::string(POLYA_CLI) + " " + args + " > " + (kDir / "stdout.txt").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const std::string& name, const std::string& text) { std::ofstream(kDir / name) << text; }

}  // namespace

TEST_CASE("subcommands and exit codes") {
  fs::remove_all(kDir);
  fs::create_directories(kDir);
  write("ok.json", R"({"graph": "star:5", "gamma": [1.2, 0.5, 0.5, 0.5, 0.5], "horizon": 5000, "replications": 2,
                       "diagnostics": {"coupling": true}})");
  write("dup.json", R"({"graph": "star:5", "gamma": 0.5, "gamma": 0.4, "horizon": 50})");
  write("bad.json", R"({"graph": "star:5", "gamma": 1.0, "horizon": 50})");
  const auto cfg = (kDir / "ok.json").string();
  const auto out = kDir / "out";

  CHECK(run("classify --config " + cfg) == 0);
  CHECK(read(kDir / "stdout.txt").find("ToZero") != std::string::npos);
  CHECK(run("simulate --config " + cfg + " --out " + out.string()) == 0);
  CHECK(fs::exists(out / "trajectory.csv"));
  CHECK(fs::exists(out / "manifest.json"));
  CHECK(run("estimate --config " + cfg + " --out " + out.string()) == 0);
  CHECK(fs::exists(out / "estimates.csv"));
  CHECK(fs::exists(out / "errors.csv"));
  CHECK(run("rate --config " + cfg + " --out " + out.string()) == 0);
  CHECK(fs::exists(out / "rate.csv"));
  CHECK(run("diagnose --config " + cfg + " --out " + out.string()) == 0);
  CHECK(fs::exists(out / "diagnostics.csv"));
  CHECK(fs::exists(out / "coupling.csv"));
  CHECK(run("sweep --config " + cfg + " --reps 40 --deltas 0.5 0.25 --out " + out.string()) == 0);
  CHECK(fs::exists(out / "sweep.csv"));

  // overrides change the output; identical invocations do not
  CHECK(run("simulate --config " + cfg + " --seed 5 --horizon 300 --out " + (kDir / "a").string()) == 0);
  CHECK(run("simulate --config " + cfg + " --seed 5 --horizon 300 --out " + (kDir / "b").string()) == 0);
  CHECK(run("simulate --config " + cfg + " --seed 6 --horizon 300 --out " + (kDir / "c").string()) == 0);
  CHECK(read(kDir / "a" / "trajectory.csv") == read(kDir / "b" / "trajectory.csv"));
  CHECK(read(kDir / "a" / "trajectory.csv") != read(kDir / "c" / "trajectory.csv"));
  CHECK(read(kDir / "a" / "manifest.json").find("\"horizon\": 300") != std::string::npos);

  CHECK(run("simulate --config " + (kDir / "dup.json").string()) == 2);
  CHECK(run("simulate --config " + (kDir / "bad.json").string()) == 2);
  CHECK(run("simulate --config " + (kDir / "missing.json").string()) == 2);
  CHECK(run("simulate --config " + cfg + " --horizon 1") == 2);
  CHECK(run("sweep --config " + cfg + " --reps 2 --deltas 0.1") == 2);
  CHECK(run("frobnicate") == 2);
}
