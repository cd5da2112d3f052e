#include "rds/tensor_io.hpp"
#include "rds/rng.hpp"

#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

using namespace rds;

namespace {

std::string cli_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RDS_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

std::string capture_cli(const std::string& args) {
  const std::string cmd = std::string(RDS_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[256];
  while (fgets(buf, sizeof(buf), pipe)) out += buf;
  pclose(pipe);
  return out;
}

}  // namespace

TEST_CASE("cli degrade: corrupts a stored tensor and emits the mask") {
  const std::string dir = cli_dir("rds_cli_degrade");
  RngStream rng(3);
  const Tensor clean = rng.gaussian({40, 40});
  save_tensor(dir + "/clean.rtn", clean);

  const int rc = run_cli("degrade " + dir + "/clean.rtn " + dir +
                         "/dirty.rtn --rho 0.3 --sigma 0.0 --xi -1 --seed 5 --mask " + dir +
                         "/mask.rtn");
  REQUIRE(rc == 0);

  const Tensor dirty = load_tensor(dir + "/dirty.rtn");
  const Tensor mask = load_tensor(dir + "/mask.rtn");
  Index corrupted = 0;
  for (Index i = 0; i < dirty.size(); ++i) {
    if (mask[i] == 1.0) {
      CHECK(dirty[i] == -1.0);
      ++corrupted;
    } else {
      CHECK(dirty[i] == clean[i]);  // sigma = 0 leaves kept entries intact
    }
  }
  CHECK(corrupted > 300);
  CHECK(corrupted < 660);
}

TEST_CASE("cli metrics: reports psnr, ssim, and mse") {
  const std::string dir = cli_dir("rds_cli_metrics");
  RngStream rng(5);
  const Tensor ref = rng.gaussian({16, 16});
  save_tensor(dir + "/ref.rtn", ref);
  save_tensor(dir + "/x.rtn", ref);

  const std::string out = capture_cli("metrics " + dir + "/x.rtn " + dir + "/ref.rtn");
  CHECK(out.find("psnr 200") != std::string::npos);
  CHECK(out.find("ssim 1.0") != std::string::npos);
  CHECK(out.find("mse 0") != std::string::npos);
}

TEST_CASE("cli ablate: runs the grid into per-value directories") {
  const std::string dir = cli_dir("rds_cli_ablate");
  {
    std::ofstream cfg(dir + "/config.json");
    cfg << R"({
      "task": "inpainting",
      "signal_shape": [12, 12],
      "operator": {"mask_ratio": 0.5},
      "corruption": {"rho": 0.1, "sigma": 0.05},
      "solver": {"outer_steps": 5, "delta": 0.02,
                 "r_schedule": {"kind": "constant", "value": 16.0},
                 "cg": {"iterations": 4}},
      "prior": {"variance": 0.04},
      "methods": ["robust_cg"],
      "repeats": 1,
      "seed": 3,
      "output_dir": ")" << dir << R"(/out"
    })";
  }
  const int rc = run_cli("ablate " + dir + "/config.json --grid solver.delta=0.01,0.02");
  REQUIRE(rc == 0);
  CHECK(std::filesystem::exists(dir + "/out/delta=0.01/results.csv"));
  CHECK(std::filesystem::exists(dir + "/out/delta=0.02/results.csv"));
}

TEST_CASE("cli run: invalid config fails with a nonzero exit") {
  const std::string dir = cli_dir("rds_cli_bad");
  std::ofstream(dir + "/bad.json") << R"({"task": "inpainting", "operator": {"mask_ratio": 1.2}})";
  CHECK(run_cli("run " + dir + "/bad.json") != 0);
  CHECK(run_cli("run " + dir + "/missing.json") != 0);
}
