#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "wgs/cli.hpp"
#include "wgs/grid.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("wgs");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return wgs::run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::path("/tmp") / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("help exits cleanly; parse errors exit 2") {
  CHECK(run({"--help"}) == 0);
  CHECK(run({"train", "--help"}) == 0);
  CHECK(run({"--definitely-not-a-flag"}) == 2);
  CHECK(run({"train"}) == 2);                               // needs --preset/--config
  CHECK(run({"train", "--preset", "not-a-problem"}) == 2);  // unknown preset
  CHECK(run({"landscape", "--loss", "bogus"}) == 2);
  CHECK(run({"reference", "example1", "--mode", "bogus"}) == 2);
}

TEST_CASE("reference analytic writes a normalized grid density") {
  TempDir dir("wgs_cli_ref");
  CHECK(run({"reference", "example1", "--mode", "analytic", "--grid", "32x32",
             "--lo", "-3,-3", "--hi", "5,5", "--out", dir.str()}) == 0);
  const wgs::GridDensity density =
      wgs::read_grid_density((dir.path / "density.csv").string());
  CHECK(density.spec.counts == std::vector<int>{32, 32});
  CHECK(density.integral() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(fs::exists(dir.path / "density.pgm"));
}

TEST_CASE("a short training run produces the full artifact set") {
  TempDir dir("wgs_cli_train");
  CHECK(run({"train", "--preset", "example1", "--iters", "20", "--samples", "256",
             "--n-test", "32", "--layers", "2", "--width", "8", "--seed", "5",
             "--eval-samples", "4000", "--out", dir.str()}) == 0);
  CHECK(fs::exists(dir.path / "config.json"));
  CHECK(fs::exists(dir.path / "train_record.csv"));
  CHECK(fs::exists(dir.path / "snapshots.csv"));
  CHECK(fs::exists(dir.path / "checkpoint_final.json"));
  CHECK(fs::exists(dir.path / "metric_report.json"));

  const std::string report = slurp(dir.path / "metric_report.json");
  CHECK(report.find("\"e_p\"") != std::string::npos);
  CHECK(report.find("final_weak_loss") != std::string::npos);

  // train_record has one line per inner step plus the header/comments.
  std::istringstream in(slurp(dir.path / "train_record.csv"));
  std::string line;
  int data_lines = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("outer_iter", 0) == 0) {
      header_seen = true;
      continue;
    }
    ++data_lines;
  }
  CHECK(header_seen);
  CHECK(data_lines == 20);
}

TEST_CASE("deterministic runs are byte-identical; the config reruns exactly") {
  TempDir a("wgs_cli_det_a");
  TempDir b("wgs_cli_det_b");
  const std::vector<std::string> base = {
      "train",   "--preset", "example1", "--iters", "10",   "--samples", "128",
      "--n-test", "16",      "--layers", "2",       "--width", "8",       "--seed",
      "9"};
  std::vector<std::string> run_a = base;
  run_a.push_back("--out");
  run_a.push_back(a.str());
  std::vector<std::string> run_b = base;
  run_b.push_back("--out");
  run_b.push_back(b.str());
  CHECK(run(run_a) == 0);
  CHECK(run(run_b) == 0);
  CHECK(slurp(a.path / "train_record.csv") == slurp(b.path / "train_record.csv"));
  CHECK(slurp(a.path / "snapshots.csv") == slurp(b.path / "snapshots.csv"));
  CHECK(slurp(a.path / "checkpoint_final.json") ==
        slurp(b.path / "checkpoint_final.json"));
  CHECK(slurp(a.path / "metric_report.json") == slurp(b.path / "metric_report.json"));

  // --config replays the written file (fresh out dir, same bytes).
  TempDir c("wgs_cli_det_c");
  CHECK(run({"train", "--config", (a.path / "config.json").string(), "--out",
             c.str()}) == 0);
  CHECK(slurp(a.path / "train_record.csv") == slurp(c.path / "train_record.csv"));
  CHECK(slurp(a.path / "checkpoint_final.json") ==
        slurp(c.path / "checkpoint_final.json"));
}

TEST_CASE("eval loads a checkpoint and scores it against a reference") {
  TempDir dir("wgs_cli_eval");
  REQUIRE(run({"train", "--preset", "example1", "--iters", "15", "--samples", "256",
               "--n-test", "32", "--layers", "2", "--width", "8", "--seed", "2",
               "--eval-samples", "4000", "--out", dir.str()}) == 0);
  REQUIRE(run({"reference", "example1", "--mode", "analytic", "--grid", "48x48",
               "--lo", "-4,-4", "--hi", "6,6", "--out", dir.str()}) == 0);

  TempDir out("wgs_cli_eval_out");
  CHECK(run({"eval", "--checkpoint", (dir.path / "checkpoint_final.json").string(),
             "--problem", "example1", "--reference",
             (dir.path / "density.csv").string(), "--eval-samples", "4000", "--out",
             out.str()}) == 0);
  const std::string report = slurp(out.path / "metric_report.json");
  CHECK(report.find("\"e_p\"") != std::string::npos);
  CHECK(fs::exists(out.path / "flow_density.csv"));
  CHECK(fs::exists(out.path / "flow_density.pgm"));

  // Missing checkpoint is a configuration error (exit 2), not a crash.
  CHECK(run({"eval", "--checkpoint", "/tmp/wgs_no_such_checkpoint.json",
             "--problem", "example1", "--out", out.str()}) == 2);
  // Dimension mismatch is detected up front.
  CHECK(run({"eval", "--checkpoint", (dir.path / "checkpoint_final.json").string(),
             "--problem", "lorenz", "--out", out.str()}) == 2);
}

TEST_CASE("landscape sweep writes the named CSV") {
  TempDir dir("wgs_cli_land");
  CHECK(run({"landscape", "--loss", "wgs", "--axis", "sigma", "--min", "0", "--max",
             "2", "--count", "3", "--n-mc", "2000", "--out", dir.str()}) == 0);
  CHECK(fs::exists(dir.path / "sweep_wgs_sigma_a2_k8.csv"));
  const std::string text = slurp(dir.path / "sweep_wgs_sigma_a2_k8.csv");
  CHECK(text.find("# axis: theta_sigma") != std::string::npos);
  int data_lines = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#' && line.find("theta,") != 0) ++data_lines;
  CHECK(data_lines == 3);
}
