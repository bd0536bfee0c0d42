#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string output;  // stdout + stderr
};

RunResult run(const std::string& args) {
  std::string cmd = std::string(CGCOUPLE_BIN) + " " + args + " 2>&1";
  std::array<char, 512> buf{};
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (fgets(buf.data(), buf.size(), pipe)) r.output += buf.data();
  int status = pclose(pipe);
  r.code = WEXITSTATUS(status);
  return r;
}

fs::path write_config(const std::string& name, const std::string& body) {
  fs::path dir = fs::temp_directory_path() / "cgcouple_cli_tests";
  fs::create_directories(dir);
  fs::path p = dir / name;
  std::ofstream(p) << body;
  return p;
}

fs::path out_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "cgcouple_cli_tests" / name;
  fs::remove_all(dir);
  return dir;
}

int count_lines(const fs::path& p) {
  std::ifstream in(p);
  int n = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++n;
  return n;
}

const char* kSmallSolve = R"(
[model]
n_atoms = 128

[method]
name = galerkin

[force]
kind = point
position = 0.75

[partition]
kind = left_continuum
split = 0.5
mesh = uniform
stride = 8
)";

}  // namespace

TEST_CASE("missing subcommand and bad flags exit with code 2") {
  CHECK(run("").code == 2);
  CHECK(run("frobnicate --config x").code == 2);
  CHECK(run("solve").code == 2);  // --config is required
}

TEST_CASE("nonexistent config exits 2 with a diagnostic") {
  RunResult r = run("solve --config /nonexistent/path.cfg");
  CHECK(r.code == 2);
  CHECK(r.output.find("config") != std::string::npos);
}

TEST_CASE("unknown keys are rejected with file and line") {
  fs::path cfg = write_config("unknown_key.cfg", R"(
[model]
n_atoms = 128
typo_key = 1
)");
  RunResult r = run("solve --config " + cfg.string());
  CHECK(r.code == 2);
  CHECK(r.output.find("unknown_key.cfg:4") != std::string::npos);
  CHECK(r.output.find("typo_key") != std::string::npos);
}

TEST_CASE("malformed lines are rejected with their line number") {
  fs::path cfg = write_config("malformed.cfg", R"(
[model]
n_atoms equals 128
)");
  RunResult r = run("solve --config " + cfg.string());
  CHECK(r.code == 2);
  CHECK(r.output.find("malformed.cfg:3") != std::string::npos);
}

TEST_CASE("solve writes solution and error tables and exits 0") {
  fs::path cfg = write_config("solve.cfg", kSmallSolve);
  fs::path out = out_dir("solve_out");
  RunResult r = run("solve --config " + cfg.string() + " --out " +
                    out.string());
  CHECK(r.code == 0);
  CHECK(r.output.find("method=galerkin") != std::string::npos);
  CHECK(count_lines(out / "solution.csv") == 129);  // header + one per atom
  CHECK(count_lines(out / "error.csv") == 129);
  std::ifstream in(out / "solution.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "atom,x,u");
}

TEST_CASE("csv values carry 17 significant digits") {
  fs::path cfg = write_config("solve.cfg", kSmallSolve);
  fs::path out = out_dir("digits_out");
  REQUIRE(run("solve --config " + cfg.string() + " --out " + out.string())
              .code == 0);
  std::ifstream in(out / "solution.csv");
  std::string line;
  std::getline(in, line);  // header
  bool found_long = false;
  while (std::getline(in, line)) {
    auto last = line.rfind(',');
    std::string u = line.substr(last + 1);
    if (u.size() >= 17) found_long = true;
  }
  CHECK(found_long);
}

TEST_CASE("a diverging solve exits 3") {
  fs::path cfg = write_config("diverge.cfg", R"(
[model]
n_atoms = 64
potential = lennard_jones

[method]
name = atomistic

[force]
kind = point
position = 0.5
magnitude = 1e9
)");
  RunResult r = run("solve --config " + cfg.string() + " --out " +
                    out_dir("diverge_out").string());
  CHECK(r.code == 3);
  CHECK(r.output.find("solver failure") != std::string::npos);
}

TEST_CASE("converge emits the study table with rate footers") {
  fs::path cfg = write_config("converge.cfg", R"(
[model]
n_atoms = 128

[study]
n_list = 64,128,256
methods = galerkin,qnl

[force]
kind = full_sine

[partition]
kind = left_continuum
split = 0.5
mesh = uniform
stride = 4
)");
  fs::path out = out_dir("converge_out");
  RunResult r = run("converge --config " + cfg.string() + " --out " +
                    out.string() + " --jobs 2");
  CHECK(r.code == 0);
  std::ifstream in(out / "study.csv");
  REQUIRE(in.good());
  std::string all((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  CHECK(all.find("n_atoms,epsilon,w11") != std::string::npos);
  CHECK(all.find("galerkin") != std::string::npos);
  CHECK(all.find("qnl") != std::string::npos);
  CHECK(all.find(":rate") != std::string::npos);
  CHECK(all.find(":prefactor") != std::string::npos);
}

TEST_CASE("bifurcate writes the documented columns") {
  fs::path cfg = write_config("bif.cfg", R"(
[model]
n_atoms = 64

[crack]
enabled = true
k2 = 20.0

[bifurcate]
steps = 6
load_lo = 1.0
load_hi = 50.0
methods = atomistic

[partition]
kind = left_continuum
split = 0.25
mesh = graded
)");
  fs::path out = out_dir("bif_out");
  RunResult r = run("bifurcate --config " + cfg.string() + " --out " +
                    out.string());
  CHECK(r.code == 0);
  std::ifstream in(out / "bifurcation.csv");
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "P,u_1,u_n,min_eigenvalue,stable_flag,method_tag");
}

TEST_CASE("compare joins methods into one table") {
  fs::path cfg = write_config("compare.cfg", R"(
[model]
n_atoms = 128

[compare]
methods = galerkin,qnl,force_based

[force]
kind = point
position = 0.75

[partition]
kind = left_continuum
split = 0.5
mesh = uniform
stride = 4
)");
  fs::path out = out_dir("compare_out");
  RunResult r = run("compare --config " + cfg.string() + " --out " +
                    out.string());
  CHECK(r.code == 0);
  std::ifstream in(out / "compare.csv");
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "method_tag,dofs,w11,h1,w1inf");
  CHECK(count_lines(out / "compare.csv") == 4);
}

TEST_CASE("every shipped experiment config validates") {
  int checked = 0;
  for (const auto& entry : fs::directory_iterator(EXPERIMENTS_DIR)) {
    if (entry.path().extension() != ".cfg") continue;
    RunResult r = run("check --config " + entry.path().string());
    INFO(entry.path().string(), ": ", r.output);
    CHECK(r.code == 0);
    ++checked;
  }
  CHECK(checked >= 10);
}
