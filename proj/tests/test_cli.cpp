#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "habitat/error.hpp"
#include "habitat/run_config.hpp"

using namespace habitat;
namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() /
          ("habitat_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  static int& counter() {
    static int n = 0;
    return n;
  }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return dir / name;
  }
};

struct Outcome {
  int status = -1;
  std::string stderr_text;
};

Outcome run_cli(const Scratch& s, const std::string& args) {
  const fs::path err = s.dir / "stderr.txt";
  const std::string cmd = std::string(HABITAT_CLI_PATH) + " " + args + " 2> " + err.string();
  const int raw = std::system(cmd.c_str());
  Outcome out;
  out.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(err);
  std::stringstream text;
  text << in.rdbuf();
  out.stderr_text = text.str();
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream text;
  text << in.rdbuf();
  return text.str();
}

const char* kSweep = R"({
  "command": "sweep",
  "domain": {"type": "disk", "radius": 1},
  "beta": 1,
  "delta_grid": [0.3, 0.2, 0.15],
  "mesh_resolution": 0.05,
  "n_starts": 2,
  "seed": 4
})";

}  // namespace

TEST_CASE("limit command") {
  Scratch s;
  const fs::path cfg = s.write("limit.json", R"({"command": "limit", "beta": 1, "dim": 2})");
  const Outcome r = run_cli(s, "--config " + cfg.string() + " --output " + (s.dir / "out").string());
  REQUIRE(r.status == 0);
  const auto doc = nlohmann::json::parse(slurp(s.dir / "out" / "limit.json"));
  for (const char* key : {"beta", "dim", "I", "r2", "gamma", "gamma1", "Gamma",
                          "grad_sq_halfspace", "mw2_halfspace", "identity_residual"}) {
    CHECK(doc.contains(key));
  }
  CHECK(std::abs(doc["identity_residual"].get<double>()) <= 1e-6);
  CHECK(doc["I"].get<double>() == doctest::Approx(4.095138566182804).epsilon(1e-12));
}

TEST_CASE("inadmissible delta writes nothing") {
  Scratch s;
  const fs::path cfg = s.write("bad.json", R"({"command": "solve", "delta": 1.6,
      "domain": {"type": "disk", "radius": 1}})");
  const fs::path out = s.dir / "out";
  const Outcome r = run_cli(s, "--config " + cfg.string() + " --output " + out.string());
  CHECK(r.status == exit_status(ErrorCode::kNegativeAverageViolated));
  CHECK(r.stderr_text.rfind("error NegativeAverageViolated:", 0) == 0);
  CHECK(std::count(r.stderr_text.begin(), r.stderr_text.end(), '\n') == 1);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(parse_run_config("{"), Error);
  const auto code = [](const std::string& text) {
    try {
      parse_run_config(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIoError;
  };
  CHECK(code(R"({"command": "limit", "colour": 1})") == ErrorCode::kInvalidConfig);
  CHECK(code(R"({"command": "fly"})") == ErrorCode::kInvalidConfig);
  CHECK(code(R"({"command": "limit", "beta": -1})") == ErrorCode::kInvalidConfig);
  CHECK(code(R"({"command": "solve"})") == ErrorCode::kInvalidConfig);
  CHECK(code(R"({"command": "sweep", "delta_grid": [0.01, 0.02, 0.005]})") ==
        ErrorCode::kInvalidConfig);
  CHECK(code(R"({"command": "sweep", "delta_grid": [0.04, 0.02, 0.01],
                 "domain": {"type": "ellipse", "a": 0.1, "b": 0.1}})") ==
        ErrorCode::kNegativeAverageViolated);
  CHECK(code(R"({"command": "solve", "delta": 0.1, "solver": {"linear_solver": "lu"}})") ==
        ErrorCode::kInvalidConfig);

  const RunConfig c = parse_run_config(R"({"command": "solve", "delta": 0.1, "seed": 12,
      "domain": {"center": [0.1, 0], "fourier_cos": [1, 0, 0.1]},
      "solver": {"linear_solver": "cg", "rearrangement": "closest", "rel_tol": 1e-6}})");
  CHECK(c.domain.type == "fourier");
  CHECK(c.seed == 12);
  CHECK(c.optimizer.solver.linear_solver == LinearSolver::kConjugateGradient);
  CHECK(c.optimizer.rule == Rearrangement::kClosestMeasure);
  CHECK(c.optimizer.rel_tol == 1e-6);
  CHECK(c.domain.build().center().x() == 0.1);
}

TEST_CASE("solve command") {
  Scratch s;
  const fs::path cfg = s.write("solve.json", R"({"command": "solve", "delta": 0.1,
      "domain": {"type": "disk", "radius": 1}, "mesh_resolution": 0.04, "n_starts": 2})");
  const fs::path out = s.dir / "out";
  REQUIRE(run_cli(s, "--config " + cfg.string() + " --output " + out.string()).status == 0);
  const auto sol = nlohmann::json::parse(slurp(out / "solution.json"));
  CHECK(sol["lambda"].get<double>() > 0.0);
  CHECK(sol["result"]["eigenfunction"].size() == sol["mesh_vertices"].get<std::size_t>());
  CHECK(!sol["result"]["set"]["cells"].empty());
  const auto st = nlohmann::json::parse(slurp(out / "structure.json"));
  CHECK(st.contains("peak"));
  CHECK(st.contains("near_sphere"));
  CHECK(st["peak"]["P_delta"]["curvature"].get<double>() == doctest::Approx(1.0));
  const std::string mesh = slurp(out / "mesh.txt");
  CHECK(mesh.rfind("v ", 0) == 0);

  // Outputs are write-once.
  const std::string before = slurp(out / "solution.json");
  const Outcome again = run_cli(s, "--config " + cfg.string() + " --output " + out.string());
  CHECK(again.status == exit_status(ErrorCode::kOutputExists));
  CHECK(again.stderr_text.rfind("error OutputExists:", 0) == 0);
  REQUIRE(run_cli(s, "--config " + cfg.string() + " --output " + out.string() + " --overwrite")
              .status == 0);
  CHECK(slurp(out / "solution.json") == before);
}

TEST_CASE("sweep command is byte-reproducible") {
  Scratch s;
  const fs::path cfg = s.write("sweep.json", kSweep);
  const fs::path a = s.dir / "a";
  const fs::path b = s.dir / "b";
  REQUIRE(run_cli(s, "--config " + cfg.string() + " --output " + a.string()).status == 0);
  REQUIRE(run_cli(s, "--config " + cfg.string() + " --output " + b.string() + " --threads 0")
              .status == 0);
  for (const char* name : {"sweep.csv", "summary.json", "rows.json"}) {
    CAPTURE(name);
    CHECK(slurp(a / name) == slurp(b / name));
  }
  const std::string csv = slurp(a / "sweep.csv");
  CHECK(csv.rfind("delta,Lambda,scaled_Lambda,P_delta,Q_delta,H_at_P,rho_l2,rho_sup,decay_rate,"
                  "connected,annulus_ok\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  const auto summary = nlohmann::json::parse(slurp(a / "summary.json"));
  std::vector<std::string> keys;
  for (const auto& item : summary.items()) keys.push_back(item.key());
  std::sort(keys.begin(), keys.end());
  CHECK(keys == std::vector<std::string>{"Gamma", "H_hat", "I", "fit_residual", "fitted_I",
                                         "fitted_slope", "predicted_slope", "seed"});
  CHECK(summary["seed"].get<int>() == 4);
}

TEST_CASE("missing config file") {
  Scratch s;
  const Outcome r = run_cli(s, "--config " + (s.dir / "nope.json").string());
  CHECK(r.status == exit_status(ErrorCode::kIoError));
}

TEST_CASE("JSON writer") {
  JsonWriter w;
  w.begin_object()
      .field("a", 0.1)
      .field("b", std::nan(""))
      .field("s", std::string("q\"\n"))
      .key("v")
      .array(std::vector<double>{1.0, 2.5})
      .key("e")
      .begin_array()
      .end_array()
      .end_object();
  const auto doc = nlohmann::json::parse(w.str());
  CHECK(doc["a"].get<double>() == 0.1);
  CHECK(doc["b"].is_null());
  CHECK(doc["s"].get<std::string>() == "q\"\n");
  CHECK(doc["v"][1].get<double>() == 2.5);
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
