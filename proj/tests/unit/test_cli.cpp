#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hjbd/cli.hpp"
#include "hjbd/tv_imaging.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = hjbd::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("hjbd_cli_" + std::to_string(::getpid()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const char* name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("pm-estimate of the l1 prior approaches the soft threshold") {
  const Run r = run({"pm-estimate", "--prior", R"({"kind":"WeightedL1","lambda":[2]})", "--x", "5", "--t", "1.25",
                     "--eps", "0.025"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["u_pm"][0].get<double>() == doctest::Approx(2.5).epsilon(1e-6));
  CHECK(j["mse"].get<double>() == doctest::Approx(1.25 * 0.025).epsilon(1e-6));
}

TEST_CASE("pm-estimate methods agree for the quadratic prior") {
  const std::vector<std::string> base{"pm-estimate", "--prior", R"({"kind":"Quadratic","m":1})", "--x", "2,-4",
                                      "--t", "1", "--eps", "1"};
  auto closed = base, quad = base;
  closed.insert(closed.end(), {"--method", "closed"});
  quad.insert(quad.end(), {"--method", "quadrature"});
  const Run a = run(closed), b = run(quad);
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  const json ja = json::parse(a.out), jb = json::parse(b.out);
  CHECK(ja["u_pm"][0].get<double>() == 1.0);
  CHECK(ja["u_pm"][1].get<double>() == -2.0);
  CHECK(jb["u_pm"][1].get<double>() == doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(jb["mse"].get<double>() == doctest::Approx(ja["mse"].get<double>()).epsilon(1e-9));
  CHECK(ja["mse"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("pm-estimate with eps 0 and map-estimate return the MAP point") {
  const Run pm = run({"pm-estimate", "--prior", R"({"kind":"WeightedL1","lambda":2})", "--x", "5", "--t", "1.25",
                      "--eps", "0"});
  REQUIRE(pm.code == 0);
  CHECK(json::parse(pm.out)["u_pm"][0].get<double>() == 2.5);
  const Run map = run({"map-estimate", "--prior", R"({"kind":"Quadratic","m":1,"dim":2})", "--x", "2,-4", "--t", "1"});
  REQUIRE(map.code == 0);
  const json j = json::parse(map.out);
  CHECK(j["u_map"] == json::array({1.0, -2.0}));
  CHECK(j["s_0"].get<double>() == doctest::Approx(5.0));
}

TEST_CASE("validation errors exit with 1") {
  CHECK(run({"pm-estimate", "--prior", R"({"kind":"Zero"})", "--x", "1", "--t", "1", "--eps", "1", "--bogus"}).code == 1);
  CHECK(run({"pm-estimate", "--x", "1", "--t", "1", "--eps", "1"}).code == 1);
  CHECK(run({"pm-estimate", "--prior", "{not json", "--x", "1", "--t", "1", "--eps", "1"}).code == 1);
  CHECK(run({"pm-estimate", "--prior", R"({"kind":"Zero"})", "--x", "1", "--t", "-1", "--eps", "1"}).code == 1);
  CHECK(run({"verify", "--suite", "nope"}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({}).code == 1);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"metrics", "/nonexistent/a.pgm", "/nonexistent/b.pgm"}).code == 1);
}

TEST_CASE("noise, denoising and metrics round trip") {
  TempDir dir;
  const Run nz = run({"noise", dir / "noisy.pgm", "--pattern", "16x16", "--sigma", "20", "--seed", "5"});
  REQUIRE(nz.code == 0);
  CHECK(json::parse(nz.out)["width"] == 16);
  const hjbd::Image noisy = hjbd::read_pgm(dir / "noisy.pgm");
  CHECK(noisy.width == 16);
  // same seed, same file
  REQUIRE(run({"noise", dir / "again.pgm", "--pattern", "16x16", "--sigma", "20", "--seed", "5"}).code == 0);
  CHECK(hjbd::read_pgm(dir / "again.pgm") == noisy);

  const Run dmap = run({"denoise-map", dir / "noisy.pgm", dir / "map.pgm", "--t", "20", "--lambda", "1", "--report",
                        dir / "map.json"});
  REQUIRE(dmap.code == 0);
  const json mrep = read_json(dir / "map.json");
  CHECK(mrep["converged"] == true);

  const Run dpm = run({"denoise-pm", dir / "noisy.pgm", dir / "pm.pgm", "--t", "20", "--eps", "20", "--lambda", "1",
                       "--seed", "3", "--sweeps", "1500", "--burn-in", "300", "--report", dir / "pm.json"});
  REQUIRE(dpm.code == 0);
  const json prep = read_json(dir / "pm.json");
  CHECK(prep["rhat_max"].get<double>() <= 1.1);

  const Run met = run({"metrics", dir / "pm.pgm", dir / "noisy.pgm"});
  REQUIRE(met.code == 0);
  CHECK(json::parse(met.out)["psnr"].get<double>() == doctest::Approx(prep["psnr_vs_input"].get<double>()));
  const Run met_map = run({"metrics", dir / "map.pgm", dir / "noisy.pgm"});
  CHECK(json::parse(met_map.out)["psnr"].get<double>() == doctest::Approx(mrep["psnr_vs_input"].get<double>()));
}

TEST_CASE("unconverged MAP solve exits with 2 and still writes the report") {
  TempDir dir;
  REQUIRE(run({"noise", dir / "n.pgm", "--pattern", "16x16", "--sigma", "20", "--seed", "1"}).code == 0);
  const Run r = run({"denoise-map", dir / "n.pgm", dir / "m.pgm", "--t", "20", "--lambda", "1", "--max-iter", "2",
                     "--report", dir / "m.json"});
  CHECK(r.code == 2);
  CHECK(read_json(dir / "m.json")["converged"] == false);
  CHECK(fs::exists(dir / "m.pgm"));
}

TEST_CASE("example prints the closed-form table") {
  const Run table = run({"example", "--t", "1.25", "--eps", "0.5", "--lambda", "2", "--m", "1"});
  REQUIRE(table.code == 0);
  CHECK(table.out.find("l1_pm") != std::string::npos);
  const Run js = run({"example", "--t", "1", "--eps", "1", "--lambda", "2", "--m", "1", "--x", "0,3", "--json"});
  REQUIRE(js.code == 0);
  const json rows = json::parse(js.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1]["tikhonov_u_pm"].get<double>() == 1.5);
  CHECK(rows[1]["tikhonov_mse"].get<double>() == 0.5);
  CHECK(rows[0]["l1_u_pm"].get<double>() == 0.0);
}

TEST_CASE("verify runs the core suite") {
  TempDir dir;
  const Run r = run({"verify", "--suite", "core", "--seed", "7", "--out", dir / "core.json"});
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("PASS") != std::string::npos);
  const json j = read_json(dir / "core.json");
  CHECK(j["seed"] == 7);
  for (const json& c : j["checks"]) CHECK(c["passed"] == true);
}
