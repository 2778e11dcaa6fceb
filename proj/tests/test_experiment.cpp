#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "kuramoto/error.hpp"
#include "kuramoto/experiment.hpp"

using namespace kuramoto;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("kuramoto_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ConfigError);
    return e.what();
  }
  FAIL("no error for: " << text);
  return "";
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

const char* kMinimal = R"({
  "model": {"n": 4, "kappa": 1.0, "mass": 1.0, "friction": 1.0},
  "integrator": {"dt": 0.01, "t_final": 1.0}
})";

}  // namespace

TEST_CASE("minimal config resolves with documented defaults") {
  const auto c = parse_config(kMinimal);
  CHECK(c.kind == ExperimentKind::Single);
  CHECK(c.params.size() == 4);
  CHECK(c.params.variant() == ModelVariant::HomogeneousAllToAll);
  CHECK(c.params.natural_freqs()[2] == 0.0);
  CHECK(c.integrator.sample_every == 1);
  CHECK(c.integrator.scheme == Scheme::RK4);
  CHECK(c.resolved["init"]["distribution"]["kind"] == "splay");
  CHECK(c.resolved["init"]["distribution"]["span"] == 1.0);
  CHECK(c.resolved["model"]["capacity"] == "all_to_all");
  CHECK(c.resolved["analyses"]["sync"]["tol_freq"] == 1e-6);
  CHECK(c.analyses.verdicts.size() == 4);  // T31..T34
  CHECK(c.analyses.tol_angle == 1e-3);
  CHECK(c.init.theta[1] == doctest::Approx(0.25));
  CHECK_FALSE(c.resolved.contains("output"));
  CHECK(c.hash.size() == 16);
}

TEST_CASE("hash ignores output settings and tracks physics") {
  const auto a = parse_config(kMinimal);
  auto doc = json::parse(kMinimal);
  doc["output"] = {{"dir", "/tmp/elsewhere"}};
  CHECK(resolve_config(doc).hash == a.hash);
  doc["model"]["kappa"] = 1.5;
  CHECK(resolve_config(doc).hash != a.hash);
  // formatting of the input does not matter
  CHECK(resolve_config(json::parse(kMinimal)).hash == a.hash);
}

TEST_CASE("schema violations name the field") {
  CHECK(config_error(R"({"model": {"n": 3, "kappa": 1, "bogus": 1}})").find("model.bogus") != std::string::npos);
  CHECK(config_error(R"({"model": {"n": 3, "kappa": 1},
  "extra": 2})").find("line 2") != std::string::npos);
  CHECK(config_error(R"({"model": {"n": 3, "kappa": "x"}})").find("model.kappa") != std::string::npos);
  CHECK(config_error(R"({"model": {"n": 3}})").find("model.kappa") != std::string::npos);
  CHECK(config_error(R"({"model": {"n": 3, "kappa": 1, "mass": [1, 2]}})").find("model.mass") != std::string::npos);
  CHECK(config_error("{\n  \"model\": {\"n\": 3,,}\n}").find("line 2") != std::string::npos);
  CHECK(config_error(R"({"model": {"n": 3, "kappa": 1}, "integrator": {"dt": -1}})").find("integrator") !=
        std::string::npos);
}

TEST_CASE("asymmetric capacity is rejected naming the pair") {
  const auto msg = config_error(R"({"model": {"n": 3, "kappa": 1,
    "capacity": [[0, 0.5, 0.5], [0.5, 0, 0.5], [0.25, 0.5, 0]]}})");
  CHECK(msg.find("model.capacity") != std::string::npos);
  CHECK(msg.find("(0,2)") != std::string::npos);
}

TEST_CASE("random elements demand seeds") {
  CHECK(config_error(R"({"model": {"n": 3, "kappa": 1, "mass": {"uniform": [0.5, 1.5]}}})").find("model.seed") !=
        std::string::npos);
  CHECK(config_error(R"({"model": {"n": 3, "kappa": 1},
    "init": {"distribution": {"kind": "von_mises_gaussian"}}})").find("init.seed") != std::string::npos);
  const auto c = parse_config(R"({"model": {"n": 5, "kappa": 1, "seed": 3, "mass": {"uniform": [0.5, 1.5]},
    "capacity": {"perturbed_uniform": {"a_bar": 0.2, "delta_row": 0.01}}},
    "init": {"distribution": {"kind": "arc_uniform", "halfwidth": 0.3}, "seed": 9}})");
  CHECK(c.params.variant() == ModelVariant::HeterogeneousNetwork);
  for (double m : c.params.masses()) CHECK((m >= 0.5 && m <= 1.5));
  CHECK(capacity_deviation(c.params.capacity(), 0.2) < 0.01);
  // --seed reaches both draws and changes the hash
  const auto d = parse_config(c.source.dump(), Overrides{.seed = 4});
  CHECK(d.params.masses() != c.params.masses());
  CHECK(d.init.theta != c.init.theta);
  CHECK(d.hash != c.hash);
}

TEST_CASE("command-line overrides win") {
  Overrides ov;
  ov.dt = 0.02;
  ov.t_final = 3.0;
  ov.out_dir = "/tmp/x";
  const auto c = parse_config(kMinimal, ov);
  CHECK(c.integrator.dt == 0.02);
  CHECK(c.integrator.t_final == 3.0);
  CHECK(c.out_dir == fs::path("/tmp/x"));
}

TEST_CASE("kappa as a multiple of the critical coupling") {
  const auto c = parse_config(R"({"model": {"n": 2, "kappa_factor_of_critical": 4, "mass": 0.5},
    "init": {"theta": [0, 0], "omega": [1, -1]}})");
  // lhs = (m/N) sum w^2 = 0.5, R = 1
  CHECK(c.params.kappa() == doctest::Approx(2.0));
  CHECK(config_error(R"({"model": {"n": 2, "kappa": 1, "kappa_factor_of_critical": 4}})").find("exactly one") !=
        std::string::npos);
}

TEST_CASE("sweep over kappa expands into ordered children") {
  const auto c = parse_config(R"({"model": {"n": 4, "kappa": 1},
    "integrator": {"dt": 0.01, "t_final": 1},
    "experiment": {"kind": "sweep", "parameter": "kappa", "values": [2, 0.5, 1]}})");
  const auto kids = expand_sweep(c);
  REQUIRE(kids.size() == 3);
  CHECK(kids[0].params.kappa() == 0.5);
  CHECK(kids[1].params.kappa() == 1.0);
  CHECK(kids[2].params.kappa() == 2.0);
  for (const auto& k : kids) CHECK(k.kind == ExperimentKind::Single);
  CHECK(kids[0].hash != kids[1].hash);
  CHECK(config_error(R"({"model": {"n": 4, "kappa": 1},
    "experiment": {"kind": "sweep", "parameter": "gravity", "values": [1]}})").find("experiment.parameter") !=
        std::string::npos);
}

TEST_CASE("kappa sweep flips the T34 verdict at the critical coupling") {
  const std::string base = R"({"model": {"n": 3, "kappa": 1, "mass": 0.5},
    "init": {"theta": [-0.4, 0.1, 0.5], "omega": [0.3, -0.1, -0.2]},
    "integrator": {"dt": 0.01, "t_final": 0.5}, "analyses": {"verdicts": ["T34"]}})";
  const double ks = evaluate_verdicts(parse_config(base))[0].margins.at("kappa_star");
  const std::vector<double> values{0.5 * ks, std::nextafter(ks, 0.0), ks, 1.5 * ks};
  auto doc = json::parse(base);
  doc["experiment"] = {{"kind", "sweep"}, {"parameter", "kappa"}, {"values", values}};
  const auto dir = scratch("flip");
  doc["output"] = {{"dir", dir.string()}};
  CHECK(sweep(resolve_config(doc)) == 0);
  const auto rows = read_csv(dir / "sweep.csv");
  REQUIRE(rows.size() == 5);
  const auto& h = rows[0];
  const auto col = std::find(h.begin(), h.end(), "verdict_T34") - h.begin();
  CHECK(h[0] == "kappa");
  CHECK(rows[1][col] == "0");
  CHECK(rows[2][col] == "0");
  CHECK(rows[3][col] == "1");
  CHECK(rows[4][col] == "1");
}

TEST_CASE("empty sweep writes a header-only CSV") {
  const auto dir = scratch("empty");
  auto doc = json::parse(kMinimal);
  doc["experiment"] = {{"kind", "sweep"}, {"parameter", "kappa"}, {"values", json::array()}};
  doc["output"] = {{"dir", dir.string()}};
  CHECK(sweep(resolve_config(doc)) == 0);
  const auto rows = read_csv(dir / "sweep.csv");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0][0] == "kappa");
}

TEST_CASE("sweep records failing children and continues") {
  const auto dir = scratch("failing");
  auto doc = json::parse(kMinimal);
  doc["experiment"] = {{"kind", "sweep"}, {"parameter", "mass"}, {"values", {-1.0, 1.0}}};
  doc["output"] = {{"dir", dir.string()}};
  CHECK(sweep(resolve_config(doc), 2) == 1);
  const auto rows = read_csv(dir / "sweep.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[1][2] == "error");
  CHECK(rows[2][2] == "ok");
}

TEST_CASE("run writes artifacts deterministically") {
  const std::string text = R"({"model": {"n": 6, "kappa": 2, "mass": 0.5},
    "init": {"distribution": {"kind": "arc_uniform", "halfwidth": 0.5, "omega_halfwidth": 0.1}, "seed": 11,
             "center": "omega"},
    "integrator": {"dt": 0.01, "t_final": 5, "sample_every": 10}})";
  const auto d1 = scratch("det1");
  const auto d2 = scratch("det2");
  const auto c1 = parse_config(text, Overrides{.out_dir = d1.string()});
  const auto c2 = parse_config(text, Overrides{.out_dir = d2.string()});
  CHECK(c1.hash == c2.hash);
  CHECK(run(c1) == 0);
  CHECK(run(c2) == 0);
  CHECK(slurp(d1 / "trajectory.csv") == slurp(d2 / "trajectory.csv"));
  CHECK(slurp(d1 / "summary.csv") == slurp(d2 / "summary.csv"));

  const auto rows = read_csv(d1 / "trajectory.csv");
  CHECK(rows.size() == 1 + 51);
  CHECK(rows[0].size() == 1 + 12 + 7);
  CHECK(rows[0][0] == "t");
  CHECK(rows[0][1] == "theta_0");
  CHECK(rows[0][7] == "omega_0");
  CHECK(rows[0].back() == "F");
  CHECK(rows.back()[0] == "5");

  const auto report = json::parse(slurp(d1 / "report.json"));
  for (const char* key :
       {"config_hash", "verdicts", "sync_time", "classification", "bound_violations", "decay_fits", "timings"}) {
    CHECK(report.contains(key));
  }
  CHECK(report["config_hash"] == c1.hash);

  // the last trajectory row round-trips through the snapshot reader
  const auto s = read_state_csv(d1 / "trajectory.csv");
  Trajectory keep{{}, {}, c1.params};
  run_single(c1, &keep);
  CHECK(s.theta == keep.states.back().theta);
  CHECK(s.omega == keep.states.back().omega);
}

TEST_CASE("splay run stays at zero order parameter") {
  const auto dir = scratch("splay");
  const auto c = parse_config(R"({"model": {"n": 8, "kappa": 1},
    "init": {"distribution": {"kind": "splay"}},
    "integrator": {"dt": 0.01, "t_final": 20, "sample_every": 10}})",
                              Overrides{.out_dir = dir.string()});
  CHECK(run(c) == 0);
  Trajectory keep{{}, {}, c.params};
  const auto rep = run_single(c, &keep);
  REQUIRE(rep.classification);
  CHECK(rep.classification->kind == LockKind::ZeroOrderParameter);
  const auto rows = read_csv(dir / "trajectory.csv");
  const auto col = std::find(rows[0].begin(), rows[0].end(), "R_p") - rows[0].begin();
  for (std::size_t k = 1; k < rows.size(); ++k) CHECK(std::stod(rows[k][col]) <= 1e-8);
}

TEST_CASE("bound violations set exit code 2") {
  // with small inertia the frequencies approach kappa sin(1.5) / (N gamma), well above m kappa
  const auto dir = scratch("violate");
  const auto c = parse_config(R"({"model": {"n": 2, "kappa": 1, "mass": 0.1, "friction": 1},
    "init": {"theta": [0, 1.5], "omega": [0, 0]},
    "integrator": {"dt": 0.01, "t_final": 2},
    "analyses": {"monitors": ["support_bound", "potential_bound"]}})",
                              Overrides{.out_dir = dir.string()});
  CHECK(run(c) == 2);
  const auto report = json::parse(slurp(dir / "report.json"));
  REQUIRE(report["bound_violations"].size() == 1);
  CHECK(report["bound_violations"][0]["monitor"] == "support_bound");
  CHECK(report["bound_violations"][0]["first_time"].get<double>() > 0.0);
}

TEST_CASE("format_double round-trips") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) CHECK(std::stod(format_double(x)) == x);
  CHECK(format_double(INFINITY) == "inf");
  CHECK(format_double(NAN) == "nan");
}
