#include <doctest.h>

#include <sstream>

#include "infostab/error.hpp"
#include "infostab/io.hpp"

using namespace infostab;
using nlohmann::json;
using doctest::Approx;

TEST_CASE("config documents") {
  const auto gr = config_from_json(json::parse(R"({
    "lambda": 0.3,
    "server1": {"gamma": 0.5, "rho": 0.6, "mu0": 0.2, "mu1": 0.8},
    "server2": {"p": 0.1, "q": 0.3, "mu0": 0.1, "mu1": 0.9}})"));
  CHECK(gr.system.lambda == 0.3);
  CHECK(gr.system.server1.chain.p() == Approx(0.2));
  CHECK(gr.system.server2.chain.q() == Approx(0.3));
  CHECK_FALSE(gr.initial_belief.has_value());

  const auto frozen = config_from_json(json::parse(R"({
    "server1": {"gamma": 0.3, "rho": 1.0, "mu0": 0.2, "mu1": 0.8},
    "server2": {"gamma": 0.6, "rho": 1.0, "mu0": 0.2, "mu1": 0.8}})"));
  REQUIRE(frozen.initial_belief.has_value());
  CHECK((*frozen.initial_belief)[0] == 0.3);
  CHECK(frozen.system.lambda == 0.5);

  const auto explicit_init = config_from_json(json::parse(R"({
    "initial_belief": [0.1, 0.9],
    "server1": {"p": 0, "q": 0, "mu0": 0.2, "mu1": 0.8},
    "server2": {"p": 0, "q": 0, "mu0": 0.2, "mu1": 0.8}})"));
  CHECK((*explicit_init.initial_belief)[1] == 0.9);

  CHECK_THROWS_AS(config_from_json(json::parse(R"({
    "server1": {"gamma": 0.5, "rho": 0.6, "p": 0.1, "mu0": 0.2, "mu1": 0.8},
    "server2": {"p": 0.1, "q": 0.3, "mu0": 0.1, "mu1": 0.9}})")),
                  ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({
    "server1": {"mu0": 0.2, "mu1": 0.8},
    "server2": {"p": 0.1, "q": 0.3, "mu0": 0.1, "mu1": 0.9}})")),
                  ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"server1": {}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({
    "server1": {"gamma": 0.5, "rho": 0.6, "mu0": 0.1, "mu1": 0.8},
    "server2": {"gamma": 0.5, "rho": 0.6, "mu0": 0.2, "mu1": 0.8}})")),
                  ConfigError);
  CHECK_NOTHROW(config_from_json(json::parse(R"({
    "allow_unordered": true,
    "server1": {"gamma": 0.5, "rho": 0.6, "mu0": 0.1, "mu1": 0.8},
    "server2": {"gamma": 0.5, "rho": 0.6, "mu0": 0.2, "mu1": 0.8}})")));
  CHECK_THROWS_AS(config_from_json(json::parse(R"({
    "server1": {"gamma": 0.5, "rho": 3, "mu0": 0.2, "mu1": 0.8},
    "server2": {"gamma": 0.5, "rho": 0.6, "mu0": 0.2, "mu1": 0.8}})")),
                  ConfigError);

  try {
    load_config("/nonexistent/dir/config.json");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/dir/config.json") != std::string::npos);
  }

  const auto back = config_from_json(config_to_json(gr.system));
  CHECK(back.system.server1.chain.p() == gr.system.server1.chain.p());
  CHECK(back.system.server2.mu1 == gr.system.server2.mu1);
}

TEST_CASE("controller documents") {
  const auto c = benchmark_config(0.6, 0.3);
  const auto fc = FiniteController::build(c, myopic_control_matrix(5), 0.01);
  const auto doc = controller_to_json(fc);
  for (const char* key : {"M", "epsilon", "C", "N1", "S1", "F1", "N2", "S2", "F2"}) CHECK(doc.contains(key));
  const auto back = controller_from_json(json::parse(doc.dump()));
  CHECK(back.resolution == 5);
  CHECK(back.control == fc.control);
  for (int k = 0; k < 2; ++k) {
    CHECK(max_abs_diff(back.S[k].to_dense(), fc.S[k].to_dense()) < 1e-15);
    CHECK(max_abs_diff(back.N[k].to_dense(), fc.N[k].to_dense()) < 1e-15);
  }

  auto broken = doc;
  broken["S2"][0][0] = 5.0;
  CHECK_THROWS_AS(controller_from_json(broken), ConfigError);
  auto missing = doc;
  missing.erase("F1");
  CHECK_THROWS_AS(controller_from_json(missing), ConfigError);
  auto shape = doc;
  shape["C"].erase(0);
  CHECK_THROWS_AS(controller_from_json(shape), ConfigError);
  CHECK_THROWS_AS(controller_from_json(json::parse(R"({"M": 0})")), ConfigError);
}

TEST_CASE("curve documents") {
  const auto curve = myopic_curve(benchmark_config(0.5, 0.5), 6);
  const auto back = curve_from_json(curve_to_json(curve));
  CHECK(back.thresholds == curve.thresholds);
  CHECK(back.tie_value == curve.tie_value);
  CHECK_THROWS_AS(curve_from_json(json::parse(R"({"resolution": 3, "thresholds": [0, 1]})")), ConfigError);
}

TEST_CASE("writers") {
  CHECK(format6(0.58146312) == "0.581463");
  CHECK(format6(1.0) == "1");

  DenseMatrix m(2, 2);
  m(0, 1) = 0.25;
  m(1, 0) = 1.0 / 3.0;
  std::ostringstream os;
  write_triplets_csv(os, m);
  CHECK(os.str() == "# infostab triplets v1 rows=2 cols=2\nrow,col,value\n0,1,0.25\n1,0,0.333333\n");

  StabilityResult r;
  r.mu_star = 0.5;
  r.resolution = 7;
  const auto j = stability_summary(r);
  for (const char* key : {"M", "epsilon", "mu_star", "residual", "iterations"}) CHECK(j.contains(key));

  ValueTable t;
  t.grid = BeliefGrid{2};
  t.h = {0.0, 1.0, 2.0, 3.0};
  t.server2 = {false, true, false, true};
  std::ostringstream vt;
  write_value_table_csv(vt, t);
  CHECK(vt.str().find("omega1,omega2,h,action\n0.25,0.25,0,1\n0.25,0.75,1,2\n") != std::string::npos);
  const auto s = value_table_summary(t);
  for (const char* key : {"scheme", "mu_star", "iterations", "span", "M_cells", "tol"}) CHECK(s.contains(key));
}
