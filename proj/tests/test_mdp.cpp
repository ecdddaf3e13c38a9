#include <doctest.h>

#include <algorithm>
#include <vector>

#include "infostab/error.hpp"
#include "infostab/mdp.hpp"

using namespace infostab;
using doctest::Approx;

namespace {
SystemConfig strict_config(double rho1 = 0.5, double rho2 = 0.5) {
  return SystemConfig(0.5, ServerParams(from_gamma_rho(0.5, rho1), 0.2, 0.8),
                      ServerParams(from_gamma_rho(0.5, rho2), 0.15, 0.85));
}
SolveOptions opts(std::size_t cells) {
  SolveOptions o;
  o.cells = cells;
  return o;
}
}  // namespace

TEST_CASE("one backup from zero values is myopic") {
  const auto c = strict_config(0.6, 0.3);
  const BeliefGrid g{40};
  const std::vector<double> zero(g.size(), 0.0);
  for (auto s : {ObservationScheme::state, ObservationScheme::output, ObservationScheme::queue}) {
    const auto b = bellman_backup(s, g, zero, c);
    for (std::size_t i = 0; i < g.cells; ++i)
      for (std::size_t j = 0; j < g.cells; ++j) {
        const std::size_t k = i * g.cells + j;
        CHECK(b.value1[k] == Approx(success_prob(g.center(i), c.server1)).epsilon(1e-14));
        CHECK(b.value2[k] == Approx(success_prob(g.center(j), c.server2)).epsilon(1e-14));
        const bool two = b.value2[k] > b.value1[k];
        const bool myopic = success_prob(g.center(j), c.server2) > success_prob(g.center(i), c.server1);
        CHECK(two == myopic);
      }
  }
}

TEST_CASE("unsupported schemes") {
  const BeliefGrid g{4};
  const std::vector<double> h(g.size(), 0.0);
  const auto c = benchmark_config(0.5, 0.5);
  CHECK_THROWS_AS(bellman_backup(ObservationScheme::full, g, h, c), ContractError);
  CHECK_THROWS_AS(solve_rvi(ObservationScheme::none, c, opts(4)), ContractError);
}

TEST_CASE("solver output") {
  const auto c = benchmark_config(0.4, 0.4);
  const auto t = solve_rvi(ObservationScheme::output, c, opts(200));
  CHECK(t.mu_star == Approx(0.5359).epsilon(0.002 / 0.5359));
  CHECK(t.residual_span < t.tol);
  CHECK(t.value(t.reference1, t.reference2) == 0.0);
  CHECK(t.reference1 == t.grid.cell_of(0.5));
  CHECK(t.span_history.size() == static_cast<std::size_t>(t.iterations));

  SUBCASE("identical servers: the curve is the diagonal") {
    const auto curve = extract_switching_curve(t);
    // Inside the belief space the optimal policy is the symmetric myopic one.
    const auto omega = belief_space(c.server1);
    for (std::size_t i = t.grid.cell_of(omega.lo) + 1; i + 1 < t.grid.cell_of(omega.hi); ++i) {
      CAPTURE(i);
      CHECK(curve.thresholds[i] + 1 >= i);
      CHECK(curve.thresholds[i] <= i + 1);
    }
  }
}

TEST_CASE("non-convergence is reported with the span") {
  SolveOptions o = opts(30);
  o.max_iters = 2;
  try {
    solve_rvi(ObservationScheme::output, benchmark_config(0.8, 0.8), o);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.iterations() == 2);
    CHECK(e.residual() > o.tol);
  }
}

TEST_CASE("strict ordering: corners and curve ends") {
  const auto c = strict_config(0.6, 0.4);
  for (auto s : {ObservationScheme::state, ObservationScheme::output, ObservationScheme::queue}) {
    CAPTURE(to_string(s));
    const auto t = solve_rvi(s, c, opts(200));
    const auto low = action_values_at(s, t.grid, t.h, c, {0.0, 0.0});
    const auto high = action_values_at(s, t.grid, t.h, c, {1.0, 1.0});
    CHECK(low.server1 > low.server2);
    CHECK(high.server2 > high.server1);
    // At (0, 0) server 1 earns mu0(1) and both beliefs move to p.
    const double p1 = c.server1.chain.p(), p2 = c.server2.chain.p();
    CHECK(low.server1 == Approx(c.server1.mu0 + interpolate(t.grid, t.h, {p1, p2})).epsilon(1e-12));
    CHECK(t.action(0, 0) == Server::one);
    CHECK(t.action(199, 199) == Server::two);
    const auto curve = extract_switching_curve(t);
    CHECK(curve.thresholds.front() > 0);
    CHECK(curve.thresholds.back() < curve.resolution);
  }
}

TEST_CASE("information ordering and memory") {
  const auto so = opts(100);
  std::vector<double> last(3, 0.0);
  for (double rho : {0.2, 0.4, 0.6, 0.8}) {
    const auto c = benchmark_config(rho, 0.5);
    const double st = solve_rvi(ObservationScheme::state, c, so).mu_star;
    const double out = solve_rvi(ObservationScheme::output, c, so).mu_star;
    const double q = solve_rvi(ObservationScheme::queue, c, so).mu_star;
    const double slack = 2 * so.tol;
    CHECK(mu_star_no(c) <= q + slack);
    CHECK(q <= out + slack);
    CHECK(out <= st + slack);
    CHECK(st <= mu_star_full(c) + slack);
    CHECK(st >= last[0] - slack);
    CHECK(out >= last[1] - slack);
    CHECK(q >= last[2] - slack);
    last = {st, out, q};
  }
}

TEST_CASE("queue observation at the extreme arrival rates") {
  const auto rep = scheme_iv_limit_check(benchmark_config(0.6, 0.5), opts(100));
  CHECK(rep.max_mu_difference < 2e-4);
  CHECK(std::abs(rep.mu_queue_lambda0 - rep.mu_output) < 2e-4);
  CHECK(std::abs(rep.mu_queue_lambda1 - rep.mu_output) < 2e-4);
  // At lambda = 0.5 information is lost.
  const double mid = solve_rvi(ObservationScheme::queue, benchmark_config(0.6, 0.5), opts(100)).mu_star;
  CHECK(rep.mu_output - mid > 0.01);
}

TEST_CASE("sandwich property") {
  const auto c = benchmark_config(0.5, 0.7);
  const auto so = opts(200);
  const auto out = extract_switching_curve(solve_rvi(ObservationScheme::output, c, so));
  const auto st = extract_switching_curve(solve_rvi(ObservationScheme::state, c, so));
  const auto my = myopic_curve(c, 200);
  CHECK(sandwich_fraction(out, st, my, 1) >= 0.95);
  CHECK(sandwich_fraction(my, my, my) == 1.0);
}

TEST_CASE("interpolation") {
  const BeliefGrid g{3};
  std::vector<double> h(9);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) h[i * 3 + j] = 2.0 * g.center(i) + g.center(j);
  CHECK(interpolate(g, h, {0.5, 0.5}) == Approx(1.5));
  CHECK(interpolate(g, h, {0.4, 0.3}) == Approx(1.1));
  // Clamped outside the outermost centres.
  CHECK(interpolate(g, h, {0.0, 1.0}) == Approx(2.0 / 6.0 + 5.0 / 6.0));
}
