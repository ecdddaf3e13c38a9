#include <doctest.h>

#include <random>
#include <vector>

#include "infostab/belief.hpp"
#include "infostab/error.hpp"
#include "infostab/filter_oracle.hpp"

using namespace infostab;
using doctest::Approx;

namespace {
const ServerParams& bench() {
  static const auto c = benchmark_config(0.5, 0.5);
  return c.server1;
}
}  // namespace

TEST_CASE("believed success probability") {
  CHECK(success_prob(0.0, bench()) == Approx(0.2));
  CHECK(success_prob(1.0, bench()) == Approx(0.8));
  CHECK(success_prob(0.5, bench()) == Approx(0.5));
  CHECK(success_prob(0.3, bench()) <= success_prob(0.7, bench()));
}

TEST_CASE("belief operators") {
  const auto& s = bench();
  SUBCASE("endpoints") {
    for (auto f : {tau_n, tau_f, tau_s}) {
      CHECK(f(0.0, s) == Approx(s.chain.p()).epsilon(1e-14));
      CHECK(f(1.0, s) == Approx(1.0 - s.chain.q()).epsilon(1e-14));
    }
  }
  SUBCASE("benchmark values") {
    CHECK(tau_f(0.5, s) == Approx(0.35).epsilon(1e-14));
    CHECK(tau_s(0.5, s) == Approx(0.65).epsilon(1e-14));
    CHECK(tau_n(0.5, s) == Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("tau_n fixes gamma") {
    for (double g : {0.1, 0.5, 0.77}) {
      const ServerParams sp(from_gamma_rho(g, 0.4), 0.3, 0.6);
      CHECK(tau_n(g, sp) == Approx(g).epsilon(1e-14));
    }
  }
  SUBCASE("queue operator endpoints in lambda") {
    for (double w : {0.0, 0.2, 0.5, 0.9, 1.0})
      for (auto rule : {QueueUpdate::mixture, QueueUpdate::bayes}) {
        CHECK(tau_c(w, s, 0.0, rule) == Approx(tau_f(w, s)).epsilon(1e-14));
        CHECK(tau_c(w, s, 1.0, rule) == Approx(tau_s(w, s)).epsilon(1e-14));
      }
    CHECK(tau_c(0.5, s, 0.3) == Approx(0.3 * 0.65 + 0.7 * 0.35).epsilon(1e-14));
  }
  SUBCASE("operators stay in the unit interval") {
    for (double p : {0.0, 0.2, 0.9})
      for (double q : {0.0, 0.4, 1.0})
        for (double w = 0.0; w <= 1.0; w += 0.05) {
          const ServerParams sp(ChannelChain(p, q), 0.1, 0.7);
          for (double v : {tau_n(w, sp), tau_f(w, sp), tau_s(w, sp), tau_c(w, sp, 0.4)}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
          }
        }
  }
  SUBCASE("success is good news on the belief space") {
    const ServerParams sp(from_gamma_rho(0.4, 0.6), 0.15, 0.75);
    const auto omega = belief_space(sp);
    for (double w = omega.lo; w <= omega.hi; w += 0.01) {
      CHECK(tau_s(w, sp) >= tau_n(w, sp) - 1e-15);
      CHECK(tau_n(w, sp) >= tau_f(w, sp) - 1e-15);
    }
  }
  SUBCASE("degenerate observations") {
    const ServerParams certain(from_gamma_rho(0.5, 0.5), 1.0, 1.0);
    CHECK_THROWS_AS(tau_f(0.5, certain), DegenerateError);
    const ServerParams never(from_gamma_rho(0.5, 0.5), 0.0, 0.0);
    CHECK_THROWS_AS(tau_s(0.5, never), DegenerateError);
    CHECK_THROWS_AS(tau_n(1.5, bench()), ParameterError);
  }
}

TEST_CASE("fixed points and the belief space") {
  const auto& s = bench();
  const double wf = stable_fixed_point(FixedPointKind::failure, s);
  const double ws = stable_fixed_point(FixedPointKind::success, s);
  CHECK(wf == Approx(0.29796).epsilon(1e-5));
  CHECK(ws == Approx(0.70204).epsilon(1e-5));
  CHECK(std::abs(tau_f(wf, s) - wf) < 1e-10);
  CHECK(std::abs(tau_s(ws, s) - ws) < 1e-10);
  CHECK(stable_fixed_point(FixedPointKind::no_info, s) == Approx(0.5));

  // Independent oracle: iterate the map.
  double w = 0.5;
  for (int k = 0; k < 200; ++k) w = tau_s(w, s);
  CHECK(ws == Approx(w).epsilon(1e-12));

  const auto omega = belief_space(s);
  CHECK(omega.lo == Approx(wf));
  CHECK(omega.hi == Approx(ws));

  SUBCASE("random compositions end up in the belief space") {
    std::mt19937_64 gen(3);
    for (double start : {0.0, 1.0})
      for (int trial = 0; trial < 200; ++trial) {
        double v = start;
        for (int k = 0; k < 50; ++k) {
          switch (gen() % 3) {
            case 0: v = tau_n(v, s); break;
            case 1: v = tau_f(v, s); break;
            default: v = tau_s(v, s); break;
          }
        }
        CHECK(omega.contains(v, 1e-9));
      }
  }
  SUBCASE("excluded parameters") {
    CHECK_THROWS_AS(stable_fixed_point(FixedPointKind::success, ServerParams(from_gamma_rho(0.5, 0.0), 0.2, 0.8)),
                    DegenerateError);
    CHECK_THROWS_AS(stable_fixed_point(FixedPointKind::failure, ServerParams(from_gamma_rho(0.5, 0.5), 0.4, 0.4)),
                    DegenerateError);
    CHECK_THROWS_AS(stable_fixed_point(FixedPointKind::no_info, ServerParams(ChannelChain(0, 0), 0.2, 0.8)),
                    DegenerateError);
  }
}

TEST_CASE("per-scheme recursions") {
  const auto c = benchmark_config(0.5, 0.3);
  const BeliefPair b{0.4, 0.6};
  SUBCASE("state observation propagates the observed bit") {
    const auto next = update_belief(ObservationScheme::state, {Server::one, ObservedState{true}}, b, c);
    CHECK(next.omega1 == Approx(1.0 - c.server1.chain.q()));
    CHECK(next.omega2 == Approx(tau_n(0.6, c.server2)));
    const auto bad = update_belief(ObservationScheme::state, {Server::two, ObservedState{false}}, b, c);
    CHECK(bad.omega2 == Approx(c.server2.chain.p()));
  }
  SUBCASE("output observation") {
    const auto next = update_belief(ObservationScheme::output, {Server::two, ObservedOutput{true}}, b, c);
    CHECK(next.omega1 == Approx(tau_n(0.4, c.server1)));
    CHECK(next.omega2 == Approx(tau_s(0.6, c.server2)));
  }
  SUBCASE("queue observation") {
    const auto zero = update_belief(ObservationScheme::queue, {Server::one, ObservedQueueChange{0}}, b, c);
    CHECK(zero.omega1 == Approx(tau_c(0.4, c.server1, c.lambda)));
    CHECK(zero.omega2 == Approx(tau_n(0.6, c.server2)));
    const auto up = update_belief(ObservationScheme::queue, {Server::one, ObservedQueueChange{1}}, b, c);
    CHECK(up.omega1 == Approx(tau_f(0.4, c.server1)));
    const auto down = update_belief(ObservationScheme::queue, {Server::one, ObservedQueueChange{-1}}, b, c);
    CHECK(down.omega1 == Approx(tau_s(0.4, c.server1)));
  }
  SUBCASE("empty queue carries no information") {
    const auto idle = update_belief(ObservationScheme::queue, {std::nullopt, ObservedQueueChange{1}}, b, c);
    CHECK(idle.omega1 == Approx(tau_n(0.4, c.server1)));
    CHECK(idle.omega2 == Approx(tau_n(0.6, c.server2)));
    CHECK_THROWS_AS(update_belief(ObservationScheme::queue, {std::nullopt, ObservedQueueChange{-1}}, b, c),
                    ContractError);
  }
  SUBCASE("payload must match the scheme") {
    CHECK_THROWS_AS(update_belief(ObservationScheme::output, {Server::one, ObservedState{true}}, b, c),
                    ContractError);
    CHECK_THROWS_AS(update_belief(ObservationScheme::queue, {Server::one, ObservedQueueChange{2}}, b, c),
                    ContractError);
  }
  SUBCASE("scheme names") {
    CHECK(parse_scheme("III") == ObservationScheme::output);
    CHECK(parse_scheme("queue") == ObservationScheme::queue);
    CHECK(to_string(ObservationScheme::none) == "none");
    CHECK_THROWS_AS(parse_scheme("VI"), ConfigError);
  }
}

TEST_CASE("enumeration oracle") {
  const auto c = benchmark_config(0.6, 0.2);
  const BeliefPair prior{0.5, 0.5};
  SUBCASE("one step of Bayes is the operator") {
    const std::vector<Observation> path{{Server::one, ObservedOutput{false}}};
    const auto post = exact_filter_oracle(ObservationScheme::output, path, c, prior);
    CHECK(post.omega1 == Approx(tau_f(0.5, c.server1)).epsilon(1e-14));
    CHECK(post.omega2 == Approx(tau_n(0.5, c.server2)).epsilon(1e-14));
  }
  SUBCASE("no observations return the stationary pair") {
    const std::vector<Observation> path(6, Observation{std::nullopt, NoObservation{}});
    const auto post = exact_filter_oracle(ObservationScheme::none, path, c, {0.5, 0.5});
    CHECK(post.omega1 == Approx(0.5).epsilon(1e-14));
    const auto from_other = exact_filter_oracle(ObservationScheme::none, path, c, {0.9, 0.1});
    CHECK(from_other.omega1 == Approx(0.5 + 0.4 * std::pow(0.6, 6)).epsilon(1e-13));
    CHECK(from_other.omega2 == Approx(0.5 - 0.4 * std::pow(0.2, 6)).epsilon(1e-13));
  }
  SUBCASE("resource guard") {
    const std::vector<Observation> path(kMaxOracleSteps + 1, Observation{std::nullopt, NoObservation{}});
    CHECK_THROWS_AS(exact_filter_oracle(ObservationScheme::none, path, c, prior), ResourceError);
  }
  SUBCASE("impossible observations") {
    const auto frozen = benchmark_config(1.0, 1.0);
    const std::vector<Observation> path{{Server::one, ObservedState{true}}, {Server::one, ObservedState{false}}};
    CHECK_THROWS_AS(exact_filter_oracle(ObservationScheme::state, path, frozen, prior), DegenerateError);
  }
}

TEST_CASE("recursive filters against the oracle") {
  FilterCheckOptions o;
  o.configs = 150;
  for (auto s : {ObservationScheme::full, ObservationScheme::state, ObservationScheme::output,
                 ObservationScheme::none}) {
    CAPTURE(to_string(s));
    CHECK(compare_filter_with_oracle(s, o).max_error < 1e-10);
  }
  o.rule = QueueUpdate::bayes;
  CHECK(compare_filter_with_oracle(ObservationScheme::queue, o).max_error < 1e-10);
  // The mixture update on dQ = 0 is not the exact posterior.
  o.rule = QueueUpdate::mixture;
  CHECK(compare_filter_with_oracle(ObservationScheme::queue, o).max_error > 1e-3);
}
