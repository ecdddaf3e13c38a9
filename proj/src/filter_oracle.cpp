#include "infostab/filter_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <variant>

#include "infostab/error.hpp"

namespace infostab {

namespace {

// Likelihood of one observation given the environment at the decision epoch.
double likelihood(ObservationScheme scheme, const Observation& obs, bool x1, bool x2,
                  const SystemConfig& config) {
  const double lambda = config.lambda;
  if (scheme == ObservationScheme::none) return 1.0;
  if (scheme == ObservationScheme::full) {
    const auto& both = std::get<ObservedBoth>(obs.payload);
    return (both.states.x1 == x1 && both.states.x2 == x2) ? 1.0 : 0.0;
  }
  if (!obs.selected) {
    if (const auto* dq = std::get_if<ObservedQueueChange>(&obs.payload))
      return dq->delta == 1 ? lambda : 1.0 - lambda;
    return 1.0;
  }
  const Server u = *obs.selected;
  const bool x = u == Server::one ? x1 : x2;
  const double mu = config.server(u).mu(x ? 1 : 0);
  switch (scheme) {
    case ObservationScheme::state:
      return std::get<ObservedState>(obs.payload).good == x ? 1.0 : 0.0;
    case ObservationScheme::output:
      return std::get<ObservedOutput>(obs.payload).success ? mu : 1.0 - mu;
    case ObservationScheme::queue: {
      const int delta = std::get<ObservedQueueChange>(obs.payload).delta;
      // dQ = E - I with E ~ Bernoulli(lambda), I ~ Bernoulli(mu), independent.
      if (delta == 1) return lambda * (1.0 - mu);
      if (delta == -1) return (1.0 - lambda) * mu;
      return lambda * mu + (1.0 - lambda) * (1.0 - mu);
    }
    default:
      return 1.0;
  }
}

double transition(const ChannelChain& c, bool from, bool to) {
  if (from) return to ? 1.0 - c.q() : c.q();
  return to ? c.p() : 1.0 - c.p();
}

}  // namespace

BeliefPair exact_filter_oracle(ObservationScheme scheme, std::span<const Observation> trajectory,
                               const SystemConfig& config, const BeliefPair& prior) {
  const std::size_t steps = trajectory.size();
  if (steps > kMaxOracleSteps)
    throw ResourceError("exact_filter_oracle: trajectory length " + std::to_string(steps) +
                        " exceeds " + std::to_string(kMaxOracleSteps));

  // A path assigns (x1, x2) to each of the epochs 0..T; two bits per epoch.
  const std::uint64_t epochs = steps + 1;
  const std::uint64_t paths = std::uint64_t{1} << (2 * epochs);
  const auto& c1 = config.server1.chain;
  const auto& c2 = config.server2.chain;

  double total = 0.0;
  double good1 = 0.0;
  double good2 = 0.0;
  for (std::uint64_t code = 0; code < paths; ++code) {
    auto x1_at = [&](std::uint64_t t) { return ((code >> (2 * t)) & 1u) != 0; };
    auto x2_at = [&](std::uint64_t t) { return ((code >> (2 * t + 1)) & 1u) != 0; };

    double w = (x1_at(0) ? prior.omega1 : 1.0 - prior.omega1) *
               (x2_at(0) ? prior.omega2 : 1.0 - prior.omega2);
    for (std::uint64_t t = 0; t < steps && w > 0.0; ++t) {
      w *= likelihood(scheme, trajectory[t], x1_at(t), x2_at(t), config);
      w *= transition(c1, x1_at(t), x1_at(t + 1)) * transition(c2, x2_at(t), x2_at(t + 1));
    }
    if (w == 0.0) continue;
    total += w;
    if (x1_at(steps)) good1 += w;
    if (x2_at(steps)) good2 += w;
  }
  if (!(total > 0.0)) throw DegenerateError("exact_filter_oracle: observations have zero probability");
  return {good1 / total, good2 / total};
}

}  // namespace infostab

namespace infostab {

FilterCheckResult compare_filter_with_oracle(ObservationScheme scheme,
                                             const FilterCheckOptions& options) {
  std::mt19937_64 gen(options.seed + static_cast<std::uint64_t>(scheme));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto between = [&](double a, double b) { return a + (b - a) * unit(gen); };

  FilterCheckResult result;
  for (std::size_t trial = 0; trial < options.configs; ++trial) {
    // mu0(2) <= mu0(1) < mu1(1) <= mu1(2), all inside (0.02, 0.98).
    const double a = between(0.02, 0.4);
    const double b = between(a, 0.48);
    const double c = between(0.52, 0.9);
    const double d = between(c, 0.98);
    const SystemConfig config(between(0.05, 0.95),
                              ServerParams(ChannelChain(between(0.02, 0.98), between(0.02, 0.98)), b, c),
                              ServerParams(ChannelChain(between(0.02, 0.98), between(0.02, 0.98)), a, d));
    const BeliefPair prior{between(0.01, 0.99), between(0.01, 0.99)};
    const std::size_t length = 1 + gen() % options.max_length;

    EnvState env{unit(gen) < prior.omega1, unit(gen) < prior.omega2};
    long queue = static_cast<long>(gen() % 3);
    std::vector<Observation> path;
    for (std::size_t t = 0; t < length; ++t) {
      const Server u = unit(gen) < 0.5 ? Server::one : Server::two;
      const bool good = env.of(u);
      const bool success = unit(gen) < config.server(u).mu(good ? 1 : 0);
      Observation obs{u, NoObservation{}};
      switch (scheme) {
        case ObservationScheme::full: obs.payload = ObservedBoth{env}; break;
        case ObservationScheme::state: obs.payload = ObservedState{good}; break;
        case ObservationScheme::output: obs.payload = ObservedOutput{success}; break;
        case ObservationScheme::queue: {
          const int arrival = unit(gen) < config.lambda ? 1 : 0;
          if (queue == 0) {
            obs.selected.reset();
            obs.payload = ObservedQueueChange{arrival};
            queue += arrival;
          } else {
            obs.payload = ObservedQueueChange{arrival - (success ? 1 : 0)};
            queue += arrival - (success ? 1 : 0);
          }
          break;
        }
        case ObservationScheme::none: obs.selected.reset(); break;
      }
      path.push_back(obs);
      env = step_environment(env, config, {unit(gen), unit(gen)});
    }

    BeliefPair recursive = prior;
    for (const auto& obs : path) recursive = update_belief(scheme, obs, recursive, config, options.rule);
    const BeliefPair exact = exact_filter_oracle(scheme, path, config, prior);
    const double err = std::max(std::abs(recursive.omega1 - exact.omega1),
                                std::abs(recursive.omega2 - exact.omega2));
    if (err > result.max_error) {
      result.max_error = err;
      result.worst_trial = trial;
    }
    ++result.trials;
  }
  return result;
}

}  // namespace infostab
