#include "infostab/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <exception>
#include <thread>
#include <type_traits>
#include <variant>

#include "infostab/error.hpp"

namespace infostab {

namespace {

enum Stream : std::uint32_t {
  kArrival,
  kEnv1,
  kEnv2,
  kService1,
  kService2,
  kDecision,
  kController1,
  kController2,
  kInitial,
  kStreamCount
};

class Uniform {
 public:
  Uniform(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream,
                      0x5eedu};
    gen_.seed(seq);
  }
  // 53 random bits mapped to [0, 1).
  double operator()() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 gen_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

struct Streams {
  std::vector<Uniform> s;
  explicit Streams(std::uint64_t seed) {
    s.reserve(kStreamCount);
    for (std::uint32_t k = 0; k < kStreamCount; ++k) s.emplace_back(seed, k);
  }
  double operator()(Stream k) { return s[k](); }
};

// Online least-squares slope and mean of Q against t.
struct SlopeAccumulator {
  double n = 0.0, mean_t = 0.0, mean_q = 0.0, c_tq = 0.0, c_tt = 0.0;

  void add(double t, double q) {
    n += 1.0;
    const double dt = t - mean_t;
    mean_t += dt / n;
    mean_q += (q - mean_q) / n;
    c_tq += dt * (q - mean_q);
    c_tt += dt * (t - mean_t);
  }
  double slope() const { return c_tt > 0.0 ? c_tq / c_tt : 0.0; }
};

// Per-run decision state: either beliefs or controller cells.
struct Decider {
  const Policy& policy;
  std::array<std::size_t, 2> cells{0, 0};

  Server decide(const BeliefPair& b, double u) const {
    return std::visit(
        [&](const auto& p) -> Server {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, MyopicPolicy>) {
            return p.choose(b);
          } else if constexpr (std::is_same_v<T, FixedServer>) {
            return p.server;
          } else if constexpr (std::is_same_v<T, SwitchingCurve>) {
            return u < p.server2_probability(b) ? Server::two : Server::one;
          } else {
            return u < p.control(cells[0], cells[1]) ? Server::two : Server::one;
          }
        },
        policy);
  }
};

}  // namespace

void check_compatible(ObservationScheme scheme, const Policy& policy) {
  const bool fixed = std::holds_alternative<FixedServer>(policy);
  const bool controller = std::holds_alternative<FiniteController>(policy);
  switch (scheme) {
    case ObservationScheme::none:
      if (!fixed) throw ConfigError("scheme 'none' requires a fixed server policy");
      return;
    case ObservationScheme::full:
      if (!fixed && !std::holds_alternative<MyopicPolicy>(policy))
        throw ConfigError("scheme 'full' requires a myopic or fixed policy on true states");
      return;
    case ObservationScheme::output:
      return;
    case ObservationScheme::state:
    case ObservationScheme::queue:
      if (controller)
        throw ConfigError("finite-state controllers are defined for the output scheme only");
      return;
  }
}

std::array<double, 2> initial_probabilities(const SimConfig& sim) {
  if (sim.initial_belief) {
    for (double v : *sim.initial_belief)
      if (!(v >= 0.0 && v <= 1.0)) throw ParameterError("initial belief outside [0, 1]");
    return *sim.initial_belief;
  }
  const auto& c1 = sim.system.server1.chain;
  const auto& c2 = sim.system.server2.chain;
  if (!c1.has_stationary() || !c2.has_stationary())
    throw ParameterError("a frozen environment chain needs an explicit initial belief");
  return {c1.gamma(), c2.gamma()};
}

SimResult run(const SimConfig& sim, const Policy& policy) {
  check_compatible(sim.scheme, policy);
  if (!(sim.horizon > sim.warmup && sim.warmup >= 0))
    throw ParameterError("simulation needs horizon > warmup >= 0");

  const auto& sys = sim.system;
  const auto init = initial_probabilities(sim);
  const bool saturated = sim.mode == SimMode::saturated;
  const bool full = sim.scheme == ObservationScheme::full;
  const auto* controller = std::get_if<FiniteController>(&policy);
  if (controller) controller->validate();

  Streams rng(sim.seed);
  EnvState env{rng(kInitial) < init[0], rng(kInitial) < init[1]};
  BeliefPair beliefs{init[0], init[1]};
  Decider decider{policy};
  if (controller)
    for (int k = 0; k < 2; ++k)
      decider.cells[k] = belief_to_cell(init[k], controller->resolution) - 1;

  SimResult out;
  long long queue = 0;
  long long successes = 0;
  double queue_sum = 0.0;
  SlopeAccumulator slope;
  if (sim.record_trace) out.trace.reserve(static_cast<std::size_t>(sim.horizon));

  for (long long t = 0; t < sim.horizon; ++t) {
    // (1) arrival, (2) environment
    const int arrival = rng(kArrival) < sys.lambda ? 1 : 0;
    const double e1 = rng(kEnv1);
    const double e2 = rng(kEnv2);
    if (t > 0) env = step_environment(env, sys, {e1, e2});
    const double s1 = rng(kService1);
    const double s2 = rng(kService2);
    const double ud = rng(kDecision);
    const double uc1 = rng(kController1);
    const double uc2 = rng(kController2);

    // Full observation sees the current states before deciding.
    if (full) beliefs = {env.x1 ? 1.0 : 0.0, env.x2 ? 1.0 : 0.0};

    // (3) decision, (4) service
    const Server chosen = decider.decide(beliefs, ud);
    const bool serving = saturated || queue > 0;
    int success = 0;
    if (serving) {
      const double mu = sys.server(chosen).mu(env.of(chosen));
      success = (chosen == Server::one ? s1 : s2) < mu ? 1 : 0;
    }

    if (sim.record_trace)
      out.trace.push_back({t, queue, env.x1, env.x2, serving ? static_cast<int>(chosen) : 0, arrival,
                           success, beliefs.omega1, beliefs.omega2});

    if (t >= sim.warmup) {
      successes += success;
      queue_sum += static_cast<double>(queue);
      slope.add(static_cast<double>(t), static_cast<double>(queue));
    }
    if (!saturated) queue += arrival - success;

    // (5) observation and belief / controller update
    Observation obs{serving ? std::optional<Server>(chosen) : std::nullopt, NoObservation{}};
    switch (sim.scheme) {
      case ObservationScheme::full:
        obs.payload = ObservedBoth{env};
        break;
      case ObservationScheme::state:
        if (serving) obs.payload = ObservedState{env.of(chosen)};
        break;
      case ObservationScheme::output:
        if (serving) obs.payload = ObservedOutput{success == 1};
        break;
      case ObservationScheme::queue:
        obs.payload = ObservedQueueChange{arrival - success};
        break;
      case ObservationScheme::none:
        obs.selected.reset();
        break;
    }
    if (controller) {
      const std::array<double, 2> draws{uc1, uc2};
      for (int k = 0; k < 2; ++k) {
        const Server s = k == 0 ? Server::one : Server::two;
        const TransitionMatrix* m = &controller->N[k];
        if (serving && chosen == s) m = success ? &controller->S[k] : &controller->F[k];
        decider.cells[k] = m->sample(decider.cells[k], draws[k]);
      }
    }
    beliefs = update_belief(sim.scheme, obs, beliefs, sys, sim.queue_rule);
  }

  const double steps = static_cast<double>(sim.horizon - sim.warmup);
  out.throughput = static_cast<double>(successes) / steps;
  out.mean_queue = saturated ? 0.0 : queue_sum / steps;
  out.queue_slope = saturated ? 0.0 : slope.slope();
  out.final_queue = queue;
  out.final_beliefs = beliefs;
  return out;
}

Estimate estimate_mu_star(const SystemConfig& system, ObservationScheme scheme, const Policy& policy,
                          long long horizon, std::span<const std::uint64_t> seeds,
                          const EstimateOptions& options) {
  if (seeds.empty()) throw ParameterError("estimate_mu_star: empty seed list");
  check_compatible(scheme, policy);

  Estimate est;
  est.samples.assign(seeds.size(), 0.0);
  std::vector<std::exception_ptr> errors(seeds.size());
  auto job = [&](std::size_t k) {
    try {
      const std::uint64_t seed =
          options.common_random_numbers ? seeds[k] : mix_seed(seeds[k], static_cast<std::uint64_t>(scheme));
      SimConfig sim{system,  scheme,           horizon,           seed, SimMode::saturated,
                    options.warmup, options.initial_belief, options.queue_rule, false};
      est.samples[k] = run(sim, policy).throughput;
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };

  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, seeds.size()));
  if (threads <= 1) {
    for (std::size_t k = 0; k < seeds.size(); ++k) job(k);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < seeds.size(); k += threads) job(k);
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  const double n = static_cast<double>(seeds.size());
  double sum = 0.0;
  for (double v : est.samples) sum += v;
  est.mean = sum / n;
  if (seeds.size() > 1) {
    double ss = 0.0;
    for (double v : est.samples) ss += (v - est.mean) * (v - est.mean);
    est.stderr_ = std::sqrt(ss / (n - 1.0) / n);
  }
  return est;
}

std::vector<ProbePoint> stability_probe(const SystemConfig& system, ObservationScheme scheme,
                                        const Policy& policy, std::span<const double> lambdas,
                                        long long horizon, std::uint64_t seed,
                                        const EstimateOptions& options) {
  check_compatible(scheme, policy);
  std::vector<ProbePoint> out(lambdas.size());
  std::vector<std::exception_ptr> errors(lambdas.size());
  std::vector<std::jthread> pool;
  for (std::size_t k = 0; k < lambdas.size(); ++k)
    pool.emplace_back([&, k] {
      try {
        SimConfig sim{system.with_lambda(lambdas[k]), scheme, horizon, seed, SimMode::queueing,
                      options.warmup, options.initial_belief, options.queue_rule, false};
        const auto r = run(sim, policy);
        out[k] = {lambdas[k], r.queue_slope, r.mean_queue, r.throughput};
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  pool.clear();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

void write_trace_csv(std::ostream& os, std::span<const TraceRecord> trace) {
  os << "# infostab trace v1\n";
  os << "t,Q,X1,X2,U,E,I,omega1,omega2\n";
  const auto flags = os.flags();
  const auto prec = os.precision(6);
  for (const auto& r : trace)
    os << r.t << ',' << r.queue << ',' << r.x1 << ',' << r.x2 << ',' << r.server << ',' << r.arrival
       << ',' << r.success << ',' << r.omega1 << ',' << r.omega2 << '\n';
  os.precision(prec);
  os.flags(flags);
}

}  // namespace infostab
