#pragma once

// Monte Carlo engine for the two-server queue. Every step draws, in order:
// an arrival, both environment transitions, the decision, the service
// attempt and the observation. Each random quantity comes from its own
// substream of the master seed, so runs that differ only in scheme or policy
// share their arrival, environment and service randomness.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "infostab/belief.hpp"
#include "infostab/policy.hpp"

namespace infostab {

enum class SimMode { queueing, saturated };

inline constexpr long long kDefaultWarmup = 10'000;

struct SimConfig {
  SystemConfig system;
  ObservationScheme scheme = ObservationScheme::output;
  long long horizon = 1'000'000;
  std::uint64_t seed = 1;
  SimMode mode = SimMode::saturated;
  long long warmup = kDefaultWarmup;
  /// Initial P(X_j = 1), also the initial belief. Defaults to the stationary
  /// gamma of each chain; required when a chain has no stationary law.
  std::optional<std::array<double, 2>> initial_belief;
  QueueUpdate queue_rule = QueueUpdate::mixture;
  bool record_trace = false;
};

struct TraceRecord {
  long long t;
  long long queue;  // Q(t), before service
  int x1;
  int x2;
  int server;       // U(t): 1 or 2, 0 when nothing was served
  int arrival;      // E(t)
  int success;      // I(t)
  double omega1;    // beliefs used for the decision at t
  double omega2;
};

struct SimResult {
  double throughput = 0.0;   // successes per step after warmup
  double mean_queue = 0.0;   // queueing mode only
  double queue_slope = 0.0;  // least-squares slope of Q(t) after warmup
  long long final_queue = 0;
  BeliefPair final_beliefs;
  std::vector<TraceRecord> trace;
};

/// Throws ConfigError when the policy cannot act on the scheme's information.
void check_compatible(ObservationScheme scheme, const Policy& policy);

/// Initial per-server probability of the good state.
std::array<double, 2> initial_probabilities(const SimConfig& sim);

SimResult run(const SimConfig& sim, const Policy& policy);

struct Estimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::vector<double> samples;  // one per seed, in seed order
};

struct EstimateOptions {
  long long warmup = kDefaultWarmup;
  std::optional<std::array<double, 2>> initial_belief;
  QueueUpdate queue_rule = QueueUpdate::mixture;
  /// With common random numbers the substreams depend on the seed only;
  /// otherwise the scheme is mixed into the seed as well.
  bool common_random_numbers = true;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Saturated-mode throughput averaged over seeds; replications run
/// concurrently and are reduced in seed order.
Estimate estimate_mu_star(const SystemConfig& system, ObservationScheme scheme, const Policy& policy,
                          long long horizon, std::span<const std::uint64_t> seeds,
                          const EstimateOptions& options = {});

struct ProbePoint {
  double lambda;
  double slope;
  double mean_queue;
  double throughput;
};

/// Queueing-mode runs over a grid of arrival rates; the slope of Q(t) is
/// near 0 for stable rates and near lambda - mu* for unstable ones.
std::vector<ProbePoint> stability_probe(const SystemConfig& system, ObservationScheme scheme,
                                        const Policy& policy, std::span<const double> lambdas,
                                        long long horizon, std::uint64_t seed = 1,
                                        const EstimateOptions& options = {});

void write_trace_csv(std::ostream& os, std::span<const TraceRecord> trace);

}  // namespace infostab
