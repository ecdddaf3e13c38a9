#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "infostab/belief.hpp"

namespace infostab {

inline constexpr std::size_t kMaxOracleSteps = 12;

/// Brute-force posterior P(X_j(T) = 1 | Y(0..T-1)) obtained by summing the
/// joint probability of every environment path of both servers that is
/// consistent with the observations. Independent of the recursive filter;
/// cost grows as 4^(T+1). Throws ResourceError for T > kMaxOracleSteps.
BeliefPair exact_filter_oracle(ObservationScheme scheme, std::span<const Observation> trajectory,
                               const SystemConfig& config, const BeliefPair& prior);

struct FilterCheckOptions {
  std::size_t configs = 500;
  std::size_t max_length = 8;
  std::uint64_t seed = 20240501;
  QueueUpdate rule = QueueUpdate::mixture;
};

struct FilterCheckResult {
  std::size_t trials = 0;
  double max_error = 0.0;
  std::size_t worst_trial = 0;
};

/// Draws random ordered configs, priors and simulated observation
/// trajectories (random server choices, short queues so that empty slots
/// occur) and compares update_belief against the oracle.
FilterCheckResult compare_filter_with_oracle(ObservationScheme scheme,
                                             const FilterCheckOptions& options = {});

}  // namespace infostab
