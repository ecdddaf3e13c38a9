#pragma once

// Belief operators for a two-state server environment and the per-scheme
// recursions that track the posterior probability of each server being in
// its good state.

#include <optional>
#include <string_view>
#include <variant>

#include "infostab/model.hpp"

namespace infostab {

/// Posterior probabilities that server 1 and server 2 are in state 1, at the
/// start of a decision epoch.
struct BeliefPair {
  double omega1 = 0.0;
  double omega2 = 0.0;

  double of(Server s) const noexcept { return s == Server::one ? omega1 : omega2; }
  bool operator==(const BeliefPair&) const = default;
};

enum class ObservationScheme { full, state, output, queue, none };

std::string_view to_string(ObservationScheme scheme);
/// Accepts "full", "state", "output", "queue", "none" and the roman numerals I..V.
ObservationScheme parse_scheme(std::string_view text);

// Observation payloads, one per scheme.
struct NoObservation {
  bool operator==(const NoObservation&) const = default;
};
struct ObservedBoth {
  EnvState states;
  bool operator==(const ObservedBoth&) const = default;
};
struct ObservedState {
  bool good;
  bool operator==(const ObservedState&) const = default;
};
struct ObservedOutput {
  bool success;
  bool operator==(const ObservedOutput&) const = default;
};
struct ObservedQueueChange {
  int delta;  // Q(t+1) - Q(t), in {-1, 0, +1}
  bool operator==(const ObservedQueueChange&) const = default;
};

using ObservationPayload =
    std::variant<NoObservation, ObservedBoth, ObservedState, ObservedOutput, ObservedQueueChange>;

struct Observation {
  std::optional<Server> selected;  // empty when the queue was empty
  ObservationPayload payload;
};

/// How the queue-observation recursion treats dQ = 0.
enum class QueueUpdate {
  mixture,  // lambda * tau_s + (1 - lambda) * tau_f
  bayes,    // exact posterior: weights lambda*r and (1-lambda)*(1-r), renormalized
};

// Believed chance of success r(omega) = (1 - omega) mu0 + omega mu1.
double success_prob(double omega, const ServerParams& server);

double tau_n(double omega, const ServerParams& server);
double tau_f(double omega, const ServerParams& server);
double tau_s(double omega, const ServerParams& server);
double tau_c(double omega, const ServerParams& server, double lambda,
             QueueUpdate rule = QueueUpdate::mixture);

enum class FixedPointKind { no_info, failure, success };

/// Stable fixed point of tau_n (the stationary gamma), tau_f or tau_s.
/// Throws DegenerateError when the requested operator is not a hyperbolic
/// Mobius map with a fixed point inside (0, 1).
double stable_fixed_point(FixedPointKind kind, const ServerParams& server);

struct Interval {
  double lo;
  double hi;
  bool contains(double x, double slack = 0.0) const noexcept {
    return x >= lo - slack && x <= hi + slack;
  }
};

/// Interval spanned by the stable fixed points of tau_f and tau_s; every long
/// enough composition of the belief operators ends up inside it.
Interval belief_space(const ServerParams& server);

/// One step of the belief recursion for the given scheme. The returned pair
/// is the belief at the next decision epoch.
BeliefPair update_belief(ObservationScheme scheme, const Observation& obs, const BeliefPair& beliefs,
                         const SystemConfig& config, QueueUpdate rule = QueueUpdate::mixture);

}  // namespace infostab
