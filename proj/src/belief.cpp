#include "infostab/belief.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "infostab/error.hpp"

namespace infostab {

namespace {

double unit(double x) { return std::clamp(x, 0.0, 1.0); }

void require_belief(double omega) {
  if (!(omega >= 0.0 && omega <= 1.0)) {
    std::ostringstream os;
    os << "belief " << omega << " is outside [0, 1]";
    throw ParameterError(os.str());
  }
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

[[noreturn]] void payload_mismatch(ObservationScheme scheme) {
  throw ContractError("observation payload does not match the " +
                      std::string(to_string(scheme)) + " observation scheme");
}

}  // namespace

std::string_view to_string(ObservationScheme scheme) {
  switch (scheme) {
    case ObservationScheme::full: return "full";
    case ObservationScheme::state: return "state";
    case ObservationScheme::output: return "output";
    case ObservationScheme::queue: return "queue";
    case ObservationScheme::none: return "none";
  }
  return "unknown";
}

ObservationScheme parse_scheme(std::string_view text) {
  if (text == "full" || text == "I") return ObservationScheme::full;
  if (text == "state" || text == "II") return ObservationScheme::state;
  if (text == "output" || text == "III") return ObservationScheme::output;
  if (text == "queue" || text == "IV") return ObservationScheme::queue;
  if (text == "none" || text == "no" || text == "V") return ObservationScheme::none;
  throw ConfigError("unknown observation scheme '" + std::string(text) + "'");
}

double success_prob(double omega, const ServerParams& server) {
  return (1.0 - omega) * server.mu0 + omega * server.mu1;
}

double tau_n(double omega, const ServerParams& server) {
  require_belief(omega);
  const auto& c = server.chain;
  return unit(omega * c.rho() + c.p());
}

double tau_f(double omega, const ServerParams& server) {
  require_belief(omega);
  const double fail = 1.0 - success_prob(omega, server);
  if (!(fail > 0.0)) throw DegenerateError("tau_f: failure has zero probability at this belief");
  const auto& c = server.chain;
  return unit(((1.0 - c.q()) * (1.0 - server.mu1) * omega +
               c.p() * (1.0 - server.mu0) * (1.0 - omega)) /
              fail);
}

double tau_s(double omega, const ServerParams& server) {
  require_belief(omega);
  const double succ = success_prob(omega, server);
  if (!(succ > 0.0)) throw DegenerateError("tau_s: success has zero probability at this belief");
  const auto& c = server.chain;
  return unit(((1.0 - c.q()) * server.mu1 * omega + c.p() * server.mu0 * (1.0 - omega)) / succ);
}

double tau_c(double omega, const ServerParams& server, double lambda, QueueUpdate rule) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ParameterError("tau_c: lambda outside [0, 1]");
  // Endpoints avoid evaluating an operator whose observation is impossible.
  if (lambda == 0.0) return tau_f(omega, server);
  if (lambda == 1.0) return tau_s(omega, server);
  if (rule == QueueUpdate::mixture)
    return unit(lambda * tau_s(omega, server) + (1.0 - lambda) * tau_f(omega, server));

  const double r = success_prob(omega, server);
  const double w_success = lambda * r;
  const double w_failure = (1.0 - lambda) * (1.0 - r);
  const double total = w_success + w_failure;
  if (!(total > 0.0)) throw DegenerateError("tau_c: dQ = 0 has zero probability at this belief");
  double acc = 0.0;
  if (w_success > 0.0) acc += w_success * tau_s(omega, server);
  if (w_failure > 0.0) acc += w_failure * tau_f(omega, server);
  return unit(acc / total);
}

double stable_fixed_point(FixedPointKind kind, const ServerParams& server) {
  const auto& chain = server.chain;
  if (kind == FixedPointKind::no_info) {
    if (!chain.has_stationary())
      throw DegenerateError("tau_n has no unique fixed point when p + q = 0");
    return chain.gamma();
  }
  const double p = chain.p();
  const double q = chain.q();
  if (chain.rho() == 0.0 || server.mu0 == server.mu1 || p == 0.0 || p == 1.0 || q == 0.0 ||
      q == 1.0)
    throw DegenerateError(
        "fixed point requires rho != 0, mu0 != mu1 and p, q outside {0, 1}");

  // tau(w) = (a w + b) / (c w + d)
  const bool fail = kind == FixedPointKind::failure;
  const double m0 = fail ? 1.0 - server.mu0 : server.mu0;
  const double m1 = fail ? 1.0 - server.mu1 : server.mu1;
  const double a = (1.0 - q) * m1 - p * m0;
  const double b = p * m0;
  const double c = m1 - m0;
  const double d = m0;
  const double disc = (a - d) * (a - d) + 4.0 * b * c;
  if (disc < 0.0) throw DegenerateError("belief operator has no real fixed point");
  const double w = (a - d + std::sqrt(disc)) / (2.0 * c);
  if (!(w > 0.0 && w < 1.0)) throw DegenerateError("stable fixed point falls outside (0, 1)");
  return w;
}

Interval belief_space(const ServerParams& server) {
  const double wf = stable_fixed_point(FixedPointKind::failure, server);
  const double ws = stable_fixed_point(FixedPointKind::success, server);
  return {std::min(wf, ws), std::max(wf, ws)};
}

BeliefPair update_belief(ObservationScheme scheme, const Observation& obs, const BeliefPair& beliefs,
                         const SystemConfig& config, QueueUpdate rule) {
  const auto& s1 = config.server1;
  const auto& s2 = config.server2;
  const BeliefPair idle{tau_n(beliefs.omega1, s1), tau_n(beliefs.omega2, s2)};

  if (scheme == ObservationScheme::full) {
    const auto* both = std::get_if<ObservedBoth>(&obs.payload);
    if (!both) payload_mismatch(scheme);
    // The next decision sees the true states again; this is the prediction.
    return {tau_n(both->states.x1 ? 1.0 : 0.0, s1), tau_n(both->states.x2 ? 1.0 : 0.0, s2)};
  }
  if (scheme == ObservationScheme::none) {
    if (!std::holds_alternative<NoObservation>(obs.payload)) payload_mismatch(scheme);
    return idle;
  }
  if (!obs.selected) {
    const bool ok = std::visit(overloaded{
                                   [](const NoObservation&) { return true; },
                                   [&](const ObservedQueueChange& dq) {
                                     // An empty queue only reveals the arrival.
                                     return scheme == ObservationScheme::queue &&
                                            (dq.delta == 0 || dq.delta == 1);
                                   },
                                   [](const auto&) { return false; },
                               },
                               obs.payload);
    if (!ok) payload_mismatch(scheme);
    return idle;
  }

  const Server chosen = *obs.selected;
  const ServerParams& srv = config.server(chosen);
  const double w = beliefs.of(chosen);
  double updated = 0.0;

  switch (scheme) {
    case ObservationScheme::state: {
      const auto* st = std::get_if<ObservedState>(&obs.payload);
      if (!st) payload_mismatch(scheme);
      // Observed state propagated one step: p after state 0, 1 - q after state 1.
      updated = tau_n(st->good ? 1.0 : 0.0, srv);
      break;
    }
    case ObservationScheme::output: {
      const auto* out = std::get_if<ObservedOutput>(&obs.payload);
      if (!out) payload_mismatch(scheme);
      updated = out->success ? tau_s(w, srv) : tau_f(w, srv);
      break;
    }
    case ObservationScheme::queue: {
      const auto* dq = std::get_if<ObservedQueueChange>(&obs.payload);
      if (!dq) payload_mismatch(scheme);
      if (dq->delta == 1)
        updated = tau_f(w, srv);
      else if (dq->delta == 0)
        updated = tau_c(w, srv, config.lambda, rule);
      else if (dq->delta == -1)
        updated = tau_s(w, srv);
      else
        throw ContractError("queue change must be -1, 0 or +1");
      break;
    }
    default:
      payload_mismatch(scheme);
  }

  BeliefPair next = idle;
  (chosen == Server::one ? next.omega1 : next.omega2) = updated;
  return next;
}

}  // namespace infostab
