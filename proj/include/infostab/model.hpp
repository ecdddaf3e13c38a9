#pragma once

// System parameters for a discrete-time queue fed by Bernoulli arrivals and
// served by one of two servers whose success rates are modulated by
// independent two-state Markov environments.

#include <array>
#include <optional>

#include "infostab/matrix.hpp"

namespace infostab {

enum class Server : int { one = 1, two = 2 };

constexpr int index_of(Server s) noexcept { return static_cast<int>(s) - 1; }
constexpr Server other(Server s) noexcept { return s == Server::one ? Server::two : Server::one; }

/// Two-state environment chain with P = [[1-p, p], [q, 1-q]].
class ChannelChain {
 public:
  ChannelChain(double p, double q);

  double p() const noexcept { return p_; }
  double q() const noexcept { return q_; }
  /// Second eigenvalue 1 - p - q. Always defined.
  double rho() const noexcept { return 1.0 - p_ - q_; }
  bool has_stationary() const noexcept { return p_ + q_ > 0.0; }
  /// Stationary probability of state 1. Throws ParameterError when p + q = 0.
  double gamma() const;

  DenseMatrix transition_matrix() const;

  bool operator==(const ChannelChain&) const = default;

 private:
  double p_;
  double q_;
};

struct GammaRho {
  double gamma;
  double rho;
};

ChannelChain from_gamma_rho(double gamma, double rho);
GammaRho to_gamma_rho(const ChannelChain& chain);

struct ServerParams {
  ChannelChain chain;
  double mu0;  // success probability in state 0
  double mu1;  // success probability in state 1

  ServerParams(ChannelChain c, double m0, double m1);
  double mu(int state) const noexcept { return state ? mu1 : mu0; }
};

struct SystemConfig {
  double lambda;
  ServerParams server1;
  ServerParams server2;

  /// Validates ranges and, unless allow_unordered is set, the ordering
  /// mu0(2) <= mu0(1) < mu1(1) <= mu1(2).
  SystemConfig(double lambda, ServerParams s1, ServerParams s2, bool allow_unordered = false);

  const ServerParams& server(Server s) const noexcept {
    return s == Server::one ? server1 : server2;
  }
  SystemConfig with_lambda(double new_lambda) const;

  bool ordered() const noexcept;
  bool strictly_ordered() const noexcept;

 private:
  bool allow_unordered_;
};

/// gamma = 0.5, mu0 = 0.2, mu1 = 0.8 for both servers.
SystemConfig benchmark_config(double rho1, double rho2, double lambda = 0.5);

struct EnvState {
  bool x1 = false;
  bool x2 = false;

  bool of(Server s) const noexcept { return s == Server::one ? x1 : x2; }
  bool operator==(const EnvState&) const = default;
};

struct Moments {
  double mean;
  double variance;
};

double stationary_mean(const ServerParams& server);
Moments stationary_moments(const ServerParams& server);

/// Throughput of always using the server with the larger stationary mean.
double mu_star_no(const SystemConfig& config);
/// Throughput of always using the better server given both true states.
double mu_star_full(const SystemConfig& config);

/// One autonomous environment step. draws[j] is a uniform on [0,1) consumed
/// by server j+1; a server moves 0 -> 1 when draw < p and 1 -> 0 when draw < q.
EnvState step_environment(const EnvState& state, const SystemConfig& config,
                          std::array<double, 2> draws);

}  // namespace infostab
