#include "infostab/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "infostab/error.hpp"

namespace infostab {

namespace {

void require_probability(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    std::ostringstream os;
    os << name << " = " << v << " is outside [0, 1]";
    throw ParameterError(os.str());
  }
}

}  // namespace

ChannelChain::ChannelChain(double p, double q) : p_(p), q_(q) {
  require_probability(p, "p");
  require_probability(q, "q");
}

double ChannelChain::gamma() const {
  if (!has_stationary())
    throw ParameterError("gamma is undefined for a chain with p + q = 0");
  return p_ / (p_ + q_);
}

DenseMatrix ChannelChain::transition_matrix() const {
  DenseMatrix m(2, 2);
  m(0, 0) = 1.0 - p_;
  m(0, 1) = p_;
  m(1, 0) = q_;
  m(1, 1) = 1.0 - q_;
  return m;
}

ChannelChain from_gamma_rho(double gamma, double rho) {
  require_probability(gamma, "gamma");
  // rho >= 1 - min(1/gamma, 1/(1-gamma)); the bound is -inf at gamma in {0, 1}.
  double lower = -std::numeric_limits<double>::infinity();
  if (gamma > 0.0 && gamma < 1.0) lower = 1.0 - std::min(1.0 / gamma, 1.0 / (1.0 - gamma));
  if (!(rho <= 1.0)) {
    std::ostringstream os;
    os << "rho = " << rho << " exceeds the upper bound 1";
    throw ParameterError(os.str());
  }
  if (!(rho >= lower - 1e-15)) {
    std::ostringstream os;
    os << "rho = " << rho << " is below the lower bound 1 - min(1/gamma, 1/(1-gamma)) = " << lower;
    throw ParameterError(os.str());
  }
  const double p = std::clamp(gamma * (1.0 - rho), 0.0, 1.0);
  const double q = std::clamp((1.0 - gamma) * (1.0 - rho), 0.0, 1.0);
  return ChannelChain(p, q);
}

GammaRho to_gamma_rho(const ChannelChain& chain) { return {chain.gamma(), chain.rho()}; }

ServerParams::ServerParams(ChannelChain c, double m0, double m1) : chain(c), mu0(m0), mu1(m1) {
  require_probability(m0, "mu0");
  require_probability(m1, "mu1");
  if (m0 > m1) {
    std::ostringstream os;
    os << "mu0 = " << m0 << " exceeds mu1 = " << m1 << " (state 1 must be the good state)";
    throw ParameterError(os.str());
  }
}

SystemConfig::SystemConfig(double lam, ServerParams s1, ServerParams s2, bool allow_unordered)
    : lambda(lam), server1(s1), server2(s2), allow_unordered_(allow_unordered) {
  require_probability(lam, "lambda");
  if (!allow_unordered && !ordered()) {
    std::ostringstream os;
    os << "server ordering mu0(2) <= mu0(1) < mu1(1) <= mu1(2) violated: " << s2.mu0
       << " <= " << s1.mu0 << " < " << s1.mu1 << " <= " << s2.mu1;
    throw ConfigError(os.str());
  }
}

SystemConfig SystemConfig::with_lambda(double new_lambda) const {
  return SystemConfig(new_lambda, server1, server2, allow_unordered_);
}

bool SystemConfig::ordered() const noexcept {
  return server2.mu0 <= server1.mu0 && server1.mu0 < server1.mu1 && server1.mu1 <= server2.mu1;
}

bool SystemConfig::strictly_ordered() const noexcept {
  return server2.mu0 < server1.mu0 && server1.mu0 < server1.mu1 && server1.mu1 < server2.mu1;
}

SystemConfig benchmark_config(double rho1, double rho2, double lambda) {
  return SystemConfig(lambda, ServerParams(from_gamma_rho(0.5, rho1), 0.2, 0.8),
                      ServerParams(from_gamma_rho(0.5, rho2), 0.2, 0.8));
}

double stationary_mean(const ServerParams& server) {
  const double g = server.chain.gamma();
  return (1.0 - g) * server.mu0 + g * server.mu1;
}

Moments stationary_moments(const ServerParams& server) {
  const double g = server.chain.gamma();
  const double gb = 1.0 - g;
  const double m0 = server.mu0;
  const double m1 = server.mu1;
  const double var = gb * m0 * (1.0 - m0) + g * m1 * (1.0 - m1) + g * gb * (m1 - m0) * (m1 - m0);
  return {gb * m0 + g * m1, var};
}

double mu_star_no(const SystemConfig& config) {
  return std::max(stationary_mean(config.server1), stationary_mean(config.server2));
}

double mu_star_full(const SystemConfig& config) {
  const double g1 = config.server1.chain.gamma();
  const double g2 = config.server2.chain.gamma();
  return (1.0 - g1) * (1.0 - g2) * config.server1.mu0 + g2 * config.server2.mu1 +
         g1 * (1.0 - g2) * config.server1.mu1;
}

EnvState step_environment(const EnvState& state, const SystemConfig& config,
                          std::array<double, 2> draws) {
  auto step = [](bool x, const ChannelChain& c, double u) {
    return x ? !(u < c.q()) : (u < c.p());
  };
  return {step(state.x1, config.server1.chain, draws[0]),
          step(state.x2, config.server2.chain, draws[1])};
}

}  // namespace infostab
