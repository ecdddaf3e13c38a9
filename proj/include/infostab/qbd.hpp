#pragma once

// Quasi-birth-and-death model of the queue under a finite-state controller
// with output observations. Phases are (X1, X2, psi1, psi2) ordered
// environment-major (X1 outer, X2 inner) and then controller cells row-major
// (psi1 outer, psi2 inner), giving 4 M^2 phases.

#include <array>
#include <cstddef>
#include <vector>

#include "infostab/matrix.hpp"
#include "infostab/policy.hpp"

namespace infostab {

/// Explicit dense blocks are only built up to this controller resolution.
inline constexpr std::size_t kMaxExplicitResolution = 12;

struct PhaseIndex {
  std::size_t resolution;

  std::size_t size() const noexcept { return 4 * resolution * resolution; }
  /// x1, x2 in {0, 1}; psi1, psi2 are 0-based controller cells.
  std::size_t operator()(int x1, int x2, std::size_t psi1, std::size_t psi2) const noexcept {
    return (static_cast<std::size_t>(2 * x1 + x2) * resolution + psi1) * resolution + psi2;
  }
};

/// diag(vec(C')) as a vector: the rows of C laid end to end.
std::vector<double> control_diagonal(const DenseMatrix& control);

/// Per-environment blocks S~_kl, F~_kl, N~_kl (each M^2 x M^2), indexed by 2k + l.
struct EnvBlocks {
  std::array<DenseMatrix, 4> S;
  std::array<DenseMatrix, 4> F;
  std::array<DenseMatrix, 4> N;
};

EnvBlocks build_env_blocks(const FiniteController& controller, const SystemConfig& config);

struct TildeBlocks {
  DenseMatrix S;
  DenseMatrix F;
  DenseMatrix N;
};

/// Block (r, c) of each 4x4 block layout is (P1 kron P2)(r, c) times the
/// environment block of row r.
TildeBlocks assemble_tilde(const EnvBlocks& blocks, const SystemConfig& config);

struct QbdBlocks {
  DenseMatrix S_tilde;
  DenseMatrix F_tilde;
  DenseMatrix N_tilde;
  DenseMatrix A_minus1;     // one level down
  DenseMatrix A_0;
  DenseMatrix A_1;          // one level up
  DenseMatrix A0_boundary;  // level 0 -> level 0
  DenseMatrix A1_boundary;  // level 0 -> level 1
};

QbdBlocks level_blocks(const TildeBlocks& tilde, double lambda);

/// Convenience: all blocks for a controller (small M only).
QbdBlocks build_qbd(const FiniteController& controller, const SystemConfig& config);

struct StationaryOptions {
  double tol = 1e-12;        // on || pi P - pi ||_1
  long max_iters = 200000;
  std::size_t direct_limit = 2000;  // phases; larger chains only use power iteration
};

struct StationaryResult {
  std::vector<double> pi;
  double residual = 0.0;
  long iterations = 0;
  bool direct = false;
};

/// Stationary vector of the stochastic matrix S~ + F~.
StationaryResult stationary_phase_distribution(const DenseMatrix& S_tilde, const DenseMatrix& F_tilde,
                                               const StationaryOptions& options = {});

/// Matrix-free form of S~ + F~ exploiting the Kronecker and sparse-plus-uniform
/// structure of the controller; memory and time per step are O(M^2).
class PhaseChain {
 public:
  PhaseChain(const FiniteController& controller, const SystemConfig& config);

  std::size_t size() const noexcept { return index_.size(); }
  const PhaseIndex& index() const noexcept { return index_; }

  /// pi (S~ + F~)
  std::vector<double> apply(const std::vector<double>& pi) const;
  /// S~ 1 and F~ 1 per phase.
  const std::vector<double>& success_rates() const noexcept { return success_; }
  const std::vector<double>& failure_rates() const noexcept { return failure_; }

  StationaryResult stationary(const StationaryOptions& options = {}) const;

 private:
  const FiniteController* controller_;
  PhaseIndex index_;
  DenseMatrix env_;  // P1 kron P2
  std::array<double, 2> mu1_;  // server 1 success by state
  std::array<double, 2> mu2_;
  std::vector<double> success_;
  std::vector<double> failure_;
};

struct StabilityResult {
  double mu_star = 0.0;
  double residual = 0.0;
  long iterations = 0;
  std::size_t resolution = 0;
  double epsilon = 0.0;
};

/// pi S~ 1 with pi stationary for S~ + F~. Never depends on config.lambda.
StabilityResult stability_bound(const FiniteController& controller, const SystemConfig& config,
                                const StationaryOptions& options = {});

struct DriftReport {
  bool stable = false;
  double drift = 0.0;   // pi (A_1 - A_-1) 1
  double mu_star = 0.0; // pi S~ 1
  double margin = 0.0;  // mu_star - lambda
};

/// Evaluates the drift pi (A_1 - A_-1) 1 = lambda pi F~ 1 - (1 - lambda) pi S~ 1.
DriftReport drift_check(const FiniteController& controller, const SystemConfig& config,
                        const StationaryOptions& options = {});

/// pi (A_1 - A_-1) 1 from explicit blocks.
double drift_from_blocks(const QbdBlocks& blocks, const std::vector<double>& pi);

}  // namespace infostab
