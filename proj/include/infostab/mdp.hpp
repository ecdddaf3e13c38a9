#pragma once

// Average-reward relative value iteration on a discretized belief square for
// the state, output and queue observation schemes.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "infostab/belief.hpp"
#include "infostab/policy.hpp"

namespace infostab {

/// Uniform partition of [0, 1] into `cells` intervals; each cell is
/// represented by its centre (k + 0.5) / cells.
struct BeliefGrid {
  std::size_t cells = 1000;

  double center(std::size_t k) const noexcept {
    return (static_cast<double>(k) + 0.5) / static_cast<double>(cells);
  }
  std::size_t cell_of(double omega) const noexcept { return grid_cell(omega, cells); }
  std::size_t size() const noexcept { return cells * cells; }
};

struct BackupResult {
  std::vector<double> value1;  // h^(1) per cell, row-major (omega1 outer)
  std::vector<double> value2;  // h^(2) per cell
  std::vector<double> next;    // max(h^(1), h^(2))
  double mu_estimate = 0.0;    // midpoint of min and max of next - h
  double span = 0.0;           // max - min of next - h
};

/// One synchronous Bellman sweep. h is row-major over the grid and is read at
/// successor beliefs by bilinear interpolation between cell centres.
BackupResult bellman_backup(ObservationScheme scheme, const BeliefGrid& grid,
                            std::span<const double> h, const SystemConfig& config,
                            QueueUpdate rule = QueueUpdate::mixture);

/// h interpolated at an arbitrary belief (clamped to the outermost centres).
double interpolate(const BeliefGrid& grid, std::span<const double> h, const BeliefPair& at);

struct ActionValues {
  double server1;
  double server2;
};

/// h^(1) and h^(2) evaluated at an arbitrary belief, e.g. the exact corners.
ActionValues action_values_at(ObservationScheme scheme, const BeliefGrid& grid,
                              std::span<const double> h, const SystemConfig& config,
                              const BeliefPair& at, QueueUpdate rule = QueueUpdate::mixture);

struct SolveOptions {
  std::size_t cells = 1000;
  double tol = 1e-4;
  long max_iters = 100000;
  QueueUpdate queue_rule = QueueUpdate::mixture;
  /// Called after every sweep with (iteration, span, mu estimate).
  std::function<void(long, double, double)> progress;
};

struct ValueTable {
  ObservationScheme scheme = ObservationScheme::output;
  BeliefGrid grid;
  std::vector<double> h;     // relative values, zero at the reference cell
  std::vector<bool> server2; // greedy action per cell; server 1 on ties
  double mu_star = 0.0;
  double residual_span = 0.0;
  long iterations = 0;
  double tol = 0.0;
  std::size_t reference1 = 0;
  std::size_t reference2 = 0;
  std::vector<double> span_history;

  double value(std::size_t i, std::size_t j) const { return h[i * grid.cells + j]; }
  Server action(std::size_t i, std::size_t j) const {
    return server2[i * grid.cells + j] ? Server::two : Server::one;
  }
};

/// Iterates bellman_backup until the span of the one-step gain drops below
/// tol. Throws ConvergenceError carrying the final span after max_iters.
ValueTable solve_rvi(ObservationScheme scheme, const SystemConfig& config,
                     const SolveOptions& options = {});

SwitchingCurve extract_switching_curve(const ValueTable& table);

/// Fraction of columns in which `inner` lies between the two bounding curves,
/// with `slack` cells of tolerance on either side.
double sandwich_fraction(const SwitchingCurve& inner, const SwitchingCurve& a,
                         const SwitchingCurve& b, std::size_t slack = 0);

struct QueueLimitReport {
  double mu_output = 0.0;
  double mu_queue_lambda0 = 0.0;
  double mu_queue_lambda1 = 0.0;
  double max_mu_difference = 0.0;
  double disagreement_lambda0 = 0.0;  // fraction of cells with different greedy action
  double disagreement_lambda1 = 0.0;
};

/// Compares the queue-observation solution at lambda = 0 and lambda = 1 with
/// the output-observation solution.
QueueLimitReport scheme_iv_limit_check(const SystemConfig& config, const SolveOptions& options = {});

}  // namespace infostab
