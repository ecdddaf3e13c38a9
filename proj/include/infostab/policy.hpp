#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <utility>
#include <variant>
#include <vector>

#include "infostab/belief.hpp"
#include "infostab/matrix.hpp"

namespace infostab {

// ---------------------------------------------------------------------------
// Myopic and fixed policies

/// Server 2 iff omega2 >= slope * omega1 + intercept, i.e. iff server 2 has
/// the larger believed success probability (ties go to server 2).
struct MyopicPolicy {
  double slope = 1.0;
  double intercept = 0.0;

  static MyopicPolicy from_config(const SystemConfig& config);
  Server choose(const BeliefPair& beliefs) const noexcept;
};

inline Server myopic_choice(const BeliefPair& beliefs, const SystemConfig& config) {
  return MyopicPolicy::from_config(config).choose(beliefs);
}

struct FixedServer {
  Server server = Server::one;
};

/// Server with the larger stationary mean throughput; server 1 on ties.
FixedServer best_mean_server(const SystemConfig& config);

// ---------------------------------------------------------------------------
// Switching curves on an M x M belief grid (cell k covers [k/M, (k+1)/M))

/// Grid cell of a belief on a uniform M-cell partition of [0, 1], 0-based.
std::size_t grid_cell(double omega, std::size_t resolution) noexcept;

struct SwitchingCurve {
  std::size_t resolution = 0;
  /// thresholds[i]: least omega2 cell at which server 2 is chosen in omega1
  /// cell i; equal to resolution when server 2 is never chosen.
  std::vector<std::size_t> thresholds;
  /// Probability of server 2 in the threshold cell itself.
  double tie_value = 1.0;

  /// Columns where the threshold decreases relative to the previous column.
  std::vector<std::size_t> monotonicity_violations;
  /// Columns whose server-2 cells are not contiguous up to the top.
  std::vector<std::size_t> non_threshold_columns;

  bool monotone() const noexcept { return monotonicity_violations.empty(); }
  /// Probability of choosing server 2 at a continuous belief.
  double server2_probability(const BeliefPair& beliefs) const;
  double server2_probability_cell(std::size_t i, std::size_t j) const;
};

/// Builds a curve from a per-cell action table (true = server 2); row-major,
/// omega1 cell outer. Violations are recorded, not repaired.
SwitchingCurve curve_from_actions(std::size_t resolution, const std::vector<bool>& server2,
                                  double tie_value = 1.0);

/// The myopic rule evaluated at cell centres. Identical servers get tie value
/// 0.5 on the diagonal.
SwitchingCurve myopic_curve(const SystemConfig& config, std::size_t resolution);

// ---------------------------------------------------------------------------
// Finite-state controller

/// Row-stochastic matrix stored as a sparse part plus one uniform value added
/// to every entry. Smoothed placement matrices have one sparse entry per row.
class TransitionMatrix {
 public:
  using Row = std::vector<std::pair<std::size_t, double>>;

  TransitionMatrix() = default;
  TransitionMatrix(std::size_t n, double uniform, std::vector<Row> rows);

  /// Row i puts weight 1/(1+eps) on targets[i] and eps/(M(1+eps)) everywhere.
  static TransitionMatrix smoothed_selection(const std::vector<std::size_t>& targets,
                                             double epsilon);
  /// Splits off the smallest entry as the uniform part.
  static TransitionMatrix from_dense(const DenseMatrix& dense);

  std::size_t size() const noexcept { return n_; }
  double uniform() const noexcept { return uniform_; }
  const Row& sparse_row(std::size_t i) const { return rows_[i]; }

  double operator()(std::size_t i, std::size_t j) const;
  DenseMatrix to_dense() const;

  /// Inverse-CDF draw from row i with u uniform on [0, 1).
  std::size_t sample(std::size_t i, double u) const;

 private:
  std::size_t n_ = 0;
  double uniform_ = 0.0;
  std::vector<Row> rows_;
};

/// Column (1-based) receiving the mass of a row whose operator image is
/// tau_value: j = M * tau_value, integer j kept, else floor(j) when it lies in
/// [1, M], else ceil(j); clamped into [1, M].
std::size_t placement_column(std::size_t resolution, double tau_value);

/// Controller cell (1-based) of a belief: ceil(M * omega), with omega = 0 in cell 1.
std::size_t belief_to_cell(double omega, std::size_t resolution);

struct ControllerMatrices {
  TransitionMatrix N;
  TransitionMatrix S;
  TransitionMatrix F;
};

/// Discretizes tau_n, tau_s, tau_f: row i (1-based) evaluates the operator at
/// (i - 1)/M, places its mass by placement_column, then smooths with epsilon.
ControllerMatrices build_controller_matrices(std::size_t resolution, double epsilon,
                                             const ServerParams& server);

/// C(i, j) = 1 if i < j, 0.5 if i = j, 0 otherwise.
DenseMatrix myopic_control_matrix(std::size_t resolution);
/// C(i, j) = 1 above the curve, tie value on it, 0 below.
DenseMatrix curve_control_matrix(const SwitchingCurve& curve);

inline constexpr double kDefaultSmoothing = 0.001;

struct FiniteController {
  std::size_t resolution = 0;
  double epsilon = kDefaultSmoothing;
  DenseMatrix control;  // probability of choosing server 2 per (psi1, psi2)
  std::array<TransitionMatrix, 2> N;
  std::array<TransitionMatrix, 2> S;
  std::array<TransitionMatrix, 2> F;

  /// Builds N, S, F for both servers from the belief operators.
  static FiniteController build(const SystemConfig& config, DenseMatrix control,
                                double epsilon = kDefaultSmoothing);
  void validate() const;
};

using Policy = std::variant<MyopicPolicy, SwitchingCurve, FiniteController, FixedServer>;

}  // namespace infostab
