#include "infostab/policy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "infostab/error.hpp"

namespace infostab {

MyopicPolicy MyopicPolicy::from_config(const SystemConfig& config) {
  const auto& a = config.server1;
  const auto& b = config.server2;
  const double spread2 = b.mu1 - b.mu0;
  if (!(spread2 > 0.0))
    throw ParameterError("myopic policy needs mu1 > mu0 for server 2");
  return {(a.mu1 - a.mu0) / spread2, (a.mu0 - b.mu0) / spread2};
}

Server MyopicPolicy::choose(const BeliefPair& beliefs) const noexcept {
  return beliefs.omega2 >= slope * beliefs.omega1 + intercept ? Server::two : Server::one;
}

FixedServer best_mean_server(const SystemConfig& config) {
  return {stationary_mean(config.server2) > stationary_mean(config.server1) ? Server::two
                                                                              : Server::one};
}

std::size_t grid_cell(double omega, std::size_t resolution) noexcept {
  if (!(omega > 0.0)) return 0;
  const auto cell = static_cast<std::size_t>(std::floor(omega * static_cast<double>(resolution)));
  return std::min(cell, resolution - 1);
}

double SwitchingCurve::server2_probability_cell(std::size_t i, std::size_t j) const {
  const std::size_t thr = thresholds.at(i);
  if (j > thr) return 1.0;
  if (j == thr) return tie_value;
  return 0.0;
}

double SwitchingCurve::server2_probability(const BeliefPair& beliefs) const {
  return server2_probability_cell(grid_cell(beliefs.omega1, resolution),
                                  grid_cell(beliefs.omega2, resolution));
}

SwitchingCurve curve_from_actions(std::size_t resolution, const std::vector<bool>& server2,
                                  double tie_value) {
  if (server2.size() != resolution * resolution)
    throw ContractError("curve_from_actions: action table is not resolution^2");
  SwitchingCurve curve;
  curve.resolution = resolution;
  curve.tie_value = tie_value;
  curve.thresholds.assign(resolution, resolution);
  for (std::size_t i = 0; i < resolution; ++i) {
    const auto row = server2.begin() + static_cast<std::ptrdiff_t>(i * resolution);
    const auto first = std::find(row, row + static_cast<std::ptrdiff_t>(resolution), true);
    curve.thresholds[i] = static_cast<std::size_t>(first - row);
    if (std::find(first, row + static_cast<std::ptrdiff_t>(resolution), false) !=
        row + static_cast<std::ptrdiff_t>(resolution))
      curve.non_threshold_columns.push_back(i);
    if (i > 0 && curve.thresholds[i] < curve.thresholds[i - 1])
      curve.monotonicity_violations.push_back(i);
  }
  return curve;
}

SwitchingCurve myopic_curve(const SystemConfig& config, std::size_t resolution) {
  const auto policy = MyopicPolicy::from_config(config);
  const double m = static_cast<double>(resolution);
  std::vector<bool> table(resolution * resolution);
  for (std::size_t i = 0; i < resolution; ++i)
    for (std::size_t j = 0; j < resolution; ++j)
      table[i * resolution + j] =
          policy.choose({(static_cast<double>(i) + 0.5) / m, (static_cast<double>(j) + 0.5) / m}) ==
          Server::two;
  const bool symmetric = policy.slope == 1.0 && policy.intercept == 0.0;
  return curve_from_actions(resolution, table, symmetric ? 0.5 : 1.0);
}

// ---------------------------------------------------------------------------

TransitionMatrix::TransitionMatrix(std::size_t n, double uniform, std::vector<Row> rows)
    : n_(n), uniform_(uniform), rows_(std::move(rows)) {
  if (rows_.size() != n_) throw ContractError("TransitionMatrix: row count mismatch");
  if (!(uniform_ >= 0.0)) throw ContractError("TransitionMatrix: negative uniform part");
  for (std::size_t i = 0; i < n_; ++i) {
    double sum = uniform_ * static_cast<double>(n_);
    for (const auto& [col, v] : rows_[i]) {
      if (col >= n_ || v < 0.0) throw ContractError("TransitionMatrix: bad sparse entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      std::ostringstream os;
      os << "TransitionMatrix: row " << i << " sums to " << sum;
      throw ContractError(os.str());
    }
  }
}

TransitionMatrix TransitionMatrix::smoothed_selection(const std::vector<std::size_t>& targets,
                                                      double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0))
    throw ParameterError("smoothing epsilon must lie in [0, 1)");
  const std::size_t n = targets.size();
  const double heavy = 1.0 / (1.0 + epsilon);
  const double uniform = epsilon / (static_cast<double>(n) * (1.0 + epsilon));
  std::vector<Row> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = {{targets[i], heavy}};
  return TransitionMatrix(n, uniform, std::move(rows));
}

TransitionMatrix TransitionMatrix::from_dense(const DenseMatrix& dense) {
  if (dense.rows() != dense.cols() || dense.rows() == 0)
    throw ContractError("TransitionMatrix: dense matrix must be square and non-empty");
  const std::size_t n = dense.rows();
  const auto data = dense.data();
  const double uniform = *std::min_element(data.begin(), data.end());
  if (uniform < 0.0) throw ContractError("TransitionMatrix: negative entry");
  std::vector<Row> rows(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double extra = dense(i, j) - uniform;
      if (extra > 0.0) rows[i].emplace_back(j, extra);
    }
  return TransitionMatrix(n, uniform, std::move(rows));
}

double TransitionMatrix::operator()(std::size_t i, std::size_t j) const {
  double v = uniform_;
  for (const auto& [col, w] : rows_.at(i))
    if (col == j) v += w;
  return v;
}

DenseMatrix TransitionMatrix::to_dense() const {
  DenseMatrix out(n_, n_, uniform_);
  for (std::size_t i = 0; i < n_; ++i)
    for (const auto& [col, w] : rows_[i]) out(i, col) += w;
  return out;
}

std::size_t TransitionMatrix::sample(std::size_t i, double u) const {
  const double spread = uniform_ * static_cast<double>(n_);
  if (u < spread) return std::min(static_cast<std::size_t>(u / uniform_), n_ - 1);
  u -= spread;
  const Row& row = rows_.at(i);
  for (const auto& [col, w] : row) {
    if (u < w) return col;
    u -= w;
  }
  // Rounding left a sliver of mass past the last entry.
  return row.empty() ? n_ - 1 : row.back().first;
}

// ---------------------------------------------------------------------------

std::size_t placement_column(std::size_t resolution, double tau_value) {
  const double m = static_cast<double>(resolution);
  const double j = m * tau_value;
  const double nearest = std::round(j);
  double col;
  if (std::abs(j - nearest) <= 1e-10 * std::max(1.0, m))
    col = nearest;
  else if (std::floor(j) >= 1.0 && std::floor(j) <= m)
    col = std::floor(j);
  else
    col = std::ceil(j);
  return static_cast<std::size_t>(std::clamp(col, 1.0, m));
}

std::size_t belief_to_cell(double omega, std::size_t resolution) {
  if (!(omega >= 0.0 && omega <= 1.0)) throw ParameterError("belief outside [0, 1]");
  const double cell = std::ceil(static_cast<double>(resolution) * omega);
  return static_cast<std::size_t>(std::clamp(cell, 1.0, static_cast<double>(resolution)));
}

ControllerMatrices build_controller_matrices(std::size_t resolution, double epsilon,
                                             const ServerParams& server) {
  if (resolution == 0) throw ParameterError("controller resolution must be at least 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParameterError("smoothing epsilon must lie in (0, 1)");
  const double m = static_cast<double>(resolution);
  auto targets = [&](auto&& op) {
    std::vector<std::size_t> out(resolution);
    for (std::size_t i = 1; i <= resolution; ++i)
      out[i - 1] = placement_column(resolution, op((static_cast<double>(i) - 1.0) / m)) - 1;
    return out;
  };
  return {
      TransitionMatrix::smoothed_selection(targets([&](double w) { return tau_n(w, server); }),
                                           epsilon),
      TransitionMatrix::smoothed_selection(targets([&](double w) { return tau_s(w, server); }),
                                           epsilon),
      TransitionMatrix::smoothed_selection(targets([&](double w) { return tau_f(w, server); }),
                                           epsilon),
  };
}

DenseMatrix myopic_control_matrix(std::size_t resolution) {
  DenseMatrix c(resolution, resolution);
  for (std::size_t i = 0; i < resolution; ++i)
    for (std::size_t j = 0; j < resolution; ++j) c(i, j) = i < j ? 1.0 : (i == j ? 0.5 : 0.0);
  return c;
}

DenseMatrix curve_control_matrix(const SwitchingCurve& curve) {
  if (curve.thresholds.size() != curve.resolution)
    throw ContractError("curve_control_matrix: threshold count does not match resolution");
  DenseMatrix c(curve.resolution, curve.resolution);
  for (std::size_t i = 0; i < curve.resolution; ++i)
    for (std::size_t j = 0; j < curve.resolution; ++j) c(i, j) = curve.server2_probability_cell(i, j);
  return c;
}

FiniteController FiniteController::build(const SystemConfig& config, DenseMatrix control,
                                         double epsilon) {
  FiniteController fc;
  fc.resolution = control.rows();
  fc.epsilon = epsilon;
  fc.control = std::move(control);
  for (Server s : {Server::one, Server::two}) {
    auto m = build_controller_matrices(fc.resolution, epsilon, config.server(s));
    const int k = index_of(s);
    fc.N[k] = std::move(m.N);
    fc.S[k] = std::move(m.S);
    fc.F[k] = std::move(m.F);
  }
  fc.validate();
  return fc;
}

void FiniteController::validate() const {
  if (resolution == 0) throw ContractError("FiniteController: resolution is zero");
  if (control.rows() != resolution || control.cols() != resolution)
    throw ContractError("FiniteController: control matrix is not M x M");
  for (double v : control.data())
    if (!(v >= 0.0 && v <= 1.0)) throw ContractError("FiniteController: control entry outside [0, 1]");
  for (int k = 0; k < 2; ++k)
    for (const auto* m : {&N[k], &S[k], &F[k]})
      if (m->size() != resolution)
        throw ContractError("FiniteController: transition matrix size mismatch");
}

}  // namespace infostab
