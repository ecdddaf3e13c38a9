#include "infostab/qbd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "infostab/error.hpp"

namespace infostab {

namespace {

void require_explicit(std::size_t resolution) {
  if (resolution > kMaxExplicitResolution)
    throw ResourceError("explicit QBD blocks are limited to M <= " +
                        std::to_string(kMaxExplicitResolution) + " (got M = " +
                        std::to_string(resolution) + "); use stability_bound");
}

DenseMatrix environment_kron(const SystemConfig& config) {
  return kronecker(config.server1.chain.transition_matrix(), config.server2.chain.transition_matrix());
}

// diag(d) * A
DenseMatrix scale_rows(const std::vector<double>& d, DenseMatrix a) {
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (double& v : a.row(r)) v *= d[r];
  return a;
}

double l1_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
  return s;
}

void normalize(std::vector<double>& v) {
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& x : v) x /= total;
}

// Solves pi (P - I) = 0, pi 1 = 1 by Gaussian elimination with partial pivoting.
std::vector<double> direct_stationary(const DenseMatrix& p) {
  const std::size_t n = p.rows();
  // Rows of the system are equations: (P^T - I) pi^T = 0, last one replaced by sum = 1.
  DenseMatrix a(n, n + 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = p(j, i) - (i == j ? 1.0 : 0.0);
  for (std::size_t j = 0; j < n; ++j) a(n - 1, j) = 1.0;
  a(n - 1, n) = 1.0;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    if (std::abs(a(pivot, col)) < 1e-300) throw DegenerateError("stationary solve: singular system");
    if (pivot != col)
      for (std::size_t c = 0; c <= n; ++c) std::swap(a(pivot, c), a(col, c));
    const double diag = a(col, col);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a(r, col) / diag;
      if (f == 0.0) continue;
      for (std::size_t c = col; c <= n; ++c) a(r, c) -= f * a(col, c);
    }
  }
  std::vector<double> pi(n);
  for (std::size_t i = 0; i < n; ++i) pi[i] = std::max(0.0, a(i, n) / a(i, i));
  normalize(pi);
  return pi;
}

template <class Step>
StationaryResult power_iterate(std::size_t n, Step&& step, const StationaryOptions& options) {
  StationaryResult out;
  std::vector<double> pi(n, 1.0 / static_cast<double>(n));
  for (long it = 1; it <= options.max_iters; ++it) {
    auto next = step(pi);
    normalize(next);
    const double residual = l1_distance(next, pi);
    pi = std::move(next);
    if (residual <= options.tol) {
      out.pi = std::move(pi);
      out.residual = residual;
      out.iterations = it;
      return out;
    }
    out.residual = residual;
  }
  out.pi = std::move(pi);
  out.iterations = options.max_iters;
  return out;
}

// Y = A^T X for an M x M block X (row-major).
void left_apply(const TransitionMatrix& a, const double* x, double* y, std::size_t m) {
  std::fill(y, y + m * m, 0.0);
  std::vector<double> colsum(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double* xi = x + i * m;
    for (std::size_t k = 0; k < m; ++k) colsum[k] += xi[k];
    for (const auto& [j, w] : a.sparse_row(i)) {
      double* yj = y + j * m;
      for (std::size_t k = 0; k < m; ++k) yj[k] += w * xi[k];
    }
  }
  const double u = a.uniform();
  if (u != 0.0)
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t k = 0; k < m; ++k) y[j * m + k] += u * colsum[k];
}

// Y = X B for an M x M block X (row-major).
void right_apply(const double* x, const TransitionMatrix& b, double* y, std::size_t m) {
  std::fill(y, y + m * m, 0.0);
  const double u = b.uniform();
  for (std::size_t i = 0; i < m; ++i) {
    const double* xi = x + i * m;
    double* yi = y + i * m;
    double rowsum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double v = xi[j];
      rowsum += v;
      if (v == 0.0) continue;
      for (const auto& [k, w] : b.sparse_row(j)) yi[k] += v * w;
    }
    if (u != 0.0)
      for (std::size_t k = 0; k < m; ++k) yi[k] += u * rowsum;
  }
}

}  // namespace

std::vector<double> control_diagonal(const DenseMatrix& control) {
  // vec stacks columns; the columns of C' are the rows of C.
  const std::size_t m = control.rows();
  DenseMatrix transposed(control.cols(), m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < control.cols(); ++j) transposed(j, i) = control(i, j);
  std::vector<double> out;
  out.reserve(m * control.cols());
  for (std::size_t col = 0; col < transposed.cols(); ++col)
    for (std::size_t row = 0; row < transposed.rows(); ++row) out.push_back(transposed(row, col));
  return out;
}

EnvBlocks build_env_blocks(const FiniteController& controller, const SystemConfig& config) {
  controller.validate();
  require_explicit(controller.resolution);
  const auto choose2 = control_diagonal(controller.control);
  std::vector<double> choose1(choose2.size());
  std::transform(choose2.begin(), choose2.end(), choose1.begin(), [](double c) { return 1.0 - c; });

  const auto N1 = controller.N[0].to_dense();
  const auto S1 = controller.S[0].to_dense();
  const auto F1 = controller.F[0].to_dense();
  const auto N2 = controller.N[1].to_dense();
  const auto S2 = controller.S[1].to_dense();
  const auto F2 = controller.F[1].to_dense();
  const auto via2_success = scale_rows(choose2, kronecker(N1, S2));
  const auto via2_failure = scale_rows(choose2, kronecker(N1, F2));
  const auto via1_success = scale_rows(choose1, kronecker(S1, N2));
  const auto via1_failure = scale_rows(choose1, kronecker(F1, N2));
  const auto idle = kronecker(N1, N2);

  EnvBlocks out;
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l) {
      const int r = 2 * k + l;
      const double m1 = config.server1.mu(k);
      const double m2 = config.server2.mu(l);
      out.S[r] = m2 * via2_success + m1 * via1_success;
      out.F[r] = (1.0 - m2) * via2_failure + (1.0 - m1) * via1_failure;
      out.N[r] = idle;
    }
  return out;
}

TildeBlocks assemble_tilde(const EnvBlocks& blocks, const SystemConfig& config) {
  const auto env = environment_kron(config);
  const std::size_t b = blocks.S[0].rows();
  auto assemble = [&](const std::array<DenseMatrix, 4>& diag) {
    DenseMatrix out(4 * b, 4 * b);
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 4; ++c) {
        const double w = env(r, c);
        if (w == 0.0) continue;
        for (std::size_t i = 0; i < b; ++i)
          for (std::size_t j = 0; j < b; ++j) out(r * b + i, c * b + j) = w * diag[r](i, j);
      }
    return out;
  };
  return {assemble(blocks.S), assemble(blocks.F), assemble(blocks.N)};
}

QbdBlocks level_blocks(const TildeBlocks& tilde, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ParameterError("lambda outside [0, 1]");
  const double lb = 1.0 - lambda;
  QbdBlocks q;
  q.S_tilde = tilde.S;
  q.F_tilde = tilde.F;
  q.N_tilde = tilde.N;
  q.A0_boundary = lb * tilde.N;
  q.A1_boundary = lambda * tilde.N;
  q.A_minus1 = lb * tilde.S;
  q.A_0 = lb * tilde.F + lambda * tilde.S;
  q.A_1 = lambda * tilde.F;
  return q;
}

QbdBlocks build_qbd(const FiniteController& controller, const SystemConfig& config) {
  return level_blocks(assemble_tilde(build_env_blocks(controller, config), config), config.lambda);
}

StationaryResult stationary_phase_distribution(const DenseMatrix& S_tilde, const DenseMatrix& F_tilde,
                                               const StationaryOptions& options) {
  const auto p = S_tilde + F_tilde;
  const std::size_t n = p.rows();
  auto result = power_iterate(n, [&](const std::vector<double>& pi) { return p.left_multiply(pi); },
                              options);
  if (result.residual <= options.tol) return result;
  if (n > options.direct_limit) {
    std::ostringstream os;
    os << "stationary phase distribution: power iteration stopped at residual " << result.residual;
    throw ConvergenceError(os.str(), result.residual, result.iterations);
  }
  result.pi = direct_stationary(p);
  result.residual = l1_distance(p.left_multiply(result.pi), result.pi);
  result.direct = true;
  return result;
}

PhaseChain::PhaseChain(const FiniteController& controller, const SystemConfig& config)
    : controller_(&controller),
      index_{controller.resolution},
      env_(environment_kron(config)),
      mu1_{config.server1.mu0, config.server1.mu1},
      mu2_{config.server2.mu0, config.server2.mu1} {
  controller.validate();
  const std::size_t m = controller.resolution;
  success_.resize(index_.size());
  failure_.resize(index_.size());
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l)
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
          const double c = controller.control(i, j);
          const std::size_t ph = index_(k, l, i, j);
          success_[ph] = c * mu2_[l] + (1.0 - c) * mu1_[k];
          failure_[ph] = c * (1.0 - mu2_[l]) + (1.0 - c) * (1.0 - mu1_[k]);
        }
}

std::vector<double> PhaseChain::apply(const std::vector<double>& pi) const {
  const auto& fc = *controller_;
  const std::size_t m = fc.resolution;
  const std::size_t b = m * m;
  if (pi.size() != 4 * b) throw ContractError("PhaseChain::apply: vector size mismatch");

  std::vector<double> x1(b), x2(b), t(b), u(b), y(b);
  std::array<std::vector<double>, 4> per_env;
  for (int r = 0; r < 4; ++r) {
    const int k = r / 2;
    const int l = r % 2;
    const double* x = pi.data() + r * b;
    for (std::size_t c = 0; c < b; ++c) {
      const double ch = fc.control.data()[c];
      x2[c] = x[c] * ch;
      x1[c] = x[c] * (1.0 - ch);
    }
    auto& acc = per_env[r];
    acc.assign(b, 0.0);
    // Server 2 serves: server 1 cell moves by N1, server 2 cell by S2 or F2.
    left_apply(fc.N[0], x2.data(), t.data(), m);
    right_apply(t.data(), fc.S[1], y.data(), m);
    for (std::size_t c = 0; c < b; ++c) acc[c] += mu2_[l] * y[c];
    right_apply(t.data(), fc.F[1], y.data(), m);
    for (std::size_t c = 0; c < b; ++c) acc[c] += (1.0 - mu2_[l]) * y[c];
    // Server 1 serves.
    right_apply(x1.data(), fc.N[1], u.data(), m);
    left_apply(fc.S[0], u.data(), y.data(), m);
    for (std::size_t c = 0; c < b; ++c) acc[c] += mu1_[k] * y[c];
    left_apply(fc.F[0], u.data(), y.data(), m);
    for (std::size_t c = 0; c < b; ++c) acc[c] += (1.0 - mu1_[k]) * y[c];
  }
  std::vector<double> out(4 * b, 0.0);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) {
      const double w = env_(r, c);
      if (w == 0.0) continue;
      double* o = out.data() + c * b;
      const auto& src = per_env[r];
      for (std::size_t e = 0; e < b; ++e) o[e] += w * src[e];
    }
  return out;
}

StationaryResult PhaseChain::stationary(const StationaryOptions& options) const {
  auto result = power_iterate(size(), [&](const std::vector<double>& pi) { return apply(pi); }, options);
  if (result.residual <= options.tol) return result;
  if (controller_->resolution <= kMaxExplicitResolution && size() <= options.direct_limit) {
    // Small chains fall back to a direct solve on the explicit matrix.
    DenseMatrix p(size(), size());
    for (std::size_t i = 0; i < size(); ++i) {
      std::vector<double> e(size(), 0.0);
      e[i] = 1.0;
      const auto row = apply(e);
      std::copy(row.begin(), row.end(), p.row(i).begin());
    }
    result.pi = direct_stationary(p);
    result.residual = l1_distance(apply(result.pi), result.pi);
    result.direct = true;
    return result;
  }
  std::ostringstream os;
  os << "stationary phase distribution: power iteration stopped at residual " << result.residual;
  throw ConvergenceError(os.str(), result.residual, result.iterations);
}

StabilityResult stability_bound(const FiniteController& controller, const SystemConfig& config,
                                const StationaryOptions& options) {
  const PhaseChain chain(controller, config);
  const auto st = chain.stationary(options);
  const auto& s = chain.success_rates();
  StabilityResult out;
  out.mu_star = std::inner_product(st.pi.begin(), st.pi.end(), s.begin(), 0.0);
  out.residual = st.residual;
  out.iterations = st.iterations;
  out.resolution = controller.resolution;
  out.epsilon = controller.epsilon;
  return out;
}

DriftReport drift_check(const FiniteController& controller, const SystemConfig& config,
                        const StationaryOptions& options) {
  const PhaseChain chain(controller, config);
  const auto st = chain.stationary(options);
  const auto& s = chain.success_rates();
  const auto& f = chain.failure_rates();
  const double lambda = config.lambda;
  DriftReport d;
  d.mu_star = std::inner_product(st.pi.begin(), st.pi.end(), s.begin(), 0.0);
  const double up = std::inner_product(st.pi.begin(), st.pi.end(), f.begin(), 0.0);
  d.drift = lambda * up - (1.0 - lambda) * d.mu_star;
  d.margin = d.mu_star - lambda;
  d.stable = d.drift < 0.0;
  return d;
}

double drift_from_blocks(const QbdBlocks& blocks, const std::vector<double>& pi) {
  const auto up = blocks.A_1.row_sums();
  const auto down = blocks.A_minus1.row_sums();
  double d = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) d += pi[i] * (up[i] - down[i]);
  return d;
}

}  // namespace infostab
