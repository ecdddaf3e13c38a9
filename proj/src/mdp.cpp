#include "infostab/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "infostab/error.hpp"

namespace infostab {

namespace {

// Linear interpolation weights of a set of query beliefs on the cell centres.
struct Interp {
  std::vector<std::size_t> lo;
  std::vector<double> w;  // weight of lo + 1
};

Interp make_interp(const BeliefGrid& grid, const std::vector<double>& points) {
  const std::size_t m = grid.cells;
  Interp out;
  out.lo.resize(points.size());
  out.w.resize(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (m == 1) {
      out.lo[k] = 0;
      out.w[k] = 0.0;
      continue;
    }
    const double t =
        std::clamp(points[k] * static_cast<double>(m) - 0.5, 0.0, static_cast<double>(m - 1));
    const auto lo = std::min(static_cast<std::size_t>(t), m - 2);
    out.lo[k] = lo;
    out.w[k] = t - static_cast<double>(lo);
  }
  return out;
}

// out(i, j) = h(f_i, j): interpolate along the omega1 axis.
std::vector<double> along_first(const BeliefGrid& grid, std::span<const double> h, const Interp& f) {
  const std::size_t m = grid.cells;
  std::vector<double> out(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    const double* a = h.data() + f.lo[i] * m;
    const double* b = m > 1 ? a + m : a;
    const double w = f.w[i];
    double* o = out.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) o[j] = (1.0 - w) * a[j] + w * b[j];
  }
  return out;
}

// out(i, j) = h(i, g_j): interpolate along the omega2 axis.
std::vector<double> along_second(const BeliefGrid& grid, std::span<const double> h,
                                 const Interp& g) {
  const std::size_t m = grid.cells;
  std::vector<double> out(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = h.data() + i * m;
    double* o = out.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t lo = g.lo[j];
      const std::size_t hi = m > 1 ? lo + 1 : lo;
      o[j] = (1.0 - g.w[j]) * row[lo] + g.w[j] * row[hi];
    }
  }
  return out;
}

// Successor beliefs of the chosen server with their probabilities, evaluated
// at one belief w of that server.
struct Branch {
  double prob;
  double next;
};

struct Branches {
  Branch items[3];
  int count = 0;
};

Branches chosen_branches(ObservationScheme scheme, double w, const ServerParams& srv, double lambda,
                         QueueUpdate rule) {
  Branches b;
  const double r = success_prob(w, srv);
  switch (scheme) {
    case ObservationScheme::state:
      b.items[0] = {1.0 - w, tau_n(0.0, srv)};
      b.items[1] = {w, tau_n(1.0, srv)};
      b.count = 2;
      break;
    case ObservationScheme::output:
      b.items[0] = {1.0 - r, r < 1.0 ? tau_f(w, srv) : 0.0};
      b.items[1] = {r, r > 0.0 ? tau_s(w, srv) : 0.0};
      b.count = 2;
      break;
    case ObservationScheme::queue: {
      b.items[0] = {lambda * (1.0 - r), r < 1.0 ? tau_f(w, srv) : 0.0};
      b.items[1] = {(1.0 - lambda) * r, r > 0.0 ? tau_s(w, srv) : 0.0};
      const double p0 = (1.0 - lambda) * (1.0 - r) + lambda * r;
      b.items[2] = {p0, p0 > 0.0 ? tau_c(w, srv, lambda, rule) : 0.0};
      b.count = 3;
      break;
    }
    default:
      throw ContractError("bellman_backup: scheme " + std::string(to_string(scheme)) +
                          " has a closed form; no dynamic program is solved");
  }
  return b;
}

void require_solvable(ObservationScheme scheme) {
  if (scheme == ObservationScheme::full || scheme == ObservationScheme::none)
    throw ContractError("scheme " + std::string(to_string(scheme)) +
                        " has a closed form; no dynamic program is solved");
}

}  // namespace

BackupResult bellman_backup(ObservationScheme scheme, const BeliefGrid& grid,
                            std::span<const double> h, const SystemConfig& config,
                            QueueUpdate rule) {
  require_solvable(scheme);
  const std::size_t m = grid.cells;
  if (m == 0 || h.size() != grid.size()) throw ContractError("bellman_backup: h does not match grid");
  const auto& s1 = config.server1;
  const auto& s2 = config.server2;
  const double lambda = config.lambda;

  std::vector<double> centers(m);
  for (std::size_t k = 0; k < m; ++k) centers[k] = grid.center(k);

  // Per-cell branches of each server's own belief; the other server moves by tau_n.
  std::vector<Branches> br1(m), br2(m);
  std::vector<double> idle1(m), idle2(m);
  for (std::size_t k = 0; k < m; ++k) {
    br1[k] = chosen_branches(scheme, centers[k], s1, lambda, rule);
    br2[k] = chosen_branches(scheme, centers[k], s2, lambda, rule);
    idle1[k] = tau_n(centers[k], s1);
    idle2[k] = tau_n(centers[k], s2);
  }
  const int nb = br1[0].count;

  BackupResult out;
  out.value1.assign(m * m, 0.0);
  out.value2.assign(m * m, 0.0);

  // Action 1: server 2 idles, so interpolate along omega2 once and reuse.
  const auto h_idle2 = along_second(grid, h, make_interp(grid, idle2));
  for (int k = 0; k < nb; ++k) {
    std::vector<double> pts(m);
    for (std::size_t i = 0; i < m; ++i) pts[i] = br1[i].items[k].next;
    const auto shifted = along_first(grid, h_idle2, make_interp(grid, pts));
    for (std::size_t i = 0; i < m; ++i) {
      const double prob = br1[i].items[k].prob;
      if (prob == 0.0) continue;
      double* v = out.value1.data() + i * m;
      const double* s = shifted.data() + i * m;
      for (std::size_t j = 0; j < m; ++j) v[j] += prob * s[j];
    }
  }
  // Action 2: server 1 idles.
  const auto h_idle1 = along_first(grid, h, make_interp(grid, idle1));
  for (int k = 0; k < nb; ++k) {
    std::vector<double> pts(m);
    for (std::size_t j = 0; j < m; ++j) pts[j] = br2[j].items[k].next;
    const auto shifted = along_second(grid, h_idle1, make_interp(grid, pts));
    for (std::size_t i = 0; i < m; ++i) {
      double* v = out.value2.data() + i * m;
      const double* s = shifted.data() + i * m;
      for (std::size_t j = 0; j < m; ++j) v[j] += br2[j].items[k].prob * s[j];
    }
  }

  out.next.resize(m * m);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t c = i * m + j;
      out.value1[c] += success_prob(centers[i], s1);
      out.value2[c] += success_prob(centers[j], s2);
      out.next[c] = std::max(out.value1[c], out.value2[c]);
      const double gain = out.next[c] - h[c];
      lo = std::min(lo, gain);
      hi = std::max(hi, gain);
    }
  out.span = hi - lo;
  out.mu_estimate = 0.5 * (hi + lo);
  return out;
}

double interpolate(const BeliefGrid& grid, std::span<const double> h, const BeliefPair& at) {
  const auto f = make_interp(grid, {at.omega1});
  const auto g = make_interp(grid, {at.omega2});
  const std::size_t m = grid.cells;
  auto row = [&](std::size_t i) {
    const std::size_t hi = m > 1 ? g.lo[0] + 1 : g.lo[0];
    return (1.0 - g.w[0]) * h[i * m + g.lo[0]] + g.w[0] * h[i * m + hi];
  };
  const std::size_t ihi = m > 1 ? f.lo[0] + 1 : f.lo[0];
  return (1.0 - f.w[0]) * row(f.lo[0]) + f.w[0] * row(ihi);
}

ActionValues action_values_at(ObservationScheme scheme, const BeliefGrid& grid,
                              std::span<const double> h, const SystemConfig& config,
                              const BeliefPair& at, QueueUpdate rule) {
  require_solvable(scheme);
  const auto& s1 = config.server1;
  const auto& s2 = config.server2;
  ActionValues v{success_prob(at.omega1, s1), success_prob(at.omega2, s2)};
  const auto b1 = chosen_branches(scheme, at.omega1, s1, config.lambda, rule);
  const auto b2 = chosen_branches(scheme, at.omega2, s2, config.lambda, rule);
  const double idle1 = tau_n(at.omega1, s1);
  const double idle2 = tau_n(at.omega2, s2);
  for (int k = 0; k < b1.count; ++k) {
    if (b1.items[k].prob > 0.0) v.server1 += b1.items[k].prob * interpolate(grid, h, {b1.items[k].next, idle2});
    if (b2.items[k].prob > 0.0) v.server2 += b2.items[k].prob * interpolate(grid, h, {idle1, b2.items[k].next});
  }
  return v;
}

ValueTable solve_rvi(ObservationScheme scheme, const SystemConfig& config,
                     const SolveOptions& options) {
  require_solvable(scheme);
  if (options.cells < 2) throw ParameterError("solve_rvi: need at least 2 cells per axis");
  if (!(options.tol > 0.0)) throw ParameterError("solve_rvi: tolerance must be positive");

  ValueTable table;
  table.scheme = scheme;
  table.grid = BeliefGrid{options.cells};
  table.tol = options.tol;
  const auto& grid = table.grid;
  auto reference = [&](const ServerParams& s) {
    return s.chain.has_stationary() ? grid.cell_of(s.chain.gamma()) : grid.cells / 2;
  };
  table.reference1 = reference(config.server1);
  table.reference2 = reference(config.server2);
  const std::size_t ref = table.reference1 * grid.cells + table.reference2;

  std::vector<double> h(grid.size(), 0.0);
  for (long it = 1; it <= options.max_iters; ++it) {
    auto step = bellman_backup(scheme, grid, h, config, options.queue_rule);
    const double offset = step.next[ref];
    for (std::size_t c = 0; c < h.size(); ++c) h[c] = step.next[c] - offset;
    table.span_history.push_back(step.span);
    if (options.progress) options.progress(it, step.span, step.mu_estimate);

    if (step.span < options.tol) {
      table.h = std::move(h);
      table.server2.resize(grid.size());
      for (std::size_t c = 0; c < grid.size(); ++c) table.server2[c] = step.value2[c] > step.value1[c];
      table.mu_star = step.mu_estimate;
      table.residual_span = step.span;
      table.iterations = it;
      return table;
    }
  }
  const double last = table.span_history.empty() ? 0.0 : table.span_history.back();
  std::ostringstream os;
  os << "relative value iteration did not reach span " << options.tol << " within "
     << options.max_iters << " sweeps (final span " << last << ")";
  throw ConvergenceError(os.str(), last, options.max_iters);
}

SwitchingCurve extract_switching_curve(const ValueTable& table) {
  return curve_from_actions(table.grid.cells, table.server2, 1.0);
}

double sandwich_fraction(const SwitchingCurve& inner, const SwitchingCurve& a,
                         const SwitchingCurve& b, std::size_t slack) {
  const std::size_t m = inner.resolution;
  if (a.resolution != m || b.resolution != m)
    throw ContractError("sandwich_fraction: curves have different resolutions");
  if (m == 0) return 1.0;
  std::size_t inside = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto lo = std::min(a.thresholds[i], b.thresholds[i]);
    const auto hi = std::max(a.thresholds[i], b.thresholds[i]);
    const auto x = inner.thresholds[i];
    if (x + slack >= lo && x <= hi + slack) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(m);
}

QueueLimitReport scheme_iv_limit_check(const SystemConfig& config, const SolveOptions& options) {
  const auto output = solve_rvi(ObservationScheme::output, config, options);
  const auto q0 = solve_rvi(ObservationScheme::queue, config.with_lambda(0.0), options);
  const auto q1 = solve_rvi(ObservationScheme::queue, config.with_lambda(1.0), options);
  auto disagreement = [&](const ValueTable& t) {
    std::size_t diff = 0;
    for (std::size_t c = 0; c < t.server2.size(); ++c) diff += t.server2[c] != output.server2[c];
    return static_cast<double>(diff) / static_cast<double>(t.server2.size());
  };
  QueueLimitReport r;
  r.mu_output = output.mu_star;
  r.mu_queue_lambda0 = q0.mu_star;
  r.mu_queue_lambda1 = q1.mu_star;
  r.max_mu_difference =
      std::max(std::abs(q0.mu_star - output.mu_star), std::abs(q1.mu_star - output.mu_star));
  r.disagreement_lambda0 = disagreement(q0);
  r.disagreement_lambda1 = disagreement(q1);
  return r;
}

}  // namespace infostab
