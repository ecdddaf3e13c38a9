// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed
// here. Usage: acceptance [--profile full|ci]
//   full  solver at 1000 cells (and the 200-cell CI check as well)
//   ci    solver at 200 cells only

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "infostab/filter_oracle.hpp"
#include "infostab/mdp.hpp"
#include "infostab/model.hpp"
#include "infostab/policy.hpp"
#include "infostab/qbd.hpp"
#include "infostab/simulate.hpp"

using namespace infostab;

namespace {

constexpr double kClosedFormTol = 1e-12;
constexpr double kTableTolFull = 0.002;
constexpr std::size_t kTableCellsFull = 1000;
constexpr double kTableTolCi = 0.005;
constexpr std::size_t kTableCellsCi = 200;
constexpr double kQbdTol = 0.002;
constexpr double kOrderingSe = 2.0;
constexpr double kIidTol = 0.003;
constexpr double kHighMemoryTol = 0.01;
constexpr double kFilterTol = 1e-10;
constexpr double kRviTol = 1e-4;
constexpr double kCrossSe = 3.0;
constexpr double kDriftTol = 1e-10;

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const Outcome& o) {
  std::printf("[%s] criterion %d: %s -- %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

void note(const std::string& text) {
  std::printf("       note: %s\n", text.c_str());
  std::fflush(stdout);
}

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

SolveOptions solve_opts(std::size_t cells) {
  SolveOptions o;
  o.cells = cells;
  o.tol = kRviTol;
  return o;
}

const double kTableRho1[4] = {0.2, 0.4, 0.6, 0.8};
// Columns: state, output, queue (lambda = 0.5); rho2 = 0.5.
const double kBenchmarkBounds[4][3] = {{0.5543, 0.5314, 0.5190},
                              {0.5673, 0.5400, 0.5231},
                              {0.5823, 0.5489, 0.5289},
                              {0.6009, 0.5647, 0.5360}};
const ObservationScheme kSolvable[3] = {ObservationScheme::state, ObservationScheme::output,
                                        ObservationScheme::queue};

Outcome closed_forms() {
  const auto c = benchmark_config(0.5, 0.5);
  const double no = mu_star_no(c), full = mu_star_full(c);
  const bool ok = std::abs(no - 0.5) <= kClosedFormTol && std::abs(full - 0.65) <= kClosedFormTol;
  return {ok, "mu_no=" + fmt(no, 15) + " mu_full=" + fmt(full, 15)};
}

Outcome benchmark_bounds(std::size_t cells, double tol) {
  double worst = 0.0;
  std::string where;
  for (int r = 0; r < 4; ++r) {
    const auto c = benchmark_config(kTableRho1[r], 0.5, 0.5);
    for (int s = 0; s < 3; ++s) {
      const double mu = solve_rvi(kSolvable[s], c, solve_opts(cells)).mu_star;
      const double err = std::abs(mu - kBenchmarkBounds[r][s]);
      if (err > worst) {
        worst = err;
        where = "rho1=" + fmt(kTableRho1[r]) + " " + std::string(to_string(kSolvable[s])) + " got " + fmt(mu) +
                " vs " + fmt(kBenchmarkBounds[r][s]);
      }
    }
  }
  return {worst <= tol, "M_cells=" + std::to_string(cells) + " max|err|=" + fmt(worst, 3) + " (tol " +
                            fmt(tol) + ", worst " + where + ")"};
}

Outcome qbd_limits() {
  const double expect[4] = {0.5179, 0.5359, 0.5539, 0.5815};
  const double rho[4] = {0.2, 0.4, 0.6, 0.8};
  double worst = 0.0;
  bool invariant = true;
  std::string values;
  for (int k = 0; k < 4; ++k) {
    const auto c = benchmark_config(rho[k], rho[k]);
    const auto fc = FiniteController::build(c, myopic_control_matrix(100), kDefaultSmoothing);
    const double a = stability_bound(fc, c.with_lambda(0.1)).mu_star;
    const double b = stability_bound(fc, c.with_lambda(0.5)).mu_star;
    const double d = stability_bound(fc, c.with_lambda(0.9)).mu_star;
    invariant = invariant && a == b && b == d;
    worst = std::max(worst, std::abs(b - expect[k]));
    values += (k ? "," : "") + fmt(b, 5);
  }
  return {worst <= kQbdTol && invariant,
          "M=100 mu*=[" + values + "] max|err|=" + fmt(worst, 3) + " lambda-invariant=" + (invariant ? "yes" : "no")};
}

Outcome scheme_ordering() {
  std::vector<double> rhos;
  for (int k = 0; k <= 9; ++k) rhos.push_back(0.1 * k);
  rhos.push_back(0.95);
  rhos.push_back(0.99);
  const ObservationScheme order[5] = {ObservationScheme::none, ObservationScheme::queue, ObservationScheme::output,
                                      ObservationScheme::state, ObservationScheme::full};
  std::vector<std::uint64_t> seeds(8);
  for (std::size_t k = 0; k < seeds.size(); ++k) seeds[k] = 1000 + k;
  const long long horizon = 1'000'000;

  bool ordered = true, iid = true, high = true;
  std::string bad;
  double state_high = 0.0;
  for (double rho : rhos) {
    const auto c = benchmark_config(rho, rho);
    Estimate est[5];
    for (int s = 0; s < 5; ++s) {
      const Policy p = order[s] == ObservationScheme::none ? Policy(best_mean_server(c))
                                                            : Policy(MyopicPolicy::from_config(c));
      est[s] = estimate_mu_star(c, order[s], p, horizon, seeds);
    }
    for (int s = 0; s + 1 < 5; ++s) {
      const double se = std::hypot(est[s].stderr_, est[s + 1].stderr_);
      if (est[s].mean > est[s + 1].mean + kOrderingSe * se) {
        ordered = false;
        bad += " rho=" + fmt(rho) + ":" + std::string(to_string(order[s])) + ">" +
               std::string(to_string(order[s + 1]));
      }
    }
    if (rho == 0.0)
      for (int s = 0; s < 4; ++s)
        if (std::abs(est[s].mean - 0.5) > kIidTol) {
          iid = false;
          bad += " rho=0:" + std::string(to_string(order[s])) + "=" + fmt(est[s].mean);
        }
    if (rho == rhos.back()) {
      state_high = est[3].mean;
      high = std::abs(state_high - 0.65) <= kHighMemoryTol;
    }
  }
  return {ordered && iid && high,
          std::string("ordering ") + (ordered ? "ok" : "violated") + ", rho=0 schemes II-V " + (iid ? "ok" : "off") +
              ", state at rho=" + fmt(rhos.back()) + " = " + fmt(state_high, 5) + bad};
}

Outcome filters(std::string& bayes_note) {
  FilterCheckOptions o;
  o.configs = 500;
  o.max_length = 8;
  std::string detail;
  bool ok = true;
  for (auto s : {ObservationScheme::state, ObservationScheme::output, ObservationScheme::queue}) {
    const auto r = compare_filter_with_oracle(s, o);
    ok = ok && r.max_error <= kFilterTol;
    detail += std::string(to_string(s)) + " max_err=" + fmt(r.max_error, 3) + " ";
  }
  o.rule = QueueUpdate::bayes;
  bayes_note = "queue scheme with the exact-Bayes zero-change update: max_err=" +
               fmt(compare_filter_with_oracle(ObservationScheme::queue, o).max_error, 3) +
               " (the default mixture update is the one the table values require)";
  return {ok, "500 configs, length<=8: " + detail};
}

Outcome corners(std::size_t cells) {
  // The table instances share mu across servers, so the strict ordering
  // never holds there; each row is also solved with server 2 widened to
  // (0.15, 0.85), which makes the ordering strict.
  bool ok = true;
  int checked = 0;
  std::string bad;
  for (double r1 : kTableRho1) {
    const auto base = benchmark_config(r1, 0.5, 0.5);
    const SystemConfig strict(0.5, base.server1, ServerParams(base.server2.chain, 0.15, 0.85));
    for (const SystemConfig* c : {&base, &strict}) {
      if (!c->strictly_ordered()) continue;
      for (auto s : kSolvable) {
        const auto t = solve_rvi(s, *c, solve_opts(cells));
        const auto lo = action_values_at(s, t.grid, t.h, *c, {0.0, 0.0});
        const auto hi = action_values_at(s, t.grid, t.h, *c, {1.0, 1.0});
        const std::size_t last = t.grid.cells - 1;
        const bool good = t.action(0, 0) == Server::one && t.action(last, last) == Server::two &&
                          lo.server1 > lo.server2 && hi.server2 > hi.server1;
        ++checked;
        if (!good) {
          ok = false;
          bad += " rho1=" + fmt(r1) + ":" + std::string(to_string(s));
        }
      }
    }
  }
  return {ok && checked > 0, std::to_string(checked) + " strictly ordered solves (M_cells=" + std::to_string(cells) +
                                 "), server 1 at (0,0) and server 2 at (1,1)" + bad};
}

Outcome scheme_iv_limits(std::size_t cells) {
  double worst = 0.0;
  for (double r1 : kTableRho1) {
    const auto rep = scheme_iv_limit_check(benchmark_config(r1, 0.5), solve_opts(cells));
    worst = std::max(worst, rep.max_mu_difference);
  }
  return {worst < 2 * kRviTol, "max |mu_IV(lambda in {0,1}) - mu_III| = " + fmt(worst, 3) + " over the table rows (M_cells=" +
                                   std::to_string(cells) + ")"};
}

Outcome cross_oracle() {
  const auto c = benchmark_config(0.6, 0.6);
  const auto fc = FiniteController::build(c, myopic_control_matrix(40), kDefaultSmoothing);
  const double bound = stability_bound(fc, c).mu_star;
  std::vector<std::uint64_t> seeds(10);
  for (std::size_t k = 0; k < seeds.size(); ++k) seeds[k] = 77 + k;
  const auto est = estimate_mu_star(c, ObservationScheme::output, fc, 1'000'000, seeds);
  const double z = std::abs(est.mean - bound) / est.stderr_;
  return {z <= kCrossSe, "bound=" + fmt(bound) + " sim=" + fmt(est.mean) + " se=" + fmt(est.stderr_, 3) +
                             " |z|=" + fmt(z, 3)};
}

Outcome drift_identity() {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double a = 0.02 + 0.3 * u(gen), b = a + (0.45 - a) * u(gen);
    const double cc = 0.55 + 0.3 * u(gen), d = cc + (0.98 - cc) * u(gen);
    const SystemConfig c(u(gen), ServerParams(ChannelChain(0.02 + 0.96 * u(gen), 0.02 + 0.96 * u(gen)), b, cc),
                         ServerParams(ChannelChain(0.02 + 0.96 * u(gen), 0.02 + 0.96 * u(gen)), a, d));
    const std::size_t m = 1 + gen() % 6;
    DenseMatrix control(m, m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) control(i, j) = u(gen);
    const auto fc = FiniteController::build(c, control, 0.001 + 0.3 * u(gen));
    const auto q = build_qbd(fc, c);
    const auto pi = stationary_phase_distribution(q.S_tilde, q.F_tilde).pi;
    const auto s1 = q.S_tilde.row_sums();
    double mu = 0.0;
    for (std::size_t k = 0; k < pi.size(); ++k) mu += pi[k] * s1[k];
    worst = std::max(worst, std::abs(drift_from_blocks(q, pi) - (c.lambda - mu)));
  }
  return {worst <= kDriftTol, "20 random controllers (M<=6, explicit blocks): max deviation " + fmt(worst, 3)};
}

}  // namespace

int main(int argc, char** argv) {
  std::string profile = "full";
  for (int k = 1; k < argc; ++k) {
    if (std::strcmp(argv[k], "--profile") == 0 && k + 1 < argc) profile = argv[++k];
  }
  if (profile != "full" && profile != "ci") {
    std::fprintf(stderr, "unknown profile '%s' (full or ci)\n", profile.c_str());
    return 2;
  }
  const bool full = profile == "full";
  const std::size_t cells = full ? kTableCellsFull : kTableCellsCi;
  std::printf("acceptance profile: %s\n", profile.c_str());

  auto guarded = [](std::function<Outcome()> f) -> Outcome {
    try {
      return f();
    } catch (const std::exception& e) {
      return {false, std::string("exception: ") + e.what()};
    }
  };

  report(1, "closed forms", guarded(closed_forms));
  report(2, "benchmark bounds via relative value iteration", guarded([&] {
           auto ci = benchmark_bounds(kTableCellsCi, kTableTolCi);
           if (!full) return ci;
           auto fl = benchmark_bounds(kTableCellsFull, kTableTolFull);
           return Outcome{ci.pass && fl.pass, fl.detail + "; " + ci.detail};
         }));
  report(3, "finite-controller bounds", guarded(qbd_limits));
  report(4, "simulated scheme ordering", guarded(scheme_ordering));
  std::string bayes_note;
  report(5, "filters vs enumeration oracle", guarded([&] { return filters(bayes_note); }));
  if (!bayes_note.empty()) note(bayes_note);
  report(6, "corner actions", guarded([&] { return corners(cells); }));
  report(7, "queue observation limits", guarded([&] { return scheme_iv_limits(cells); }));
  report(8, "simulation vs QBD bound", guarded(cross_oracle));
  report(9, "drift identity", guarded(drift_identity));

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
