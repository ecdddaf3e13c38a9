// Command-line front end: simulate, solve, qbd, sweep, validate.
//
// Exit codes: 0 ok, 1 validation failure, 2 usage or config error,
// 3 numerical non-convergence.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "infostab/belief.hpp"
#include "infostab/error.hpp"
#include "infostab/filter_oracle.hpp"
#include "infostab/io.hpp"
#include "infostab/mdp.hpp"
#include "infostab/model.hpp"
#include "infostab/policy.hpp"
#include "infostab/qbd.hpp"
#include "infostab/simulate.hpp"

namespace fs = std::filesystem;
using namespace infostab;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kValidationFailed = 1;
constexpr int kUsage = 2;
constexpr int kNoConvergence = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// System selection shared by all commands

struct SystemOptions {
  std::string config_path;
  double rho = 0.5;
  std::optional<double> rho2;
  std::optional<double> lambda;
};

void add_system_options(CLI::App* app, SystemOptions& o) {
  app->add_option("--config", o.config_path, "system config JSON (default: benchmark)");
  app->add_option("--rho", o.rho, "benchmark memory of server 1 (and server 2 unless --rho2)");
  app->add_option("--rho2", o.rho2, "benchmark memory of server 2");
  app->add_option("--lambda", o.lambda, "arrival rate");
}

struct System {
  SystemConfig config;
  std::array<double, 2> gamma;  // for rebuilding chains at another rho
  std::optional<std::array<double, 2>> initial_belief;
};

System load_system(const SystemOptions& o) {
  if (!o.config_path.empty()) {
    auto loaded = load_config(o.config_path);
    if (o.lambda) loaded.system = loaded.system.with_lambda(*o.lambda);
    std::array<double, 2> g{};
    for (int k = 0; k < 2; ++k) {
      const auto& chain = (k == 0 ? loaded.system.server1 : loaded.system.server2).chain;
      if (loaded.initial_belief)
        g[k] = (*loaded.initial_belief)[k];
      else if (chain.has_stationary())
        g[k] = chain.gamma();
      else
        g[k] = 0.5;
    }
    return {loaded.system, g, loaded.initial_belief};
  }
  return {benchmark_config(o.rho, o.rho2.value_or(o.rho), o.lambda.value_or(0.5)), {0.5, 0.5},
          std::array<double, 2>{0.5, 0.5}};
}

// Same servers with both memories replaced.
SystemConfig with_rho(const System& sys, double rho1, double rho2) {
  const auto& c = sys.config;
  return SystemConfig(c.lambda, ServerParams(from_gamma_rho(sys.gamma[0], rho1), c.server1.mu0, c.server1.mu1),
                      ServerParams(from_gamma_rho(sys.gamma[1], rho2), c.server2.mu0, c.server2.mu1),
                      !c.ordered());
}

struct Range {
  double from, to, step;
  std::vector<double> values() const {
    std::vector<double> v;
    const auto n = static_cast<long>(std::floor((to - from) / step + 1e-9));
    for (long k = 0; k <= n; ++k) v.push_back(from + static_cast<double>(k) * step);
    return v;
  }
};

Range parse_range(const std::string& text, bool integer_step_default = false) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad range '" + text + "' (expected from:to[:step])");
    }
  }
  if (parts.size() == 2 && integer_step_default) parts.push_back(1.0);
  if (parts.size() != 3) throw UsageError("bad range '" + text + "' (expected from:to:step)");
  const Range r{parts[0], parts[1], parts[2]};
  if (!(r.step > 0.0)) throw UsageError("range step must be positive");
  if (!(r.from <= r.to)) throw UsageError("range needs from <= to");
  return r;
}

// Output goes to --out when given, else stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ConfigError("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void write_json_file(const std::string& path, const json& doc) {
  Output out(path);
  out.stream() << doc.dump(2) << '\n';
}

std::vector<ObservationScheme> parse_scheme_list(const std::string& text) {
  if (text == "all")
    return {ObservationScheme::full, ObservationScheme::state, ObservationScheme::output,
            ObservationScheme::queue, ObservationScheme::none};
  std::vector<ObservationScheme> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_scheme(item));
  return out;
}

// Default policy per scheme: the myopic rule (on true states for full
// observation) and the best stationary server without observations.
Policy default_policy(ObservationScheme scheme, const SystemConfig& config) {
  if (scheme == ObservationScheme::none) return best_mean_server(config);
  return MyopicPolicy::from_config(config);
}

// Controller matrix from "myopic", a controller JSON (has "C") or a curve
// JSON (has "thresholds") resampled at cell centres.
DenseMatrix control_from_source(const std::string& source, std::size_t m, const SystemConfig& config) {
  if (source == "myopic") {
    const auto p = MyopicPolicy::from_config(config);
    if (p.slope == 1.0 && p.intercept == 0.0) return myopic_control_matrix(m);
    return curve_control_matrix(myopic_curve(config, m));
  }
  const json doc = [&] {
    try {
      return json::parse(read_file(source));
    } catch (const json::parse_error& e) {
      throw ConfigError("'" + source + "': " + e.what());
    }
  }();
  if (doc.contains("C")) {
    auto fc = controller_from_json(doc);
    if (fc.resolution != m)
      throw ConfigError("'" + source + "': controller has M = " + std::to_string(fc.resolution));
    return fc.control;
  }
  const auto curve = curve_from_json(doc);
  DenseMatrix c(m, m);
  const double md = static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      c(i, j) = curve.server2_probability({(static_cast<double>(i) + 0.5) / md,
                                           (static_cast<double>(j) + 0.5) / md});
  return c;
}

template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  std::vector<std::exception_ptr> errors(n);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < n; k += threads) {
          try {
            body(k);
          } catch (...) {
            errors[k] = std::current_exception();
          }
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<std::uint64_t> seed_list(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> s(count);
  std::iota(s.begin(), s.end(), first);
  return s;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
  SystemOptions sys;
  std::string scheme = "all";
  std::string rho_sweep;
  long long horizon = 5'000'000;
  long long warmup = kDefaultWarmup;
  std::size_t seeds = 4;
  std::uint64_t seed = 1;
  std::string mode = "saturated";
  std::string trace;
  std::string out;
  bool independent = false;
};

int cmd_simulate(const SimulateOptions& o) {
  const auto sys = load_system(o.sys);
  const auto schemes = parse_scheme_list(o.scheme);
  if (o.seeds == 0) throw UsageError("--seeds must be positive");

  if (!o.trace.empty() || o.mode == "queueing") {
    if (schemes.size() != 1) throw UsageError("single runs need exactly one --scheme");
    SimConfig sim{sys.config, schemes[0], o.horizon, o.seed,
                  o.mode == "queueing" ? SimMode::queueing : SimMode::saturated,
                  o.warmup, sys.initial_belief, QueueUpdate::mixture, !o.trace.empty()};
    const auto r = run(sim, default_policy(schemes[0], sys.config));
    if (!o.trace.empty()) {
      Output t(o.trace);
      write_trace_csv(t.stream(), r.trace);
    }
    Output out(o.out);
    out.stream() << "# infostab simulate-run v1\n"
                 << "scheme,throughput,mean_queue,queue_slope\n"
                 << to_string(schemes[0]) << ',' << format6(r.throughput) << ','
                 << format6(r.mean_queue) << ',' << format6(r.queue_slope) << '\n';
    return kOk;
  }

  std::vector<std::pair<double, double>> rhos;
  if (o.rho_sweep.empty())
    rhos.emplace_back(o.sys.rho, o.sys.rho2.value_or(o.sys.rho));
  else
    for (double r : parse_range(o.rho_sweep).values()) rhos.emplace_back(r, r);

  const auto seeds = seed_list(o.seed, o.seeds);
  struct Row {
    double rho;
    ObservationScheme scheme;
    Estimate est;
  };
  std::vector<Row> rows;
  for (auto s : schemes)
    for (const auto& r : rhos) rows.push_back({r.first, s, {}});
  parallel_for(rows.size(), 0, [&](std::size_t k) {
    auto& row = rows[k];
    const auto& rr = rhos[k % rhos.size()];
    const auto config = o.rho_sweep.empty() && o.sys.config_path.size() ? sys.config
                                                                        : with_rho(sys, rr.first, rr.second);
    EstimateOptions eo;
    eo.warmup = o.warmup;
    eo.initial_belief = std::array<double, 2>{sys.gamma[0], sys.gamma[1]};
    eo.common_random_numbers = !o.independent;
    eo.threads = 1;
    row.est = estimate_mu_star(config, row.scheme, default_policy(row.scheme, config), o.horizon, seeds, eo);
  });

  Output out(o.out);
  out.stream() << "# infostab simulate v1 horizon=" << o.horizon << " warmup=" << o.warmup << "\n"
               << "rho,scheme,throughput,stderr,seeds\n";
  for (const auto& row : rows)
    out.stream() << format6(row.rho) << ',' << to_string(row.scheme) << ',' << format6(row.est.mean)
                 << ',' << format6(row.est.stderr_) << ',' << seeds.size() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// solve

struct SolveCliOptions {
  SystemOptions sys;
  std::string scheme = "output";
  std::size_t cells = 1000;
  double tol = 1e-4;
  long max_iters = 100000;
  std::string queue_rule = "mixture";
  bool table1 = false;
  std::string emit_curve;
  bool emit_curve_flag = false;
  std::string curve_json;
  std::string table_csv;
  std::string summary;
  std::string out;
};

QueueUpdate parse_rule(const std::string& s) {
  if (s == "mixture") return QueueUpdate::mixture;
  if (s == "bayes") return QueueUpdate::bayes;
  throw UsageError("unknown --queue-rule '" + s + "' (mixture or bayes)");
}

void require_solvable(ObservationScheme scheme) {
  if (scheme == ObservationScheme::full || scheme == ObservationScheme::none)
    throw UsageError(std::string("scheme '") + std::string(to_string(scheme)) +
                     "' has a closed form; use validate");
}

int cmd_solve(const SolveCliOptions& o) {
  SolveOptions so;
  so.cells = o.cells;
  so.tol = o.tol;
  so.max_iters = o.max_iters;
  so.queue_rule = parse_rule(o.queue_rule);

  if (o.table1) {
    const std::vector<double> rho1{0.2, 0.4, 0.6, 0.8};
    const std::vector<ObservationScheme> schemes{ObservationScheme::state, ObservationScheme::output,
                                                 ObservationScheme::queue};
    std::vector<double> mu(rho1.size() * schemes.size());
    parallel_for(mu.size(), 0, [&](std::size_t k) {
      const auto config = benchmark_config(rho1[k / 3], 0.5, 0.5);
      mu[k] = solve_rvi(schemes[k % 3], config, so).mu_star;
    });
    Output out(o.out);
    out.stream() << "# infostab table1 v1 M_cells=" << o.cells << " tol=" << o.tol << " lambda=0.5\n"
                 << "rho1,rho2,mu_state,mu_output,mu_queue\n";
    for (std::size_t r = 0; r < rho1.size(); ++r)
      out.stream() << format6(rho1[r]) << ",0.5," << format6(mu[3 * r]) << ',' << format6(mu[3 * r + 1])
                   << ',' << format6(mu[3 * r + 2]) << '\n';
    return kOk;
  }

  const auto scheme = parse_scheme(o.scheme);
  require_solvable(scheme);
  const auto sys = load_system(o.sys);
  const auto table = solve_rvi(scheme, sys.config, so);
  const auto summary = value_table_summary(table);
  if (o.summary.empty()) {
    if (!o.emit_curve_flag || !o.emit_curve.empty()) std::cout << summary.dump(2) << '\n';
  } else {
    write_json_file(o.summary, summary);
  }
  if (!o.table_csv.empty()) {
    Output t(o.table_csv);
    write_value_table_csv(t.stream(), table);
  }
  if (o.emit_curve_flag || !o.curve_json.empty()) {
    const auto curve = extract_switching_curve(table);
    if (o.emit_curve_flag) {
      Output c(o.emit_curve);
      write_curve_csv(c.stream(), curve);
    }
    if (!o.curve_json.empty()) write_json_file(o.curve_json, curve_to_json(curve));
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// qbd

struct QbdOptions {
  SystemOptions sys;
  std::string policy = "myopic";
  std::size_t m = 0;
  std::string m_sweep;
  double epsilon = kDefaultSmoothing;
  std::string export_dir;
  std::string summary;
  std::string out;
};

int cmd_qbd(const QbdOptions& o) {
  const auto sys = load_system(o.sys);
  std::vector<std::size_t> ms;
  if (!o.m_sweep.empty()) {
    for (double v : parse_range(o.m_sweep, true).values()) {
      if (v < 1.0 || v != std::floor(v)) throw UsageError("--M-sweep values must be positive integers");
      ms.push_back(static_cast<std::size_t>(v));
    }
  } else {
    ms.push_back(o.m == 0 ? 100 : o.m);
  }

  std::vector<StabilityResult> results(ms.size());
  // Check every file-based policy before spawning workers so that a bad file
  // reports once.
  (void)control_from_source(o.policy, ms.front(), sys.config);
  parallel_for(ms.size(), 0, [&](std::size_t k) {
    const auto fc = FiniteController::build(sys.config, control_from_source(o.policy, ms[k], sys.config),
                                            o.epsilon);
    results[k] = stability_bound(fc, sys.config);
  });

  Output out(o.out);
  out.stream() << "# infostab qbd v1 epsilon=" << format6(o.epsilon) << " policy=" << o.policy << "\n"
               << "M,mu_star\n";
  for (std::size_t k = 0; k < ms.size(); ++k)
    out.stream() << ms[k] << ',' << format6(results[k].mu_star) << '\n';

  if (!o.summary.empty()) write_json_file(o.summary, stability_summary(results.back()));
  if (!o.export_dir.empty()) {
    const auto fc = FiniteController::build(
        sys.config, control_from_source(o.policy, ms.back(), sys.config), o.epsilon);
    const auto blocks = build_qbd(fc, sys.config);
    fs::create_directories(o.export_dir);
    const std::pair<const char*, const DenseMatrix*> mats[] = {
        {"S_tilde", &blocks.S_tilde}, {"F_tilde", &blocks.F_tilde}, {"N_tilde", &blocks.N_tilde},
        {"A_minus1", &blocks.A_minus1}, {"A_0", &blocks.A_0},      {"A_1", &blocks.A_1},
        {"A0_boundary", &blocks.A0_boundary}, {"A1_boundary", &blocks.A1_boundary}};
    for (const auto& [name, m] : mats) {
      Output f((fs::path(o.export_dir) / (std::string(name) + ".csv")).string());
      write_triplets_csv(f.stream(), *m);
    }
    write_json_file((fs::path(o.export_dir) / "controller.json").string(), controller_to_json(fc));
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepOptions {
  SystemOptions sys;
  std::string param = "rho";
  double from = 0.0, to = 0.0, step = 0.1;
  std::string method = "rvi";
  std::string scheme = "output";
  std::size_t cells = 200;
  std::size_t m = 100;
  long long horizon = 1'000'000;
  std::size_t seeds = 4;
  std::string out;
};

int cmd_sweep(const SweepOptions& o) {
  const Range range{o.from, o.to, o.step};
  if (!(range.step > 0.0)) throw UsageError("--step must be positive");
  if (!(range.from <= range.to)) throw UsageError("--from must not exceed --to");
  if (o.param != "rho" && o.param != "rho1" && o.param != "rho2" && o.param != "lambda")
    throw UsageError("--param must be rho, rho1, rho2 or lambda");
  if (o.method != "rvi" && o.method != "qbd" && o.method != "simulate")
    throw UsageError("--method must be rvi, qbd or simulate");
  const auto sys = load_system(o.sys);
  const auto scheme = parse_scheme(o.scheme);
  if (o.method == "rvi") require_solvable(scheme);
  if (o.method == "qbd" && scheme != ObservationScheme::output)
    throw UsageError("finite-state controllers are defined for the output scheme only");

  const auto values = range.values();
  std::vector<double> mu(values.size()), se(values.size(), 0.0);
  const auto base = to_gamma_rho(sys.config.server1.chain);
  const auto base2 = to_gamma_rho(sys.config.server2.chain);
  parallel_for(values.size(), 0, [&](std::size_t k) {
    const double v = values[k];
    SystemConfig config = sys.config;
    if (o.param == "lambda")
      config = config.with_lambda(v);
    else if (o.param == "rho")
      config = with_rho(sys, v, v);
    else if (o.param == "rho1")
      config = with_rho(sys, v, base2.rho);
    else
      config = with_rho(sys, base.rho, v);

    if (o.method == "rvi") {
      SolveOptions so;
      so.cells = o.cells;
      mu[k] = solve_rvi(scheme, config, so).mu_star;
    } else if (o.method == "qbd") {
      const auto fc = FiniteController::build(config, control_from_source("myopic", o.m, config),
                                              kDefaultSmoothing);
      mu[k] = stability_bound(fc, config).mu_star;
    } else {
      EstimateOptions eo;
      eo.initial_belief = std::array<double, 2>{sys.gamma[0], sys.gamma[1]};
      eo.threads = 1;
      const auto est = estimate_mu_star(config, scheme, default_policy(scheme, config), o.horizon,
                                        seed_list(1, o.seeds), eo);
      mu[k] = est.mean;
      se[k] = est.stderr_;
    }
  });

  Output out(o.out);
  out.stream() << "# infostab sweep v1 method=" << o.method << " scheme=" << to_string(scheme) << "\n"
               << o.param << ",mu_star,stderr\n";
  for (std::size_t k = 0; k < values.size(); ++k)
    out.stream() << format6(values[k]) << ',' << format6(mu[k]) << ',' << format6(se[k]) << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// validate

struct ValidateOptions {
  SystemOptions sys;
  bool quick = false;
};

int cmd_validate(const ValidateOptions& o) {
  const auto sys = load_system(o.sys);
  const auto& config = sys.config;
  struct Check {
    std::string name;
    bool pass;
    std::string detail;
  };
  std::vector<Check> checks;
  auto add = [&](std::string name, bool pass, std::string detail) {
    checks.push_back({std::move(name), pass, std::move(detail)});
  };

  // Closed forms against an independent computation from the raw parameters.
  {
    const double g1 = config.server1.chain.gamma(), g2 = config.server2.chain.gamma();
    const double m1 = (1 - g1) * config.server1.mu0 + g1 * config.server1.mu1;
    const double m2 = (1 - g2) * config.server2.mu0 + g2 * config.server2.mu1;
    double full = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        full += (a ? g1 : 1 - g1) * (b ? g2 : 1 - g2) * std::max(config.server1.mu(a), config.server2.mu(b));
    const double e_no = std::abs(mu_star_no(config) - std::max(m1, m2));
    const double e_full = std::abs(mu_star_full(config) - full);
    add("closed_form_no", e_no < 1e-12, "mu*=" + format6(mu_star_no(config)));
    add("closed_form_full", e_full < 1e-12, "mu*=" + format6(mu_star_full(config)));
  }

  // Recursive filters against brute-force enumeration.
  FilterCheckOptions fo;
  fo.configs = o.quick ? 60 : 500;
  for (auto s : {ObservationScheme::full, ObservationScheme::state, ObservationScheme::output,
                 ObservationScheme::none}) {
    const auto r = compare_filter_with_oracle(s, fo);
    add(std::string("filter_") + std::string(to_string(s)), r.max_error < 1e-10,
        "max_err=" + format6(r.max_error));
  }
  {
    fo.rule = QueueUpdate::bayes;
    const auto r = compare_filter_with_oracle(ObservationScheme::queue, fo);
    add("filter_queue_bayes", r.max_error < 1e-10, "max_err=" + format6(r.max_error));
    fo.rule = QueueUpdate::mixture;
    const auto m = compare_filter_with_oracle(ObservationScheme::queue, fo);
    std::cout << "# info: mixture queue update deviates from the exact posterior by up to "
              << format6(m.max_error) << "\n";
  }

  // Scheme ordering with the solver.
  SolveOptions so;
  so.cells = o.quick ? 100 : 400;
  const double slack = 2 * so.tol;
  std::array<double, 3> mu{};
  const ObservationScheme solvable[] = {ObservationScheme::state, ObservationScheme::output,
                                        ObservationScheme::queue};
  parallel_for(3, 0, [&](std::size_t k) { mu[k] = solve_rvi(solvable[k], config, so).mu_star; });
  const double no = mu_star_no(config), full = mu_star_full(config);
  const bool ordered = no <= mu[2] + slack && mu[2] <= mu[1] + slack && mu[1] <= mu[0] + slack &&
                       mu[0] <= full + slack;
  add("ordering", ordered,
      format6(no) + "<=" + format6(mu[2]) + "<=" + format6(mu[1]) + "<=" + format6(mu[0]) + "<=" + format6(full));

  std::cout << "check,result,detail\n";
  bool all = true;
  for (const auto& c : checks) {
    std::cout << c.name << ',' << (c.pass ? "PASS" : "FAIL") << ',' << c.detail << '\n';
    all = all && c.pass;
  }
  return all ? kOk : kValidationFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stability regions of a two-server Markov-modulated queue under partial observation"};
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* s = app.add_subcommand("simulate", "Monte Carlo throughput estimates");
  add_system_options(s, sim.sys);
  s->add_option("--scheme", sim.scheme, "full|state|output|queue|none|all or a comma list");
  s->add_option("--rho-sweep", sim.rho_sweep, "from:to:step applied to both servers");
  s->add_option("--horizon", sim.horizon, "steps per replication");
  s->add_option("--warmup", sim.warmup, "discarded initial steps");
  s->add_option("--seeds", sim.seeds, "replications per point");
  s->add_option("--seed", sim.seed, "first seed");
  s->add_option("--mode", sim.mode, "saturated|queueing")->check(CLI::IsMember({"saturated", "queueing"}));
  s->add_option("--trace", sim.trace, "write a per-step trace CSV (single run)");
  s->add_flag("--independent", sim.independent, "do not share random numbers across schemes");
  s->add_option("--out", sim.out, "CSV output path");

  SolveCliOptions sol;
  auto* v = app.add_subcommand("solve", "Relative value iteration on the belief grid");
  add_system_options(v, sol.sys);
  v->add_option("--scheme", sol.scheme, "state|output|queue");
  v->add_option("--cells", sol.cells, "grid cells per axis");
  v->add_option("--tol", sol.tol, "span tolerance");
  v->add_option("--max-iters", sol.max_iters, "sweep limit");
  v->add_option("--queue-rule", sol.queue_rule, "mixture|bayes update on a zero queue change");
  v->add_flag("--table1", sol.table1, "solve the four benchmark rows for all three schemes");
  v->add_option("--emit-curve", sol.emit_curve, "write the switching curve CSV (stdout when empty)")
      ->expected(0, 1);
  v->add_option("--curve-json", sol.curve_json, "write the switching curve as JSON");
  v->add_option("--table-csv", sol.table_csv, "write omega1,omega2,h,action");
  v->add_option("--summary", sol.summary, "write the JSON summary here instead of stdout");
  v->add_option("--out", sol.out, "CSV output path for --table1");

  QbdOptions q;
  auto* b = app.add_subcommand("qbd", "Stability bound of a finite-state controller");
  add_system_options(b, q.sys);
  b->add_option("--policy", q.policy, "myopic, a controller JSON or a curve JSON");
  b->add_option("--M", q.m, "controller resolution");
  b->add_option("--M-sweep", q.m_sweep, "from:to[:step]");
  b->add_option("--epsilon", q.epsilon, "smoothing of the placement matrices");
  b->add_option("--export-blocks", q.export_dir, "directory for triplet CSVs (M <= 12)");
  b->add_option("--summary", q.summary, "JSON summary of the last M");
  b->add_option("--out", q.out, "CSV output path");

  SweepOptions w;
  auto* sw = app.add_subcommand("sweep", "Sweep one parameter with a chosen method");
  add_system_options(sw, w.sys);
  sw->add_option("--param", w.param, "rho|rho1|rho2|lambda");
  sw->add_option("--from", w.from, "first value")->required();
  sw->add_option("--to", w.to, "last value")->required();
  sw->add_option("--step", w.step, "increment");
  sw->add_option("--method", w.method, "rvi|qbd|simulate");
  sw->add_option("--scheme", w.scheme, "observation scheme (rvi, simulate)");
  sw->add_option("--cells", w.cells, "grid cells per axis (rvi)");
  sw->add_option("--M", w.m, "controller resolution (qbd)");
  sw->add_option("--horizon", w.horizon, "steps per replication (simulate)");
  sw->add_option("--seeds", w.seeds, "replications per point (simulate)");
  sw->add_option("--out", w.out, "CSV output path");

  ValidateOptions val;
  auto* va = app.add_subcommand("validate", "Closed-form, filter and ordering checks");
  add_system_options(va, val.sys);
  va->add_flag("--quick", val.quick, "reduced sample sizes and grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*s) return cmd_simulate(sim);
    if (*v) {
      sol.emit_curve_flag = v->count("--emit-curve") > 0;
      return cmd_solve(sol);
    }
    if (*b) return cmd_qbd(q);
    if (*sw) return cmd_sweep(w);
    if (*va) return cmd_validate(val);
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << " (final span " << e.residual() << " after " << e.iterations()
              << " iterations)\n";
    return kNoConvergence;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ResourceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationFailed;
  }
  return kUsage;
}
