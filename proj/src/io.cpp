#include "infostab/io.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "infostab/error.hpp"

namespace infostab {

using nlohmann::json;

namespace {

double number(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number())
    throw ConfigError(where + ": missing numeric field '" + key + "'");
  return it->get<double>();
}

ServerParams server_from_json(const json& doc, const std::string& where,
                              std::optional<double>& gamma_out) {
  if (!doc.is_object()) throw ConfigError(where + ": expected an object");
  const bool gr = doc.contains("gamma") || doc.contains("rho");
  const bool pq = doc.contains("p") || doc.contains("q");
  if (gr == pq)
    throw ConfigError(where + ": give exactly one of {gamma, rho} or {p, q}");
  try {
    ChannelChain chain = gr ? from_gamma_rho(number(doc, "gamma", where), number(doc, "rho", where))
                            : ChannelChain(number(doc, "p", where), number(doc, "q", where));
    if (gr) gamma_out = number(doc, "gamma", where);
    return ServerParams(chain, number(doc, "mu0", where), number(doc, "mu1", where));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

DenseMatrix matrix_from_json(const json& doc, const char* key, std::size_t n) {
  const auto it = doc.find(key);
  if (it == doc.end() || !it->is_array() || it->size() != n)
    throw ConfigError(std::string("controller: '") + key + "' must be an array of " +
                      std::to_string(n) + " rows");
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = (*it)[i];
    if (!row.is_array() || row.size() != n)
      throw ConfigError(std::string("controller: row ") + std::to_string(i) + " of '" + key +
                        "' must have " + std::to_string(n) + " entries");
    for (std::size_t j = 0; j < n; ++j) {
      if (!row[j].is_number()) throw ConfigError(std::string("controller: non-numeric entry in '") + key + "'");
      m(i, j) = row[j].get<double>();
    }
  }
  return m;
}

json matrix_to_json(const DenseMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

}  // namespace

LoadedConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
  for (const char* key : {"server1", "server2"})
    if (!doc.contains(key)) throw ConfigError(std::string("config: missing '") + key + "'");
  std::optional<double> g1, g2;
  auto s1 = server_from_json(doc["server1"], "server1", g1);
  auto s2 = server_from_json(doc["server2"], "server2", g2);
  const double lambda = doc.contains("lambda") ? number(doc, "lambda", "config") : 0.5;
  const bool allow = doc.value("allow_unordered", false);

  std::optional<std::array<double, 2>> init;
  if (doc.contains("initial_belief")) {
    const auto& ib = doc["initial_belief"];
    if (!ib.is_array() || ib.size() != 2 || !ib[0].is_number() || !ib[1].is_number())
      throw ConfigError("config: 'initial_belief' must be [omega1, omega2]");
    init = std::array<double, 2>{ib[0].get<double>(), ib[1].get<double>()};
  } else if (g1 && g2) {
    init = std::array<double, 2>{*g1, *g2};
  }
  try {
    return {SystemConfig(lambda, std::move(s1), std::move(s2), allow), init};
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

LoadedConfig load_config(const std::filesystem::path& path) {
  const auto text = read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path.string() + "': " + e.what());
  }
  return config_from_json(doc);
}

json config_to_json(const SystemConfig& config) {
  auto server = [](const ServerParams& s) {
    return json{{"p", s.chain.p()}, {"q", s.chain.q()}, {"mu0", s.mu0}, {"mu1", s.mu1}};
  };
  return json{{"lambda", config.lambda}, {"server1", server(config.server1)},
              {"server2", server(config.server2)}};
}

json controller_to_json(const FiniteController& controller) {
  return json{{"M", controller.resolution},
              {"epsilon", controller.epsilon},
              {"C", matrix_to_json(controller.control)},
              {"N1", matrix_to_json(controller.N[0].to_dense())},
              {"S1", matrix_to_json(controller.S[0].to_dense())},
              {"F1", matrix_to_json(controller.F[0].to_dense())},
              {"N2", matrix_to_json(controller.N[1].to_dense())},
              {"S2", matrix_to_json(controller.S[1].to_dense())},
              {"F2", matrix_to_json(controller.F[1].to_dense())}};
}

FiniteController controller_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("M") || !doc["M"].is_number_unsigned() || doc["M"].get<std::size_t>() == 0)
    throw ConfigError("controller: 'M' must be a positive integer");
  const auto m = doc["M"].get<std::size_t>();
  FiniteController fc;
  fc.resolution = m;
  fc.epsilon = doc.contains("epsilon") ? number(doc, "epsilon", "controller") : 0.0;
  fc.control = matrix_from_json(doc, "C", m);
  const char* names[2][3] = {{"N1", "S1", "F1"}, {"N2", "S2", "F2"}};
  try {
    for (int k = 0; k < 2; ++k) {
      fc.N[k] = TransitionMatrix::from_dense(matrix_from_json(doc, names[k][0], m));
      fc.S[k] = TransitionMatrix::from_dense(matrix_from_json(doc, names[k][1], m));
      fc.F[k] = TransitionMatrix::from_dense(matrix_from_json(doc, names[k][2], m));
    }
    fc.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("controller: ") + e.what());
  }
  return fc;
}

FiniteController load_controller(const std::filesystem::path& path) {
  const auto text = read_file(path);
  try {
    return controller_from_json(json::parse(text));
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path.string() + "': " + e.what());
  }
}

json curve_to_json(const SwitchingCurve& curve) {
  return json{{"resolution", curve.resolution}, {"tie_value", curve.tie_value},
              {"thresholds", curve.thresholds}};
}

SwitchingCurve curve_from_json(const json& doc) {
  try {
    SwitchingCurve c;
    c.resolution = doc.at("resolution").get<std::size_t>();
    c.tie_value = doc.value("tie_value", 1.0);
    c.thresholds = doc.at("thresholds").get<std::vector<std::size_t>>();
    if (c.resolution == 0 || c.thresholds.size() != c.resolution)
      throw ConfigError("curve: thresholds must have 'resolution' entries");
    for (std::size_t i = 0; i < c.resolution; ++i) {
      if (c.thresholds[i] > c.resolution) throw ConfigError("curve: threshold beyond resolution");
      if (i > 0 && c.thresholds[i] < c.thresholds[i - 1]) c.monotonicity_violations.push_back(i);
    }
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("curve: ") + e.what());
  }
}

std::string format6(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void write_value_table_csv(std::ostream& os, const ValueTable& table) {
  os << "# infostab value-table v1 scheme=" << to_string(table.scheme) << "\n";
  os << "omega1,omega2,h,action\n";
  const auto& g = table.grid;
  for (std::size_t i = 0; i < g.cells; ++i)
    for (std::size_t j = 0; j < g.cells; ++j)
      os << format6(g.center(i)) << ',' << format6(g.center(j)) << ',' << format6(table.value(i, j))
         << ',' << static_cast<int>(table.action(i, j)) << '\n';
}

json value_table_summary(const ValueTable& table) {
  return json{{"scheme", std::string(to_string(table.scheme))},
              {"mu_star", table.mu_star},
              {"iterations", table.iterations},
              {"span", table.residual_span},
              {"M_cells", table.grid.cells},
              {"tol", table.tol}};
}

void write_curve_csv(std::ostream& os, const SwitchingCurve& curve) {
  os << "# infostab switching-curve v1\n";
  os << "omega1,omega2_switch\n";
  const double m = static_cast<double>(curve.resolution);
  for (std::size_t i = 0; i < curve.resolution; ++i)
    os << format6((static_cast<double>(i) + 0.5) / m) << ','
       << format6(static_cast<double>(curve.thresholds[i]) / m) << '\n';
}

void write_triplets_csv(std::ostream& os, const DenseMatrix& m) {
  os << "# infostab triplets v1 rows=" << m.rows() << " cols=" << m.cols() << "\n";
  os << "row,col,value\n";
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0) os << i << ',' << j << ',' << format6(m(i, j)) << '\n';
}

json stability_summary(const StabilityResult& result) {
  return json{{"M", result.resolution},
              {"epsilon", result.epsilon},
              {"mu_star", result.mu_star},
              {"residual", result.residual},
              {"iterations", result.iterations}};
}

}  // namespace infostab
