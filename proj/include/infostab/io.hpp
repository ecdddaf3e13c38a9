#pragma once

// JSON configuration and controller documents, CSV and JSON result writers.
// Numbers in CSV output carry 6 significant digits.

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "infostab/mdp.hpp"
#include "infostab/model.hpp"
#include "infostab/policy.hpp"
#include "infostab/qbd.hpp"

namespace infostab {

struct LoadedConfig {
  SystemConfig system;
  /// Explicit "initial_belief", else the gamma of a gamma/rho server (which
  /// stays defined even for a frozen chain).
  std::optional<std::array<double, 2>> initial_belief;
};

/// {lambda, server1: {gamma, rho, mu0, mu1} | {p, q, mu0, mu1}, server2: ...,
///  allow_unordered?, initial_belief?: [w1, w2]}. Throws ConfigError.
LoadedConfig config_from_json(const nlohmann::json& doc);
LoadedConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const SystemConfig& config);

nlohmann::json controller_to_json(const FiniteController& controller);
/// Throws ConfigError on missing fields, shape mismatches or rows that are
/// not stochastic.
FiniteController controller_from_json(const nlohmann::json& doc);
FiniteController load_controller(const std::filesystem::path& path);

/// Switching curve document {resolution, tie_value, thresholds}.
nlohmann::json curve_to_json(const SwitchingCurve& curve);
SwitchingCurve curve_from_json(const nlohmann::json& doc);

std::string format6(double v);

void write_value_table_csv(std::ostream& os, const ValueTable& table);
nlohmann::json value_table_summary(const ValueTable& table);
/// One row per omega1 cell: centre of the cell and the omega2 boundary where
/// server 2 takes over (1 when it never does).
void write_curve_csv(std::ostream& os, const SwitchingCurve& curve);

/// Non-zero entries as (row, col, value), 0-based.
void write_triplets_csv(std::ostream& os, const DenseMatrix& m);
nlohmann::json stability_summary(const StabilityResult& result);

/// Reads a whole file; ConfigError naming the path when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

}  // namespace infostab
