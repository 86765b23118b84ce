#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "netcbc/augment.hpp"
#include "netcbc/certificate.hpp"
#include "netcbc/lmi.hpp"
#include "netcbc/netsim.hpp"
#include "netcbc/sysmodel.hpp"

namespace netcbc {

using json = nlohmann::json;

/// Everything a config file describes: the plant, channel, safety problem,
/// solver settings and, optionally, a fixed gain for simulation.
struct ProblemConfig {
  SystemSpec system;
  ChannelSpec channel;
  SafetySpec safety;
  DeltaSearchConfig search;
  std::optional<Eigen::MatrixXd> gain;
};

json load_json_file(const std::string& path);

/// Applies "a.b.c=value"; value is parsed as JSON, falling back to a string.
void apply_override(json& doc, const std::string& assignment);

/// Throws ConfigError on any schema problem (missing key, wrong type or shape).
ProblemConfig parse_config(const json& doc);

/// Canonical JSON form of the system, channel and safety sections.
json canonical_problem(const ProblemConfig& cfg);

/// FNV-1a (64 bit, hex) of the canonical problem dump.
std::string config_hash(const ProblemConfig& cfg);

json matrix_to_json(const Eigen::MatrixXd& M);
json vector_to_json(const Eigen::VectorXd& v);
Eigen::MatrixXd matrix_from_json(const json& j, const std::string& what);
Eigen::VectorXd vector_from_json(const json& j, const std::string& what);

json certificate_to_json(const Certificate& cert);
Certificate certificate_from_json(const json& j);

json augment_dump(const AugmentedSystem& aug);

json aggregate_to_json(const Aggregate& agg, std::optional<double> xi_certified);

/// Columns k, x[i], xhat[i], u[j], uc[j], theta, phi, unsafe_plant, unsafe_augmented.
void write_trajectory_csv(std::ostream& os, const RunResult& r, Index n, Index m);

}  // namespace netcbc
