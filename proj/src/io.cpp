#include "netcbc/io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "netcbc/error.hpp"

namespace netcbc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json* node = &doc;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    parts.push_back(part);
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    json& next = (*node)[parts[i]];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) throw ConfigError("override key '" + key + "' descends into a non-object");
    node = &next;
  }
  (*node)[parts.back()] = value;
}

json matrix_to_json(const MatrixXd& M) {
  json rows = json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const VectorXd& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

MatrixXd matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty()) {
    throw ConfigError(what + ": expected a non-empty array of rows");
  }
  const Index r = static_cast<Index>(j.size()), c = static_cast<Index>(j[0].size());
  MatrixXd M(r, c);
  for (Index i = 0; i < r; ++i) {
    if (!j[i].is_array() || static_cast<Index>(j[i].size()) != c) throw ConfigError(what + ": ragged rows");
    for (Index k = 0; k < c; ++k) {
      if (!j[i][k].is_number()) throw ConfigError(what + ": non-numeric entry");
      M(i, k) = j[i][k].get<double>();
    }
  }
  return M;
}

VectorXd vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + ": expected an array");
  VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(what + ": non-numeric entry");
    v[static_cast<Index>(i)] = j[i].get<double>();
  }
  return v;
}

namespace {

const json& require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw ConfigError("missing '" + where + key + "'");
  return obj.at(key);
}

Box box_from_json(const json& j, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + ": expected {\"lower\", \"upper\"}");
  return {vector_from_json(require(j, "lower", what + "."), what + ".lower"),
          vector_from_json(require(j, "upper", what + "."), what + ".upper")};
}

json box_to_json(const Box& b) { return {{"lower", vector_to_json(b.lower)}, {"upper", vector_to_json(b.upper)}}; }

template <typename T>
T number(const json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(what + ": expected a number");
  if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_integer()) throw ConfigError(what + ": expected an integer");
  }
  return j.get<T>();
}

}  // namespace

ProblemConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  ProblemConfig cfg;

  const json& sys = require(doc, "system", "");
  cfg.system.A = matrix_from_json(require(sys, "A", "system."), "system.A");
  cfg.system.B = matrix_from_json(require(sys, "B", "system."), "system.B");
  cfg.system.noise_var = vector_from_json(require(sys, "noise_var", "system."), "system.noise_var");

  const json& ch = require(doc, "channel", "");
  cfg.channel.tau = number<int>(require(ch, "tau", "channel."), "channel.tau");
  cfg.channel.p_theta = number<double>(require(ch, "p_theta", "channel."), "channel.p_theta");
  cfg.channel.q_phi = number<double>(require(ch, "q_phi", "channel."), "channel.q_phi");

  const json& sf = require(doc, "safety", "");
  cfg.safety.X = box_from_json(require(sf, "X", "safety."), "safety.X");
  cfg.safety.X0 = box_from_json(require(sf, "X0", "safety."), "safety.X0");
  const json& x1 = require(sf, "X1", "safety.");
  if (!x1.is_array()) throw ConfigError("safety.X1: expected a list of boxes");
  for (std::size_t i = 0; i < x1.size(); ++i) {
    cfg.safety.X1.push_back(box_from_json(x1[i], "safety.X1[" + std::to_string(i) + "]"));
  }
  cfg.safety.U = box_from_json(require(sf, "U", "safety."), "safety.U");
  cfg.safety.T = number<int>(require(sf, "T", "safety."), "safety.T");

  if (doc.contains("solver")) {
    const json& so = doc.at("solver");
    if (!so.is_object()) throw ConfigError("solver: expected an object");
    if (so.contains("max_iter")) cfg.search.sdp.max_iter = number<int>(so.at("max_iter"), "solver.max_iter");
    if (so.contains("tol")) cfg.search.tol = number<double>(so.at("tol"), "solver.tol");
    if (so.contains("eps_pd")) cfg.search.eps_pd = number<double>(so.at("eps_pd"), "solver.eps_pd");
    if (so.contains("joint_rounds")) cfg.search.joint_rounds = number<int>(so.at("joint_rounds"), "solver.joint_rounds");
    if (so.contains("joint_fallback")) {
      if (!so.at("joint_fallback").is_boolean()) throw ConfigError("solver.joint_fallback: expected a boolean");
      cfg.search.joint_fallback = so.at("joint_fallback").get<bool>();
    }
    if (so.contains("delta_grid")) {
      const json& g = so.at("delta_grid");
      if (!g.is_array()) throw ConfigError("solver.delta_grid: expected a list of five-element lists");
      for (const auto& row : g) {
        const VectorXd v = vector_from_json(row, "solver.delta_grid entry");
        cfg.search.candidates.push_back(DeltaWeights::from_vector(std::vector<double>(v.data(), v.data() + v.size())));
      }
    }
  }
  if (doc.contains("gain")) cfg.gain = matrix_from_json(doc.at("gain"), "gain");
  return cfg;
}

json canonical_problem(const ProblemConfig& cfg) {
  json x1 = json::array();
  for (const auto& b : cfg.safety.X1) x1.push_back(box_to_json(b));
  return {{"system",
           {{"A", matrix_to_json(cfg.system.A)},
            {"B", matrix_to_json(cfg.system.B)},
            {"noise_var", vector_to_json(cfg.system.noise_var)}}},
          {"channel", {{"tau", cfg.channel.tau}, {"p_theta", cfg.channel.p_theta}, {"q_phi", cfg.channel.q_phi}}},
          {"safety",
           {{"X", box_to_json(cfg.safety.X)},
            {"X0", box_to_json(cfg.safety.X0)},
            {"X1", x1},
            {"U", box_to_json(cfg.safety.U)},
            {"T", cfg.safety.T}}}};
}

std::string config_hash(const ProblemConfig& cfg) {
  const std::string text = canonical_problem(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json certificate_to_json(const Certificate& cert) {
  return {{"P", matrix_to_json(cert.P)},
          {"F", matrix_to_json(cert.F)},
          {"eta", cert.eta},
          {"beta", cert.beta},
          {"beta_per_region", cert.beta_per_region},
          {"c", cert.c},
          {"T", cert.T},
          {"xi", cert.xi},
          {"margin", cert.margin},
          {"delta", cert.delta.as_vector()},
          {"config_hash", cert.config_hash},
          {"route", cert.route}};
}

Certificate certificate_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("certificate: expected an object");
  Certificate c;
  c.P = matrix_from_json(require(j, "P", "certificate."), "certificate.P");
  c.F = matrix_from_json(require(j, "F", "certificate."), "certificate.F");
  c.eta = number<double>(require(j, "eta", "certificate."), "certificate.eta");
  c.beta = number<double>(require(j, "beta", "certificate."), "certificate.beta");
  const VectorXd bpr = vector_from_json(require(j, "beta_per_region", "certificate."), "certificate.beta_per_region");
  c.beta_per_region.assign(bpr.data(), bpr.data() + bpr.size());
  c.c = number<double>(require(j, "c", "certificate."), "certificate.c");
  c.T = number<int>(require(j, "T", "certificate."), "certificate.T");
  c.xi = number<double>(require(j, "xi", "certificate."), "certificate.xi");
  c.margin = number<double>(require(j, "margin", "certificate."), "certificate.margin");
  if (j.contains("delta")) {
    const VectorXd d = vector_from_json(j.at("delta"), "certificate.delta");
    if (d.size() == 5) c.delta = {d[0], d[1], d[2], d[3], d[4]};
  }
  if (j.contains("config_hash") && j.at("config_hash").is_string()) c.config_hash = j.at("config_hash");
  if (j.contains("route") && j.at("route").is_string()) c.route = j.at("route");
  return c;
}

namespace {

json affine_to_json(const AffineMatrix& a) {
  json terms = json::array();
  for (const auto& t : a.terms) {
    terms.push_back({{"row_selector", matrix_to_json(t.row_selector)}, {"right_factor", matrix_to_json(t.right_factor)}});
  }
  return terms;
}

}  // namespace

json augment_dump(const AugmentedSystem& aug) {
  const AugDims& d = aug.dims;
  return {{"dims", {{"n", d.n}, {"m", d.m}, {"tau", d.tau}, {"psi", d.psi}, {"varpi", d.varpi}, {"kappa", d.kappa}}},
          {"A1_const", matrix_to_json(aug.A1.constant)},
          {"A1_terms", affine_to_json(aug.A1)},
          {"A2_const", matrix_to_json(aug.A2.constant)},
          {"A2_terms", affine_to_json(aug.A2)},
          {"A3_const", matrix_to_json(aug.A3.constant)},
          {"A3_terms", affine_to_json(aug.A3)},
          {"D", matrix_to_json(aug.D)}};
}

json aggregate_to_json(const Aggregate& agg, std::optional<double> xi_certified) {
  json losses = json::array();
  for (std::size_t i = 0; i < agg.per_run.size(); ++i) {
    const auto& r = agg.per_run[i];
    losses.push_back({{"run", i}, {"theta_lost", r.theta_losses}, {"phi_lost", r.phi_losses}});
  }
  json out = {{"runs", agg.runs},
              {"violations_plant", agg.violations_plant},
              {"violations_augmented", agg.violations_augmented},
              {"freq_plant", agg.freq_plant},
              {"freq_augmented", agg.freq_augmented},
              {"ci95", {agg.ci95_lo, agg.ci95_hi}},
              {"mean_theta_lost", agg.mean_theta_losses},
              {"mean_phi_lost", agg.mean_phi_losses},
              {"loss_counts", losses}};
  out["xi_certified"] = xi_certified ? json(*xi_certified) : json(nullptr);
  return out;
}

void write_trajectory_csv(std::ostream& os, const RunResult& r, Index n, Index m) {
  os << "k";
  for (Index i = 0; i < n; ++i) os << ",x" << i;
  for (Index i = 0; i < n; ++i) os << ",xhat" << i;
  for (Index i = 0; i < m; ++i) os << ",u" << i;
  for (Index i = 0; i < m; ++i) os << ",uc" << i;
  os << ",theta,phi,unsafe_plant,unsafe_augmented\n";
  char buf[32];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  };
  for (const auto& row : r.trajectory) {
    os << row.k;
    for (Index i = 0; i < n; ++i) os << ',' << num(row.x[i]);
    const bool terminal = row.theta < 0;
    for (Index i = 0; i < n; ++i) os << ',' << (terminal ? "" : num(row.xhat[i]));
    for (Index i = 0; i < m; ++i) os << ',' << (terminal ? "" : num(row.u[i]));
    for (Index i = 0; i < m; ++i) os << ',' << (terminal ? "" : num(row.uc[i]));
    if (terminal) {
      os << ",,," << (row.unsafe_plant ? 1 : 0) << ",\n";
    } else {
      os << ',' << row.theta << ',' << row.phi << ',' << (row.unsafe_plant ? 1 : 0) << ','
         << (row.unsafe_augmented ? 1 : 0) << '\n';
    }
  }
}

}  // namespace netcbc
