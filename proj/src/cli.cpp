#include "netcbc/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "netcbc/certificate.hpp"
#include "netcbc/error.hpp"
#include "netcbc/io.hpp"
#include "netcbc/presets.hpp"

namespace netcbc {

namespace fs = std::filesystem;
using Eigen::MatrixXd;

namespace {

struct Options {
  std::string config_path;
  std::string preset;
  std::string out_dir;
  std::string cert_path;
  std::vector<std::string> overrides;
  std::optional<int> tau;
  std::uint64_t seed = 1;
  int runs = 20;
  std::string mode = "realization";
  bool trajectories = false;
  std::string axis;
  std::string values;
};

class VerificationFailed : public Error {
 public:
  using Error::Error;
};

json load_document(const Options& o) {
  json doc;
  if (!o.preset.empty()) {
    doc = preset_json(o.preset);
  } else if (!o.config_path.empty()) {
    doc = load_json_file(o.config_path);
  } else {
    throw ConfigError("one of --config or --preset is required");
  }
  if (o.tau) apply_override(doc, "channel.tau=" + std::to_string(*o.tau));
  for (const auto& s : o.overrides) apply_override(doc, s);
  return doc;
}

ProblemConfig load_problem(const Options& o, bool strict) {
  ProblemConfig cfg = parse_config(load_document(o));
  const ValidationReport rep = strict ? validate(cfg.system, cfg.channel, cfg.safety)
                                      : validate_for_simulation(cfg.system, cfg.channel, cfg.safety);
  if (!rep.ok()) throw ConfigError(rep.summary());
  return cfg;
}

void write_file(const Options& o, const std::string& name, const std::string& text, std::ostream& out) {
  if (o.out_dir.empty()) return;
  fs::create_directories(o.out_dir);
  const fs::path p = fs::path(o.out_dir) / name;
  std::ofstream f(p);
  if (!f) throw ConfigError("cannot write " + p.string());
  f << text;
  out << "wrote " << p.string() << "\n";
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

void print_certificate(const Certificate& c, std::ostream& out) {
  out << "eta=" << fmt(c.eta) << " beta=" << fmt(c.beta) << " c=" << fmt(c.c) << " T=" << c.T
      << " xi=" << fmt(c.xi) << " guarantee>=" << fmt(1.0 - c.xi) << "\n";
  out << "margin=" << fmt(c.margin) << " route=" << c.route << " delta=[";
  const auto d = c.delta.as_vector();
  for (std::size_t i = 0; i < d.size(); ++i) out << (i ? "," : "") << fmt(d[i]);
  out << "]\n";
}

Certificate synthesize(const Options& o, const ProblemConfig& cfg, std::ostream& out) {
  Certificate cert = algorithm2(cfg.system, cfg.channel, cfg.safety, cfg.search);
  cert.config_hash = config_hash(cfg);
  print_certificate(cert, out);
  write_file(o, "certificate.json", certificate_to_json(cert).dump(2) + "\n", out);
  return cert;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

void verify(const ProblemConfig& cfg, const Certificate& stored, std::ostream& out) {
  const AugmentedSystem aug = build(cfg.system, cfg.channel);
  if (stored.P.rows() != aug.dims.kappa || stored.P.cols() != aug.dims.kappa) {
    throw ConfigError("certificate P is " + std::to_string(stored.P.rows()) + "x" + std::to_string(stored.P.cols()) +
                      ", config needs kappa=" + std::to_string(aug.dims.kappa));
  }
  if (stored.F.rows() != aug.dims.m || stored.F.cols() != aug.dims.n) throw ConfigError("certificate F has wrong shape");

  const Certificate fresh = evaluate_certificate(aug, cfg.safety, stored.P, stored.F);
  std::vector<std::string> problems;
  auto cmp = [&](const char* name, double got, double want) {
    if (!close(got, want)) problems.push_back(std::string(name) + " stored " + fmt(want) + ", recomputed " + fmt(got));
  };
  cmp("margin", fresh.margin, stored.margin);
  cmp("eta", fresh.eta, stored.eta);
  cmp("beta", fresh.beta, stored.beta);
  cmp("c", fresh.c, stored.c);
  cmp("xi", fresh.xi, stored.xi);
  if (fresh.T != stored.T) problems.push_back("horizon differs");
  if (stored.beta_per_region.size() != fresh.beta_per_region.size()) {
    problems.push_back("number of unsafe regions differs");
  } else {
    for (std::size_t i = 0; i < fresh.beta_per_region.size(); ++i) {
      cmp("beta_per_region", fresh.beta_per_region[i], stored.beta_per_region[i]);
    }
  }
  if (fresh.margin > cfg.search.tol) problems.push_back("master inequality margin " + fmt(fresh.margin) + " above tolerance");
  if (!(fresh.beta > fresh.eta)) problems.push_back("beta is not above eta");
  if (!stored.config_hash.empty() && stored.config_hash != config_hash(cfg)) {
    problems.push_back("config hash differs from the one the certificate was issued for");
  }

  out << "recomputed: ";
  print_certificate(fresh, out);
  if (!problems.empty()) {
    std::string msg = "verification failed: ";
    for (std::size_t i = 0; i < problems.size(); ++i) msg += (i ? "; " : "") + problems[i];
    throw VerificationFailed(msg);
  }
  out << "verification passed\n";
}

SimConfig sim_config(const Options& o, const ProblemConfig& cfg) {
  SimConfig sc;
  sc.seed = o.seed;
  sc.runs = o.runs;
  sc.T = cfg.safety.T;
  if (o.mode == "realization") {
    sc.controller_mode = ControllerMode::Realization;
  } else if (o.mode == "expectation") {
    sc.controller_mode = ControllerMode::Expectation;
  } else {
    throw ConfigError("--mode must be realization or expectation");
  }
  if (sc.runs < 1) throw ConfigError("--runs must be at least 1");
  sc.record_trajectories = o.trajectories;
  return sc;
}

Aggregate simulate(const Options& o, const ProblemConfig& cfg, const MatrixXd& F, std::optional<double> xi,
                   std::ostream& out) {
  if (F.rows() != cfg.system.m() || F.cols() != cfg.system.n()) throw ConfigError("gain has wrong shape");
  const SimConfig sc = sim_config(o, cfg);
  const Aggregate agg = monte_carlo(cfg.system, cfg.channel, cfg.safety, F, sc);
  out << "runs=" << agg.runs << " violations_plant=" << agg.violations_plant
      << " violations_augmented=" << agg.violations_augmented << " freq=" << fmt(agg.freq_plant) << " ci95=["
      << fmt(agg.ci95_lo) << "," << fmt(agg.ci95_hi) << "]";
  if (xi) out << " xi_certified=" << fmt(*xi);
  out << "\nmean lost uplink=" << fmt(agg.mean_theta_losses) << " mean lost downlink=" << fmt(agg.mean_phi_losses)
      << "\n";

  write_file(o, "aggregate.json", aggregate_to_json(agg, xi).dump(2) + "\n", out);
  std::ostringstream losses;
  losses << "run,theta_lost,phi_lost\n";
  for (std::size_t i = 0; i < agg.per_run.size(); ++i) {
    losses << i << "," << agg.per_run[i].theta_losses << "," << agg.per_run[i].phi_losses << "\n";
  }
  write_file(o, "loss_counts.csv", losses.str(), out);
  if (sc.record_trajectories) {
    for (std::size_t i = 0; i < agg.per_run.size(); ++i) {
      std::ostringstream csv;
      write_trajectory_csv(csv, agg.per_run[i], cfg.system.n(), cfg.system.m());
      write_file(o, "trajectory_" + std::to_string(i) + ".csv", csv.str(), out);
    }
  }
  return agg;
}

// Gain for simulation: the certificate's if given, else the config's "gain".
std::pair<MatrixXd, std::optional<double>> simulation_gain(const Options& o, const ProblemConfig& cfg) {
  if (!o.cert_path.empty()) {
    const Certificate c = certificate_from_json(load_json_file(o.cert_path));
    return {c.F, c.xi};
  }
  if (cfg.gain) return {*cfg.gain, std::nullopt};
  throw ConfigError("simulate needs --cert or a \"gain\" entry in the config");
}

int cmd_augment(const Options& o, std::ostream& out) {
  const ProblemConfig cfg = load_problem(o, true);
  const AugmentedSystem aug = build(cfg.system, cfg.channel);
  out << "psi=" << aug.dims.psi << " varpi=" << aug.dims.varpi << " kappa=" << aug.dims.kappa << "\n";
  write_file(o, "augment.json", augment_dump(aug).dump(2) + "\n", out);
  return kOk;
}

int cmd_verify(const Options& o, std::ostream& out) {
  if (o.cert_path.empty()) throw ConfigError("verify needs --cert");
  const ProblemConfig cfg = load_problem(o, true);
  verify(cfg, certificate_from_json(load_json_file(o.cert_path)), out);
  return kOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const ProblemConfig cfg = load_problem(o, false);
  const auto [F, xi] = simulation_gain(o, cfg);
  simulate(o, cfg, F, xi, out);
  return kOk;
}

int cmd_certify(const Options& o, std::ostream& out) {
  const ProblemConfig cfg = load_problem(o, true);
  const Certificate cert = synthesize(o, cfg, out);
  // Round-trip through the serialized form so the check sees what was written.
  verify(cfg, certificate_from_json(certificate_to_json(cert)), out);
  simulate(o, cfg, cert.F, cert.xi, out);
  return kOk;
}

std::vector<double> parse_values(const std::string& s) {
  std::vector<double> vals;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--values: '" + item + "' is not a number");
    }
  }
  if (vals.empty()) throw ConfigError("--values must list at least one value");
  return vals;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  if (o.axis != "tau" && o.axis != "p_theta" && o.axis != "q_phi") {
    throw ConfigError("--axis must be tau, p_theta or q_phi");
  }
  const std::vector<double> vals = parse_values(o.values);
  json base = load_document(o);
  std::ostringstream table;
  table << "axis,value,feasible,route,xi,margin,gain_source,violation_freq,violations_plant,violations_augmented\n";
  for (double v : vals) {
    json doc = base;
    if (o.axis == "tau") {
      if (v < 0 || v != std::floor(v)) throw ConfigError("tau values must be non-negative integers");
      doc["channel"]["tau"] = static_cast<int>(v);
    } else {
      doc["channel"][o.axis] = v;
    }
    const ProblemConfig cfg = parse_config(doc);
    const ValidationReport rep = validate(cfg.system, cfg.channel, cfg.safety);
    if (!rep.ok()) throw ConfigError(rep.summary());

    std::optional<Certificate> cert;
    std::string why = "";
    try {
      cert = algorithm2(cfg.system, cfg.channel, cfg.safety, cfg.search);
    } catch (const ExhaustedSearch&) {
      why = "exhausted";
    } catch (const BetaNotAboveEta&) {
      why = "beta<=eta";
    }
    MatrixXd F;
    std::string source;
    if (cert) {
      F = cert->F;
      source = "certificate";
    } else if (cfg.gain) {
      F = *cfg.gain;
      source = "config";
    } else {
      F = MatrixXd::Zero(cfg.system.m(), cfg.system.n());
      source = "zero";
    }
    Options quiet = o;
    quiet.out_dir.clear();
    const SimConfig sc = sim_config(quiet, cfg);
    const Aggregate agg = monte_carlo(cfg.system, cfg.channel, cfg.safety, F, sc);
    table << o.axis << "," << v << "," << (cert ? "yes" : "no") << "," << (cert ? cert->route : why) << ","
          << (cert ? fmt(cert->xi) : "") << "," << (cert ? fmt(cert->margin) : "") << "," << source << ","
          << fmt(agg.freq_plant) << "," << agg.violations_plant << "," << agg.violations_augmented << "\n";
  }
  out << table.str();
  write_file(o, "sweep.csv", table.str(), out);
  return kOk;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config_path, "JSON problem description");
  sub->add_option("--preset", o.preset, "built-in problem (rlc)");
  sub->add_option("--set", o.overrides, "override, dotted.key=json-value")->take_all();
  sub->add_option("--out", o.out_dir, "output directory");
  sub->add_option("--tau", o.tau, "override the uplink delay");
}

void add_sim(CLI::App* sub, Options& o) {
  sub->add_option("--seed", o.seed, "base seed");
  sub->add_option("--runs", o.runs, "number of Monte-Carlo runs");
  sub->add_option("--mode", o.mode, "controller mode: realization|expectation");
  sub->add_flag("--trajectories", o.trajectories, "write one CSV per run");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Barrier-certificate synthesis and Monte-Carlo validation for networked linear control"};
  app.require_subcommand(1);
  Options o;
  auto* augment = app.add_subcommand("augment", "print dimensions and dump the augmented matrices");
  auto* synth = app.add_subcommand("synthesize", "compute a barrier certificate and gain");
  auto* verify_cmd = app.add_subcommand("verify", "recheck a stored certificate against a config");
  auto* certify = app.add_subcommand("certify", "synthesize, verify and simulate in one go");
  auto* sim = app.add_subcommand("simulate", "Monte-Carlo simulation of the networked loop");
  auto* sweep = app.add_subcommand("sweep", "synthesize and simulate across one channel parameter");
  for (auto* s : {augment, synth, verify_cmd, certify, sim, sweep}) add_common(s, o);
  for (auto* s : {certify, sim, sweep}) add_sim(s, o);
  for (auto* s : {verify_cmd, sim}) s->add_option("--cert", o.cert_path, "certificate JSON");
  sweep->add_option("--axis", o.axis, "tau | p_theta | q_phi")->required();
  sweep->add_option("--values", o.values, "comma-separated values")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (augment->parsed()) return cmd_augment(o, out);
    if (synth->parsed()) {
      synthesize(o, load_problem(o, true), out);
      return kOk;
    }
    if (verify_cmd->parsed()) return cmd_verify(o, out);
    if (certify->parsed()) return cmd_certify(o, out);
    if (sim->parsed()) return cmd_simulate(o, out);
    if (sweep->parsed()) return cmd_sweep(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DimensionError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ExhaustedSearch& e) {
    err << "synthesis infeasible: " << e.what() << "\n";
    return kSynthesisInfeasible;
  } catch (const BetaNotAboveEta& e) {
    err << "synthesis infeasible: " << e.what() << "\n";
    return kSynthesisInfeasible;
  } catch (const VerificationFailed& e) {
    err << e.what() << "\n";
    return kVerificationFailed;
  }
  return kConfigError;
}

}  // namespace netcbc
