#include "netcbc/certificate.hpp"

#include <algorithm>
#include <cmath>

#include "netcbc/error.hpp"

namespace netcbc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double max_sq(const Box& b) {
  return b.lower.array().square().max(b.upper.array().square()).sum();
}

// Smallest squared norm over the box; an interval containing 0 contributes nothing.
double min_sq(const Box& b) {
  double s = 0.0;
  for (Index i = 0; i < b.dim(); ++i) {
    const double lo = b.lower[i], hi = b.upper[i];
    if (lo <= 0.0 && hi >= 0.0) continue;
    s += std::min(lo * lo, hi * hi);
  }
  return s;
}

void check_square(const MatrixXd& P, const AugDims& dims, const char* who) {
  if (P.rows() != dims.kappa || P.cols() != dims.kappa) {
    throw DimensionError(std::string(who) + ": P must be kappa x kappa");
  }
}

}  // namespace

double level_eta(const MatrixXd& P, const SafetySpec& spec, const AugDims& dims) {
  check_square(P, dims, "level_eta");
  const double z2 = static_cast<double>(dims.state_blocks()) * max_sq(spec.X0) +
                    static_cast<double>(dims.input_blocks()) * max_sq(spec.U);
  return lambda_max_sym(P) * z2;
}

BetaLevels level_beta(const MatrixXd& P, const SafetySpec& spec, const AugDims& dims) {
  check_square(P, dims, "level_beta");
  if (spec.X1.empty()) throw Error("level_beta: no unsafe region");
  const double lmin = lambda_min_sym(P);
  const double inputs = static_cast<double>(dims.input_blocks()) * min_sq(spec.U);
  BetaLevels out;
  for (const auto& region : spec.X1) {
    out.per_region.push_back(lmin * (static_cast<double>(dims.state_blocks()) * min_sq(region) + inputs));
  }
  out.beta = *std::min_element(out.per_region.begin(), out.per_region.end());
  return out;
}

double constant_c(const MatrixXd& P, const MatrixXd& D, const VectorXd& noise_var, int tau) {
  const Index n = noise_var.size();
  if (D.cols() != n * (tau + 1) || P.rows() != D.rows()) throw DimensionError("constant_c: dimension mismatch");
  VectorXd sigma(D.cols());
  for (int j = 0; j <= tau; ++j) sigma.segment(j * n, n) = noise_var;
  return ((D.transpose() * P * D) * sigma.asDiagonal()).trace();
}

double safety_bound(double eta, double beta, double c, int T) {
  if (!(beta > eta)) throw BetaNotAboveEta(eta, beta);
  return std::min(1.0, (eta + c * static_cast<double>(T)) / beta);
}

double expected_next_barrier(const AugmentedSystem& aug, const MatrixXd& P, const MatrixXd& F, const VectorXd& z,
                             const VectorXd& noise_var) {
  if (z.size() != aug.dims.kappa) throw DimensionError("expected_next_barrier: z has wrong length");
  const VectorXd a = assemble_mean(aug, F) * z;
  const VectorXd b = aug.A3.value(F) * z;
  return a.dot(P * a) + aug.zeta_variance() * b.dot(P * b) + constant_c(P, aug.D, noise_var, aug.dims.tau);
}

Certificate evaluate_certificate(const AugmentedSystem& aug, const SafetySpec& spec, const MatrixXd& P,
                                 const MatrixXd& F) {
  Certificate cert;
  cert.P = P;
  cert.F = F;
  cert.T = spec.T;
  cert.margin = verify_master_inequality(aug, P, F);
  cert.eta = level_eta(P, spec, aug.dims);
  const BetaLevels b = level_beta(P, spec, aug.dims);
  cert.beta = b.beta;
  cert.beta_per_region = b.per_region;
  cert.c = constant_c(P, aug.D, aug.system.noise_var, aug.dims.tau);
  cert.xi = cert.beta > cert.eta ? safety_bound(cert.eta, cert.beta, cert.c, cert.T) : 1.0;
  return cert;
}

Certificate algorithm2(const SystemSpec& sys, const ChannelSpec& ch, const SafetySpec& spec,
                       const DeltaSearchConfig& search) {
  const ValidationReport report = validate(sys, ch, spec);
  if (!report.ok()) throw ConfigError(report.summary());
  const AugmentedSystem aug = build(sys, ch);
  const SynthesisResult syn = algorithm1(aug, search);
  Certificate cert = evaluate_certificate(aug, spec, syn.P, syn.F);
  cert.delta = syn.delta;
  cert.route = syn.route;
  if (!(cert.beta > cert.eta)) throw BetaNotAboveEta(cert.eta, cert.beta);
  return cert;
}

}  // namespace netcbc
