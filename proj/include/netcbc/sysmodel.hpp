#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace netcbc {

using Eigen::Index;

/// Discrete-time stochastic linear plant x_{k+1} = A x_k + B u_k + w_k with
/// w_k ~ N(0, diag(noise_var)).
struct SystemSpec {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::VectorXd noise_var;

  Index n() const { return A.rows(); }
  Index m() const { return B.cols(); }
};

/// Uplink delay and success probabilities of the two Bernoulli channels.
struct ChannelSpec {
  int tau = 0;
  double p_theta = 1.0;
  double q_phi = 1.0;
};

/// Closed axis-aligned hyper-rectangle.
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Box() = default;
  Box(Eigen::VectorXd lo, Eigen::VectorXd hi) : lower(std::move(lo)), upper(std::move(hi)) {}

  /// Cube [lo, hi]^dim.
  static Box cube(Index dim, double lo, double hi) {
    return {Eigen::VectorXd::Constant(dim, lo), Eigen::VectorXd::Constant(dim, hi)};
  }

  Index dim() const { return lower.size(); }

  template <typename Derived>
  bool contains(const Eigen::MatrixBase<Derived>& x) const {
    return x.size() == dim() && (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
  }
};

struct SafetySpec {
  Box X;
  Box X0;
  std::vector<Box> X1;
  Box U;
  int T = 1;
};

struct ValidationReport {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

/// True iff the two closed boxes share no point. Touching faces intersect.
/// Throws DimensionError when the dimensions differ.
bool box_disjoint(const Box& a, const Box& b);

/// True iff a lies inside b (closed).
bool box_subset(const Box& a, const Box& b);

/// Collects every invariant violation of the three specs; empty iff all hold.
ValidationReport validate(const SystemSpec& sys, const ChannelSpec& ch, const SafetySpec& spec);

/// Shape checks only, with probabilities allowed anywhere in [0, 1].
/// The simulator accepts degenerate channels (lossless or dead links).
ValidationReport validate_for_simulation(const SystemSpec& sys, const ChannelSpec& ch, const SafetySpec& spec);

}  // namespace netcbc
