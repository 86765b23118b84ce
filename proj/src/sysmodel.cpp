#include "netcbc/sysmodel.hpp"

#include <sstream>

#include "netcbc/error.hpp"

namespace netcbc {

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violations[i];
  }
  return os.str();
}

bool box_disjoint(const Box& a, const Box& b) {
  if (a.dim() != b.dim()) {
    throw DimensionError("box_disjoint: dimensions " + std::to_string(a.dim()) + " and " +
                         std::to_string(b.dim()) + " differ");
  }
  for (Index i = 0; i < a.dim(); ++i) {
    if (a.upper[i] < b.lower[i] || b.upper[i] < a.lower[i]) return true;
  }
  return false;
}

bool box_subset(const Box& a, const Box& b) {
  if (a.dim() != b.dim()) return false;
  return (a.lower.array() >= b.lower.array()).all() && (a.upper.array() <= b.upper.array()).all();
}

namespace {

void check_box(const Box& box, const std::string& name, Index dim, std::vector<std::string>& out) {
  if (box.lower.size() != box.upper.size()) {
    out.push_back(name + ": lower and upper have different lengths");
    return;
  }
  if (box.dim() != dim) {
    out.push_back(name + ": dimension " + std::to_string(box.dim()) + ", expected " + std::to_string(dim));
    return;
  }
  if ((box.lower.array() > box.upper.array()).any()) out.push_back(name + ": lower exceeds upper");
}

void check_shapes(const SystemSpec& sys, const ChannelSpec& ch, const SafetySpec& spec,
                  std::vector<std::string>& out) {
  const Index n = sys.A.rows();
  const Index m = sys.B.cols();
  if (n < 1 || sys.A.cols() != n) out.push_back("A must be square and non-empty");
  if (m < 1 || sys.B.rows() != n) out.push_back("B must be n x m with m >= 1");
  if (sys.noise_var.size() != n) {
    out.push_back("noise_var must have length n");
  } else if ((sys.noise_var.array() < 0.0).any()) {
    out.push_back("negative variance");
  }
  if (ch.tau < 0) out.push_back("tau must be non-negative");
  if (spec.T < 1) out.push_back("horizon T must be at least 1");

  const std::size_t before = out.size();
  check_box(spec.X, "X", n, out);
  check_box(spec.X0, "X0", n, out);
  check_box(spec.U, "U", m, out);
  if (spec.X1.empty()) out.push_back("X1 must contain at least one region");
  for (std::size_t r = 0; r < spec.X1.size(); ++r) check_box(spec.X1[r], "X1[" + std::to_string(r) + "]", n, out);
  if (out.size() != before) return;

  if (!box_subset(spec.X0, spec.X)) out.push_back("X0 is not contained in X");
  for (std::size_t r = 0; r < spec.X1.size(); ++r) {
    if (!box_subset(spec.X1[r], spec.X)) out.push_back("X1[" + std::to_string(r) + "] is not contained in X");
    if (!box_disjoint(spec.X0, spec.X1[r])) {
      out.push_back("initial and unsafe sets intersect (X1[" + std::to_string(r) + "])");
    }
  }
}

}  // namespace

ValidationReport validate(const SystemSpec& sys, const ChannelSpec& ch, const SafetySpec& spec) {
  ValidationReport report;
  check_shapes(sys, ch, spec, report.violations);
  if (!(ch.p_theta > 0.0 && ch.p_theta < 1.0)) report.violations.push_back("p_theta must lie in (0, 1)");
  if (!(ch.q_phi > 0.0 && ch.q_phi < 1.0)) report.violations.push_back("q_phi must lie in (0, 1)");
  return report;
}

ValidationReport validate_for_simulation(const SystemSpec& sys, const ChannelSpec& ch, const SafetySpec& spec) {
  ValidationReport report;
  check_shapes(sys, ch, spec, report.violations);
  if (!(ch.p_theta >= 0.0 && ch.p_theta <= 1.0)) report.violations.push_back("p_theta must lie in [0, 1]");
  if (!(ch.q_phi >= 0.0 && ch.q_phi <= 1.0)) report.violations.push_back("q_phi must lie in [0, 1]");
  return report;
}

}  // namespace netcbc
