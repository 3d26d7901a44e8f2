#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>

#include "gridfdi/network.hpp"

namespace gridfdi {

/// The state vector x: per-unit magnitude and radian angle per node-phase slot.
struct PhasorState {
  Eigen::VectorXd v;
  Eigen::VectorXd theta;

  Complex u(int slot) const { return std::polar(v[slot], theta[slot]); }
};

/// Flat start: V = 1 (slack phases at their setpoints), theta at the phase
/// reference offsets.
PhasorState flat_state(const Network& net);

/// Complex power in pu entering `branch` at one terminal, evaluated from the
/// state with every inter-phase coupling term.
Complex branch_flow(const Network& net, const PhasorState& x, int branch, bool at_from, Phase ph);

/// Net power injected into the network at a node-phase: algebraic sum of the
/// incident branch flows plus the power consumed by attached shunts. Equals
/// minus the attached load at any steady state.
Complex node_injection(const Network& net, const PhasorState& x, int node, Phase ph);

/// Consumed power of the constant-impedance shunts at a slot (capacitors
/// return negative reactive consumption), pu.
Complex shunt_consumed(const Network& net, const PhasorState& x, int s);

/// Consumed powers per slot, pu: the load-flow targets.
struct Loading {
  Eigen::VectorXd p;
  Eigen::VectorXd q;
};

/// The bundled load profile of the grid as a Loading vector.
Loading loading_from_grid(const Network& net);

struct LoadflowOptions {
  double tol = 1e-8;  // pu mismatch, infinity norm
  int max_iter = 30;
  // Overrides the slack source magnitudes (pu); used when replaying a state
  // anchored to metered voltages instead of the dataset setpoints.
  std::array<std::optional<double>, 3> slack_v{};
};

struct BranchFlows {
  std::array<Complex, 3> from{};  // pu, abc-indexed, zero on absent phases
  std::array<Complex, 3> to{};
};

struct SteadyState {
  PhasorState state;
  std::vector<BranchFlows> flows;    // per branch
  std::vector<Complex> injections;   // per slot
  int iterations = 0;
  double max_mismatch = 0.0;         // pu, at the returned state
};

/// Full-Newton unbalanced load flow on the same measurement functions used by
/// the estimator. Throws SolverError on divergence or a singular Jacobian.
SteadyState solve_loadflow(const Network& net, const Loading& loading, const LoadflowOptions& opts = {});

/// Per-phase series loss of a branch: S_from + S_to, pu.
Complex branch_loss(const Network& net, const PhasorState& x, int branch, Phase ph);

namespace detail {

/// Complex-valued gradient of one power quantity with respect to every slot's
/// angle and magnitude. Real parts differentiate P, imaginary parts Q.
struct ComplexGradient {
  Eigen::VectorXcd dtheta;
  Eigen::VectorXcd dv;
};

ComplexGradient branch_flow_gradient(const Network& net, const PhasorState& x, int branch,
                                     bool at_from, Phase ph);

ComplexGradient node_injection_gradient(const Network& net, const PhasorState& x, int node,
                                        Phase ph);

}  // namespace detail

}  // namespace gridfdi
