#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gridfdi/estimation.hpp"
#include "gridfdi/topology.hpp"

namespace gridfdi {

/// A closed attack region on the merged network. Interior nodes may have their
/// state altered; boundary nodes (members with at least one out-of-area
/// branch-phase) keep every state variable fixed so nothing leaks outside.
struct AttackArea {
  std::string seed;                       // merged node id the growth started from
  std::vector<NodePhase> members;         // node-phase membership, slot order
  std::vector<int> interior_nodes;        // node indices, state changeable
  std::vector<int> boundary_nodes;        // node indices, state pinned
  std::vector<int> zero_injection_nodes;  // interior members with zero-injection role
  std::vector<int> launch_candidates;     // interior injection nodes
  bool a2 = false;                        // true when a zero-injection node is inside
  bool reaches_slack = false;             // slack ended up on the boundary
  std::vector<std::string> notes;         // human-readable remarks (feasibility, ...)
  // Alias-notation membership per original node, e.g. "13c", "09ac", "08b".
  std::vector<std::string> display_members;

  bool contains(int node, Phase ph) const;
  bool node_in_area(int node) const;
  bool is_boundary(int node) const;
};

/// Grows an attack area from a seed node (id or alias, original or merged):
/// branches with nonzero per-phase self impedance propagate membership;
/// injection and slack frontiers join on the entering phases and stop;
/// zero-injection frontiers join with all their phases and keep growing.
/// Throws std::invalid_argument for unknown seeds or a slack seed.
AttackArea find_attack_area(const Network& net, const Grid& original, const MergeMap& mm,
                            const std::string& seed);

/// Areas grown from every injection node, deduplicated by membership,
/// largest last. Each area lists all seeds that produce it in `notes`.
std::vector<AttackArea> enumerate_attack_areas(const Network& net, const Grid& original,
                                               const MergeMap& mm);

// --- changeable state variables ------------------------------------------------

enum class SvKind { V, Theta };

struct SvHandle {
  int slot = -1;  // node-phase slot on the merged network
  SvKind kind = SvKind::V;
  bool operator==(const SvHandle&) const = default;
};

std::string sv_name(const Network& net, SvHandle sv);       // "theta_a_652"
SvHandle parse_sv(const Network& net, const std::string& name);  // accepts aliases too

struct ChangeableSvSet {
  std::vector<SvHandle> svs;  // deterministic order: slots ascending, V then theta per slot
};

/// Two state variables per member node-phase, minus slack pairs and every
/// boundary-node variable. Throws std::invalid_argument when empty.
ChangeableSvSet changeable_state_variables(const Network& net, const AttackArea& area);

// --- constraint system (a2 areas) ------------------------------------------------

struct ConstraintRow {
  enum class Type { zero_injection_p, zero_injection_q, change_sum_p, change_sum_q };
  Type type;
  int node = -1;  // zero-injection node for the first two types, -1 otherwise
  Phase phase = Phase::a;
  std::string label;
};

/// The assembled constraint residuals of an area around an anchor state:
/// per-phase zero-injection P/Q sums for each zero-injection member, and
/// per-phase area change-sum P/Q equations (injection deltas plus loss deltas).
/// The independent subset is detected numerically at the anchor.
class ConstraintSystem {
public:
  ConstraintSystem(const Network& net, AttackArea area, PhasorState anchor);

  const std::vector<ConstraintRow>& rows() const { return rows_; }
  const std::vector<int>& independent() const { return independent_; }
  int independent_count() const { return static_cast<int>(independent_.size()); }

  /// All assembled residuals at a candidate state, pu.
  Eigen::VectorXd residuals(const PhasorState& x) const;
  /// Rows restricted to the independent subset.
  Eigen::VectorXd independent_residuals(const PhasorState& x) const;
  /// Jacobian of the independent rows with respect to the given SVs.
  Eigen::MatrixXd independent_jacobian(const PhasorState& x, const std::vector<SvHandle>& svs) const;
  /// Jacobian of every assembled row (used for redundancy/DoF analysis).
  Eigen::MatrixXd full_jacobian(const PhasorState& x, const std::vector<SvHandle>& svs) const;

  const AttackArea& area() const { return area_; }
  const PhasorState& anchor() const { return anchor_; }

private:
  Complex row_value(const PhasorState& x, const ConstraintRow& row) const;
  detail::ComplexGradient row_gradient(const PhasorState& x, const ConstraintRow& row) const;
  Eigen::MatrixXd jacobian_rows(const PhasorState& x, const std::vector<int>& row_indices,
                                const std::vector<SvHandle>& svs) const;

  const Network* net_;
  AttackArea area_;
  PhasorState anchor_;
  std::vector<ConstraintRow> rows_;
  std::vector<int> independent_;
  // Change-sum bookkeeping per phase: metered member nodes and in-area
  // branches, with their anchor injections/losses.
  std::array<std::vector<int>, 3> cs_nodes_;
  std::array<std::vector<Complex>, 3> cs_anchor_inj_;
  std::array<std::vector<int>, 3> cs_branches_;
  std::array<std::vector<Complex>, 3> cs_anchor_loss_;
};

ConstraintSystem build_constraints(const Network& net, const AttackArea& area, const PhasorState& anchor);

// --- attack design -----------------------------------------------------------------

struct SvBounds {
  Eigen::VectorXd lo;  // per changeable SV, pu or radians
  Eigen::VectorXd hi;
};

/// V in [0.95, 1.05] widened where needed to bracket the anchor; theta within
/// +-10 degrees of the anchor value.
SvBounds default_bounds(const Network& net, const ChangeableSvSet& svs, const PhasorState& anchor);

struct AttackDiagnostics {
  int iterations = 0;
  double max_constraint_residual = 0.0;  // pu, at the attack state
  int assembled_constraints = 0;
  int independent_constraints = 0;
  std::vector<std::string> binding_bounds;
  std::vector<std::string> warnings;
};

struct AttackResult {
  AttackArea area;
  // a2: exactly one initialized SV; a1: one or more direct assignments.
  std::vector<std::pair<SvHandle, double>> initialization;  // deltas, pu/rad
  std::vector<SvHandle> fixed;
  PhasorState anchor;    // pre-attack state the design is anchored to
  PhasorState attacked;  // the pseudo steady state x-hat
  MeasurementSet z_before;
  MeasurementSet z_after;  // fabricated meter values; out-of-area rows identical
  // Model values h(anchor), h(attacked) per reading, SI; equal to the meter
  // values in a noiseless run.
  std::vector<double> design_before;
  std::vector<double> design_after;
  std::vector<std::uint8_t> changed;  // per reading
  AttackDiagnostics diag;
};

struct DesignOptions {
  double tol = 1e-10;  // pu, constraint residual infinity norm
  int max_iter = 50;
};

/// Constraint-based design: the initialized SV takes anchor+delta, fixed SVs
/// stay at the anchor, and the remaining changeable SVs solve the independent
/// constraint subset by damped Newton within bounds. Meter fabrication is the
/// exact model delta: z + h(x-hat) - h(anchor) on every affected reading.
/// Throws DofError (with suggested fixed sets) on count mismatch, SolverError
/// on divergence, std::invalid_argument for foreign/duplicate handles.
AttackResult design_attack_a2(const Network& net, const AttackArea& area, const PhasorState& anchor,
                              const MeasurementSet& z, SvHandle init_sv, double init_delta,
                              const std::vector<SvHandle>& fixed,
                              const std::optional<SvBounds>& bounds = std::nullopt,
                              const DesignOptions& opts = {});

/// Direct-assignment design for areas without zero-injection nodes: launch-node
/// SVs move by the given deltas, every affected reading is fabricated with the
/// same exact model delta. Throws std::invalid_argument when an assignment
/// leaves bounds or a changed phase has no injection meter to absorb it.
AttackResult design_attack_a1(const Network& net, const AttackArea& area, const PhasorState& anchor,
                              const MeasurementSet& z,
                              const std::vector<std::pair<SvHandle, double>>& deltas,
                              const std::optional<SvBounds>& bounds = std::nullopt);

// --- attack result serialization ---------------------------------------------------

std::string attack_to_json(const Network& net, const AttackResult& attack);
AttackResult attack_from_json(const Network& net, const std::string& text);  // ParseError

}  // namespace gridfdi
