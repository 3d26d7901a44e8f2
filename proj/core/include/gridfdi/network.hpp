#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "gridfdi/grid.hpp"

namespace gridfdi {

struct NodePhase {
  int node = -1;  // index into Network::grid().nodes
  Phase phase = Phase::a;
  bool operator==(const NodePhase&) const = default;
};

/// Indexed per-unit view of a grid (normally the switch-merged one): node-phase
/// slots, branch admittance blocks, shunt susceptances, load targets, and the
/// unknown numbering shared by the load-flow and estimation solvers.
///
/// Branch impedances are normalized by the from-side base (Zbase =
/// vbase_from^2 / sbase); with voltage bases matching transformer ratios this
/// reduces every branch to a plain per-unit series impedance. The admittance
/// block is the inverse of the present-phase submatrix of z, re-embedded into
/// a 3x3 matrix whose absent rows/columns are zero.
class Network {
public:
  explicit Network(Grid grid);

  const Grid& grid() const { return grid_; }
  double sbase() const { return grid_.sbase; }

  int node_count() const { return static_cast<int>(grid_.nodes.size()); }
  int branch_count() const { return static_cast<int>(grid_.branches.size()); }
  int slack_node() const { return slack_node_; }
  double vbase(int node) const { return grid_.nodes[node].vbase; }

  // --- node-phase slots -----------------------------------------------------
  int node_phase_count() const { return static_cast<int>(node_phases_.size()); }
  const std::vector<NodePhase>& node_phases() const { return node_phases_; }
  const NodePhase& node_phase(int slot) const { return node_phases_[slot]; }
  /// -1 when the node does not carry the phase.
  int slot(int node, Phase ph) const { return slot_[node][static_cast<int>(ph)]; }
  int slot(const std::string& node_id, Phase ph) const;
  bool is_slack_slot(int s) const { return node_phases_[s].node == slack_node_; }

  // --- unknown numbering (slack phases excluded) ------------------------------
  // Unknown vector layout: [theta of every non-slack slot..., V of the same].
  int unknown_count() const { return 2 * free_slot_count_; }
  int free_slot_count() const { return free_slot_count_; }
  int theta_unknown(int s) const { return free_index_[s]; }  // -1 on slack slots
  int v_unknown(int s) const { return free_index_[s] < 0 ? -1 : free_index_[s] + free_slot_count_; }

  // --- electrical data, per unit ----------------------------------------------
  const Eigen::Matrix3cd& branch_admittance(int branch) const { return y_[branch]; }
  /// Capacitive susceptance attached at a slot (y_shunt = +j b).
  double shunt_b(int s) const { return shunt_b_[s]; }
  /// Consumed load powers per slot (the bundled profile).
  double load_p(int s) const { return load_p_[s]; }
  double load_q(int s) const { return load_q_[s]; }
  bool has_load(int s) const { return has_load_[s]; }

  /// Branches incident to a node as (branch index, node-is-from-side).
  const std::vector<std::pair<int, bool>>& incident(int node) const { return incident_[node]; }

  // --- slack reference ----------------------------------------------------------
  /// Source setpoint magnitude in pu (node vset, defaulting to 1).
  double slack_vset(Phase ph) const;
  /// Reference angles 0 / -120 / +120 degrees, in radians.
  static double slack_theta(Phase ph);
  /// Source setpoint angle in radians: reference plus the node aset offset.
  double slack_theta_set(Phase ph) const;

private:
  Grid grid_;
  int slack_node_ = -1;
  std::vector<NodePhase> node_phases_;
  std::vector<std::array<int, 3>> slot_;
  std::vector<int> free_index_;  // per slot; -1 for slack slots
  int free_slot_count_ = 0;
  std::vector<Eigen::Matrix3cd> y_;
  std::vector<double> shunt_b_, load_p_, load_q_;
  std::vector<std::uint8_t> has_load_;
  std::vector<std::vector<std::pair<int, bool>>> incident_;
};

}  // namespace gridfdi
