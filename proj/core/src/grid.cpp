#include "gridfdi/grid.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "gridfdi/diagnostics.hpp"

namespace gridfdi {

std::string to_string(NodeRole role) {
  switch (role) {
    case NodeRole::slack: return "slack";
    case NodeRole::injection: return "injection";
    case NodeRole::zero_injection: return "zero";
  }
  return "?";
}

std::string to_string(BranchKind kind) {
  switch (kind) {
    case BranchKind::line: return "line";
    case BranchKind::switch_: return "switch";
    case BranchKind::transformer: return "transformer";
  }
  return "?";
}

int Grid::node_index(const std::string& id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].id == id) return static_cast<int>(i);
  return -1;
}

const Node* Grid::find_node(const std::string& id) const {
  int i = node_index(id);
  return i < 0 ? nullptr : &nodes[static_cast<std::size_t>(i)];
}

const Node& Grid::node_by_id(const std::string& id) const {
  const Node* n = find_node(id);
  if (!n) throw std::out_of_range("no node with id '" + id + "'");
  return *n;
}

const Node* Grid::resolve_node(const std::string& id_or_alias) const {
  if (const Node* n = find_node(id_or_alias)) return n;
  for (const Node& n : nodes)
    if (!n.alias.empty() && n.alias == id_or_alias) return &n;
  return nullptr;
}

const std::string& Grid::display_name(const std::string& id) const {
  const Node& n = node_by_id(id);
  return n.alias.empty() ? n.id : n.alias;
}

namespace {

void complain(std::vector<Diagnostic>& out, const std::string& message) {
  out.push_back(Diagnostic{0, 0, message});
}

}  // namespace

void validate_grid(const Grid& grid) {
  std::vector<Diagnostic> problems;

  if (!(grid.sbase > 0.0))
    complain(problems, "power base must be positive (got " + std::to_string(grid.sbase) + ")");

  if (grid.nodes.empty()) complain(problems, "grid has no nodes");

  std::set<std::string> node_ids;
  std::set<std::string> names_taken;  // ids plus aliases, must be unambiguous
  int slack_count = 0;
  for (const Node& n : grid.nodes) {
    if (n.id.empty()) complain(problems, "node with empty id");
    if (!node_ids.insert(n.id).second)
      complain(problems, "duplicate node id '" + n.id + "'");
    else if (!names_taken.insert(n.id).second)
      complain(problems, "node id '" + n.id + "' collides with another node's alias");
    if (!n.alias.empty() && !names_taken.insert(n.alias).second)
      complain(problems, "alias '" + n.alias + "' of node '" + n.id +
                             "' collides with another node id or alias");
    if (n.phases.empty()) complain(problems, "node '" + n.id + "' has no phases");
    if (!(n.vbase > 0.0))
      complain(problems, "node '" + n.id + "' has non-positive voltage base");
    if (n.role == NodeRole::slack) ++slack_count;
    for (Phase p : all_phases) {
      if (n.vset[static_cast<int>(p)] && !n.phases.contains(p))
        complain(problems, "node '" + n.id + "' sets vset for absent phase " +
                               std::string(1, phase_letter(p)));
      if (n.vset[static_cast<int>(p)] && n.role != NodeRole::slack)
        complain(problems, "node '" + n.id + "' sets vset but is not the slack");
      if (n.vset[static_cast<int>(p)] && !(*n.vset[static_cast<int>(p)] > 0.0))
        complain(problems, "node '" + n.id + "' has non-positive vset on phase " +
                               std::string(1, phase_letter(p)));
      if (n.aset[static_cast<int>(p)] && !n.phases.contains(p))
        complain(problems, "node '" + n.id + "' sets aset for absent phase " +
                               std::string(1, phase_letter(p)));
      if (n.aset[static_cast<int>(p)] && n.role != NodeRole::slack)
        complain(problems, "node '" + n.id + "' sets aset but is not the slack");
      if (n.aset[static_cast<int>(p)] && !(std::abs(*n.aset[static_cast<int>(p)]) < 180.0))
        complain(problems, "node '" + n.id + "' has an aset outside (-180, 180) on phase " +
                               std::string(1, phase_letter(p)));
    }
  }
  if (slack_count == 0) complain(problems, "grid has no slack node");
  if (slack_count > 1)
    complain(problems, "grid has " + std::to_string(slack_count) + " slack nodes; exactly one allowed");

  std::set<std::string> branch_ids;
  for (const Branch& b : grid.branches) {
    if (b.id.empty()) complain(problems, "branch with empty id");
    if (!branch_ids.insert(b.id).second)
      complain(problems, "duplicate branch id '" + b.id + "'");
    const Node* from = grid.find_node(b.from);
    const Node* to = grid.find_node(b.to);
    if (!from) complain(problems, "branch '" + b.id + "' references unknown node '" + b.from + "'");
    if (!to) complain(problems, "branch '" + b.id + "' references unknown node '" + b.to + "'");
    if (b.from == b.to) complain(problems, "branch '" + b.id + "' connects node '" + b.from + "' to itself");
    if (b.phases.empty()) complain(problems, "branch '" + b.id + "' has no phases");
    if (from && !from->phases.contains(b.phases))
      complain(problems, "branch '" + b.id + "' carries phases " + b.phases.to_string() +
                             " absent at node '" + b.from + "' (" + from->phases.to_string() + ")");
    if (to && !to->phases.contains(b.phases))
      complain(problems, "branch '" + b.id + "' carries phases " + b.phases.to_string() +
                             " absent at node '" + b.to + "' (" + to->phases.to_string() + ")");
    if (from && to && b.kind != BranchKind::transformer &&
        std::abs(from->vbase - to->vbase) > 1e-9 * from->vbase)
      complain(problems, "branch '" + b.id + "' joins different voltage bases without being a transformer");

    bool z_outside = false, z_asym = false, z_zero_diag = false;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        bool present = b.phases.contains(static_cast<Phase>(r)) && b.phases.contains(static_cast<Phase>(c));
        if (!present && b.z[r][c] != Complex{0.0, 0.0}) z_outside = true;
        if (std::abs(b.z[r][c] - b.z[c][r]) > 1e-12 * (1.0 + std::abs(b.z[r][c]))) z_asym = true;
      }
      if (b.phases.contains(static_cast<Phase>(r)) && b.kind != BranchKind::switch_ &&
          b.z[r][r] == Complex{0.0, 0.0})
        z_zero_diag = true;
    }
    if (z_outside)
      complain(problems, "branch '" + b.id + "' has impedance entries on phases it does not carry");
    if (z_asym) complain(problems, "branch '" + b.id + "' has an asymmetric impedance block");
    if (z_zero_diag)
      complain(problems, "branch '" + b.id + "' has a zero self impedance on a carried phase");
  }

  std::set<std::pair<std::string, Phase>> load_slots;
  for (const LoadEntry& l : grid.loads) {
    const Node* n = grid.find_node(l.node);
    if (!n) {
      complain(problems, "load references unknown node '" + l.node + "'");
      continue;
    }
    if (!n->phases.contains(l.phase))
      complain(problems, "load on node '" + l.node + "' phase " + std::string(1, phase_letter(l.phase)) +
                             " which that node does not carry");
    if (n->role == NodeRole::zero_injection)
      complain(problems, "load on node '" + l.node + "' which is declared zero-injection");
    if (n->role == NodeRole::slack)
      complain(problems, "load on node '" + l.node + "' which is the slack");
    if (!load_slots.insert({l.node, l.phase}).second)
      complain(problems, "duplicate load entry for node '" + l.node + "' phase " +
                             std::string(1, phase_letter(l.phase)));
  }

  std::set<std::pair<std::string, Phase>> shunt_slots;
  for (const Shunt& s : grid.shunts) {
    const Node* n = grid.find_node(s.node);
    if (!n) {
      complain(problems, "shunt references unknown node '" + s.node + "'");
      continue;
    }
    if (!n->phases.contains(s.phase))
      complain(problems, "shunt on node '" + s.node + "' phase " + std::string(1, phase_letter(s.phase)) +
                             " which that node does not carry");
    if (!shunt_slots.insert({s.node, s.phase}).second)
      complain(problems, "duplicate shunt entry for node '" + s.node + "' phase " +
                             std::string(1, phase_letter(s.phase)));
  }

  if (!problems.empty()) throw ParseError(std::move(problems));
}

}  // namespace gridfdi
