#include "gridfdi/attack.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <stdexcept>

namespace gridfdi {

bool AttackArea::contains(int node, Phase ph) const {
  return std::find(members.begin(), members.end(), NodePhase{node, ph}) != members.end();
}

bool AttackArea::node_in_area(int node) const {
  return std::any_of(members.begin(), members.end(),
                     [node](const NodePhase& np) { return np.node == node; });
}

bool AttackArea::is_boundary(int node) const {
  return std::find(boundary_nodes.begin(), boundary_nodes.end(), node) != boundary_nodes.end();
}

namespace {

/// Loaded phases of an original node.
PhaseSet loaded_phases(const Grid& original, const std::string& node_id) {
  PhaseSet out;
  for (const LoadEntry& l : original.loads)
    if (l.node == node_id) out.insert(l.phase);
  return out;
}

/// Alias-notation membership strings. Singleton nodes render as
/// "<alias><phases>"; supernodes split their phases over the original members,
/// preferring the node adjacent to the branch the area entered through.
void append_display(const Network& net, const Grid& original, const MergeMap& mm, int node,
                    PhaseSet joined, int entered_branch, std::vector<std::string>& out) {
  const Grid& merged = net.grid();
  const std::string& merged_id = merged.nodes[static_cast<std::size_t>(node)].id;
  const std::vector<std::string>& group = mm.originals(merged_id);

  if (group.size() == 1) {
    out.push_back(original.display_name(group[0]) + joined.to_string());
    return;
  }

  // Which original node did the area enter through?
  std::string adjacent = group[0];
  if (entered_branch >= 0) {
    const std::string& branch_id =
        merged.branches[static_cast<std::size_t>(entered_branch)].id;
    for (const Branch& ob : original.branches) {
      if (ob.id != branch_id) continue;
      if (mm.merged_id(ob.from) == merged_id)
        adjacent = ob.from;
      else if (mm.merged_id(ob.to) == merged_id)
        adjacent = ob.to;
      break;
    }
  }

  PhaseSet remaining = joined;
  std::vector<std::pair<std::string, PhaseSet>> assigned;
  auto take = [&](const std::string& member_id, PhaseSet wanted) {
    PhaseSet got = remaining.intersect(wanted);
    if (got.empty()) return;
    assigned.push_back({member_id, got});
    PhaseSet rest;
    for (Phase p : remaining)
      if (!got.contains(p)) rest.insert(p);
    remaining = rest;
  };

  take(adjacent, loaded_phases(original, adjacent));
  for (const std::string& member_id : group) {
    if (member_id == adjacent || remaining.empty()) continue;
    take(member_id, loaded_phases(original, member_id));
  }
  if (!remaining.empty()) take(group[0], remaining);

  for (const auto& [member_id, phases] : assigned)
    out.push_back(original.display_name(member_id) + phases.to_string());
}

}  // namespace

AttackArea find_attack_area(const Network& net, const Grid& original, const MergeMap& mm,
                            const std::string& seed) {
  const Grid& merged = net.grid();

  // Accept merged or original ids and aliases.
  const Node* seed_node = merged.resolve_node(seed);
  if (!seed_node) {
    const Node* orig = original.resolve_node(seed);
    if (orig) seed_node = merged.find_node(mm.merged_id(orig->id));
  }
  if (!seed_node) throw std::invalid_argument("unknown attack seed '" + seed + "'");
  const int seed_idx = merged.node_index(seed_node->id);
  if (seed_idx == net.slack_node())
    throw std::invalid_argument("attack areas cannot be seeded at the slack source");

  const int nn = net.node_count();
  std::vector<PhaseSet> member(static_cast<std::size_t>(nn));
  std::vector<char> propagated(static_cast<std::size_t>(nn), 0);
  std::vector<int> entered_via(static_cast<std::size_t>(nn), -1);

  member[static_cast<std::size_t>(seed_idx)] = merged.nodes[static_cast<std::size_t>(seed_idx)].phases;
  propagated[static_cast<std::size_t>(seed_idx)] = 1;
  std::deque<int> queue{seed_idx};
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (const auto& [b, is_from] : net.incident(u)) {
      const Branch& br = merged.branches[static_cast<std::size_t>(b)];
      const int w = merged.node_index(is_from ? br.to : br.from);
      if (entered_via[static_cast<std::size_t>(w)] < 0 && w != seed_idx)
        entered_via[static_cast<std::size_t>(w)] = b;
      const Node& wn = merged.nodes[static_cast<std::size_t>(w)];
      if (wn.role == NodeRole::zero_injection) {
        member[static_cast<std::size_t>(w)] = wn.phases;
        if (!propagated[static_cast<std::size_t>(w)]) {
          propagated[static_cast<std::size_t>(w)] = 1;
          queue.push_back(w);
        }
      } else {
        member[static_cast<std::size_t>(w)] =
            member[static_cast<std::size_t>(w)].unite(br.phases);
      }
    }
  }

  AttackArea area;
  area.seed = merged.nodes[static_cast<std::size_t>(seed_idx)].id;

  // A member stays interior only when every incident branch-phase keeps both
  // endpoint slots inside: inter-phase coupling spreads any interior state
  // change across all phases of every incident branch.
  std::vector<char> is_member(static_cast<std::size_t>(nn), 0);
  for (int n = 0; n < nn; ++n)
    is_member[static_cast<std::size_t>(n)] = !member[static_cast<std::size_t>(n)].empty();
  for (int n = 0; n < nn; ++n) {
    if (!is_member[static_cast<std::size_t>(n)]) continue;
    bool boundary = (n == net.slack_node());
    for (const auto& [b, is_from] : net.incident(n)) {
      const Branch& br = merged.branches[static_cast<std::size_t>(b)];
      const int other = merged.node_index(is_from ? br.to : br.from);
      for (Phase p : br.phases) {
        if (!member[static_cast<std::size_t>(n)].contains(p) ||
            !member[static_cast<std::size_t>(other)].contains(p)) {
          boundary = true;
          break;
        }
      }
      if (boundary) break;
    }
    if (boundary)
      area.boundary_nodes.push_back(n);
    else
      area.interior_nodes.push_back(n);
  }

  for (int s = 0; s < net.node_phase_count(); ++s) {
    const NodePhase& np = net.node_phase(s);
    if (member[static_cast<std::size_t>(np.node)].contains(np.phase)) area.members.push_back(np);
  }

  for (int n : area.interior_nodes) {
    const Node& node = merged.nodes[static_cast<std::size_t>(n)];
    if (node.role == NodeRole::zero_injection)
      area.zero_injection_nodes.push_back(n);
    else if (node.role == NodeRole::injection)
      area.launch_candidates.push_back(n);
  }
  area.a2 = !area.zero_injection_nodes.empty();
  area.reaches_slack = is_member[static_cast<std::size_t>(net.slack_node())];

  for (int n : area.interior_nodes)
    append_display(net, original, mm, n, member[static_cast<std::size_t>(n)],
                   entered_via[static_cast<std::size_t>(n)], area.display_members);
  for (int n : area.boundary_nodes)
    append_display(net, original, mm, n, member[static_cast<std::size_t>(n)],
                   entered_via[static_cast<std::size_t>(n)], area.display_members);

  for (int n : area.boundary_nodes)
    area.notes.push_back("state at " + merged.display_name(merged.nodes[static_cast<std::size_t>(n)].id) +
                         " stays pinned (boundary)");
  if (area.reaches_slack)
    area.notes.push_back(
        "area reaches the slack source; the source state stays pinned and its "
        "injection is unmetered");
  if (area.interior_nodes.empty())
    area.notes.push_back("area has no interior nodes; no state variable is changeable");
  return area;
}

std::vector<AttackArea> enumerate_attack_areas(const Network& net, const Grid& original,
                                               const MergeMap& mm) {
  const Grid& merged = net.grid();
  std::vector<AttackArea> areas;
  std::vector<std::vector<std::string>> seed_names;
  std::map<std::string, std::size_t> by_membership;

  for (int n = 0; n < net.node_count(); ++n) {
    const Node& node = merged.nodes[static_cast<std::size_t>(n)];
    if (node.role != NodeRole::injection) continue;
    AttackArea area = find_attack_area(net, original, mm, node.id);
    std::string key;
    for (const NodePhase& np : area.members) {
      key += std::to_string(np.node);
      key += phase_letter(np.phase);
      key += ';';
    }
    auto [it, inserted] = by_membership.try_emplace(key, areas.size());
    if (inserted) {
      areas.push_back(std::move(area));
      seed_names.push_back({merged.display_name(node.id)});
    } else {
      seed_names[it->second].push_back(merged.display_name(node.id));
    }
  }

  std::vector<std::size_t> order(areas.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t lhs, std::size_t rhs) {
    return areas[lhs].members.size() < areas[rhs].members.size();
  });

  std::vector<AttackArea> out;
  for (std::size_t i : order) {
    AttackArea area = std::move(areas[i]);
    std::string note = "grown from seed(s): ";
    for (std::size_t k = 0; k < seed_names[i].size(); ++k) {
      if (k) note += ", ";
      note += seed_names[i][k];
    }
    area.notes.insert(area.notes.begin(), note);
    out.push_back(std::move(area));
  }
  return out;
}

std::string sv_name(const Network& net, SvHandle sv) {
  const NodePhase& np = net.node_phase(sv.slot);
  std::string kind = sv.kind == SvKind::V ? "V" : "theta";
  return kind + "_" + phase_letter(np.phase) + "_" +
         net.grid().nodes[static_cast<std::size_t>(np.node)].id;
}

SvHandle parse_sv(const Network& net, const std::string& name) {
  SvKind kind;
  std::string rest;
  if (name.rfind("V_", 0) == 0) {
    kind = SvKind::V;
    rest = name.substr(2);
  } else if (name.rfind("theta_", 0) == 0) {
    kind = SvKind::Theta;
    rest = name.substr(6);
  } else {
    throw std::invalid_argument("state variable names look like V_a_652 or theta_c_611, got '" +
                                name + "'");
  }
  if (rest.size() < 3 || rest[1] != '_')
    throw std::invalid_argument("state variable names look like V_a_652 or theta_c_611, got '" +
                                name + "'");
  Phase ph;
  try {
    ph = phase_from_letter(rest[0]);
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("unknown phase in state variable name '" + name + "'");
  }
  const std::string node_name = rest.substr(2);
  const Node* node = net.grid().resolve_node(node_name);
  if (!node) throw std::invalid_argument("unknown node in state variable name '" + name + "'");
  const int s = net.slot(net.grid().node_index(node->id), ph);
  if (s < 0)
    throw std::invalid_argument("node '" + node_name + "' does not carry phase " +
                                std::string(1, rest[0]));
  return SvHandle{s, kind};
}

ChangeableSvSet changeable_state_variables(const Network& net, const AttackArea& area) {
  ChangeableSvSet out;
  for (int s = 0; s < net.node_phase_count(); ++s) {
    const NodePhase& np = net.node_phase(s);
    if (!area.contains(np.node, np.phase)) continue;
    if (np.node == net.slack_node()) continue;
    if (area.is_boundary(np.node)) continue;
    out.svs.push_back(SvHandle{s, SvKind::V});
    out.svs.push_back(SvHandle{s, SvKind::Theta});
  }
  if (out.svs.empty())
    throw std::invalid_argument("attack area has no changeable state variables");
  return out;
}

}  // namespace gridfdi
