#include "gridfdi/topology.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gridfdi/diagnostics.hpp"

namespace gridfdi {

std::vector<std::string> zero_injection_nodes(const Grid& grid) {
  std::vector<std::string> out;
  for (const Node& n : grid.nodes)
    if (n.role == NodeRole::zero_injection) out.push_back(n.id);
  return out;
}

const std::string& MergeMap::merged_id(const std::string& original) const {
  auto it = to_merged.find(original);
  if (it == to_merged.end()) throw std::out_of_range("no merge entry for node '" + original + "'");
  return it->second;
}

const std::vector<std::string>& MergeMap::originals(const std::string& merged) const {
  auto it = groups.find(merged);
  if (it == groups.end()) throw std::out_of_range("'" + merged + "' is not a merged node id");
  return it->second;
}

namespace {

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

std::pair<Grid, MergeMap> merge_switches(const Grid& grid) {
  const int n = static_cast<int>(grid.nodes.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<char> is_switch_from(n, 0);
  std::vector<Diagnostic> problems;

  for (const Branch& b : grid.branches) {
    if (b.kind != BranchKind::switch_) continue;
    int fi = grid.node_index(b.from);
    int ti = grid.node_index(b.to);
    if (fi < 0 || ti < 0) continue;  // validate_grid already rejects this shape
    const Node& fn = grid.nodes[static_cast<std::size_t>(fi)];
    const Node& tn = grid.nodes[static_cast<std::size_t>(ti)];
    if (std::abs(fn.vbase - tn.vbase) > 1e-9 * fn.vbase)
      problems.push_back(Diagnostic{
          0, 0, "switch '" + b.id + "' connects nodes with different voltage bases (" + b.from +
                    ", " + b.to + ")"});
    is_switch_from[static_cast<std::size_t>(fi)] = 1;
    parent[find_root(parent, fi)] = find_root(parent, ti);
  }
  if (!problems.empty()) throw ParseError(std::move(problems));

  // Representative of each group: the earliest member that is a switch
  // from-side, falling back to the earliest member.
  std::vector<int> representative(n, -1);
  for (int i = 0; i < n; ++i) {
    int r = find_root(parent, i);
    int& rep = representative[static_cast<std::size_t>(r)];
    if (rep == -1) {
      rep = i;
    } else if (is_switch_from[static_cast<std::size_t>(i)] &&
               !is_switch_from[static_cast<std::size_t>(rep)]) {
      rep = i;
    }
  }

  MergeMap mm;
  for (int i = 0; i < n; ++i) {
    int r = find_root(parent, i);
    int rep = representative[static_cast<std::size_t>(r)];
    const std::string& rep_id = grid.nodes[static_cast<std::size_t>(rep)].id;
    mm.to_merged[grid.nodes[static_cast<std::size_t>(i)].id] = rep_id;
    auto& group = mm.groups[rep_id];
    if (i == rep)
      group.insert(group.begin(), grid.nodes[static_cast<std::size_t>(i)].id);
    else
      group.push_back(grid.nodes[static_cast<std::size_t>(i)].id);
  }

  Grid merged;
  merged.sbase = grid.sbase;
  for (int i = 0; i < n; ++i) {
    int r = find_root(parent, i);
    if (representative[static_cast<std::size_t>(r)] != i) continue;
    Node node = grid.nodes[static_cast<std::size_t>(i)];
    bool any_slack = false, all_zero = true;
    for (int j = 0; j < n; ++j) {
      if (find_root(parent, j) != r) continue;
      const Node& member = grid.nodes[static_cast<std::size_t>(j)];
      node.phases = node.phases.unite(member.phases);
      if (member.role == NodeRole::slack) any_slack = true;
      if (member.role != NodeRole::zero_injection) all_zero = false;
      for (Phase p : all_phases) {
        if (member.vset[static_cast<int>(p)] && !node.vset[static_cast<int>(p)])
          node.vset[static_cast<int>(p)] = member.vset[static_cast<int>(p)];
        if (member.aset[static_cast<int>(p)] && !node.aset[static_cast<int>(p)])
          node.aset[static_cast<int>(p)] = member.aset[static_cast<int>(p)];
      }
    }
    node.role = any_slack ? NodeRole::slack
                          : (all_zero ? NodeRole::zero_injection : NodeRole::injection);
    merged.nodes.push_back(std::move(node));
  }

  for (const Branch& b : grid.branches) {
    if (b.kind == BranchKind::switch_) continue;
    Branch nb = b;
    nb.from = mm.merged_id(b.from);
    nb.to = mm.merged_id(b.to);
    if (nb.from == nb.to)
      problems.push_back(Diagnostic{
          0, 0, "merging switches collapses branch '" + b.id + "' into a self-loop"});
    merged.branches.push_back(std::move(nb));
  }
  if (!problems.empty()) throw ParseError(std::move(problems));

  auto slot_index = [](const std::vector<LoadEntry>& entries, const std::string& node, Phase p) {
    for (std::size_t i = 0; i < entries.size(); ++i)
      if (entries[i].node == node && entries[i].phase == p) return static_cast<int>(i);
    return -1;
  };
  for (const LoadEntry& l : grid.loads) {
    LoadEntry nl = l;
    nl.node = mm.merged_id(l.node);
    int at = slot_index(merged.loads, nl.node, nl.phase);
    if (at >= 0) {
      merged.loads[static_cast<std::size_t>(at)].p += nl.p;
      merged.loads[static_cast<std::size_t>(at)].q += nl.q;
    } else {
      merged.loads.push_back(std::move(nl));
    }
  }
  for (const Shunt& s : grid.shunts) {
    Shunt ns = s;
    ns.node = mm.merged_id(s.node);
    bool combined = false;
    for (Shunt& existing : merged.shunts) {
      if (existing.node == ns.node && existing.phase == ns.phase) {
        existing.q_rated += ns.q_rated;
        combined = true;
        break;
      }
    }
    if (!combined) merged.shunts.push_back(std::move(ns));
  }

  validate_grid(merged);
  return {std::move(merged), std::move(mm)};
}

}  // namespace gridfdi
