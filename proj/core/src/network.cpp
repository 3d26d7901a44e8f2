#include "gridfdi/network.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gridfdi/diagnostics.hpp"

namespace gridfdi {

Network::Network(Grid grid) : grid_(std::move(grid)) {
  validate_grid(grid_);

  const int nn = node_count();
  slot_.assign(nn, {-1, -1, -1});
  for (int i = 0; i < nn; ++i) {
    const Node& node = grid_.nodes[static_cast<std::size_t>(i)];
    if (node.role == NodeRole::slack) slack_node_ = i;
    for (Phase p : node.phases) {
      slot_[static_cast<std::size_t>(i)][static_cast<int>(p)] =
          static_cast<int>(node_phases_.size());
      node_phases_.push_back(NodePhase{i, p});
    }
  }

  const int ns = node_phase_count();
  free_index_.assign(ns, -1);
  for (int s = 0; s < ns; ++s)
    if (node_phases_[static_cast<std::size_t>(s)].node != slack_node_)
      free_index_[static_cast<std::size_t>(s)] = free_slot_count_++;

  y_.resize(grid_.branches.size());
  for (std::size_t b = 0; b < grid_.branches.size(); ++b) {
    const Branch& branch = grid_.branches[b];
    const Node& from = grid_.node_by_id(branch.from);
    const double zbase = from.vbase * from.vbase / grid_.sbase;

    std::vector<int> present;
    for (Phase p : branch.phases) present.push_back(static_cast<int>(p));
    const int k = static_cast<int>(present.size());
    Eigen::MatrixXcd z(k, k);
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < k; ++c)
        z(r, c) = branch.z[static_cast<std::size_t>(present[static_cast<std::size_t>(r)])]
                          [static_cast<std::size_t>(present[static_cast<std::size_t>(c)])] /
                  zbase;
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(z);
    if (!lu.isInvertible())
      throw SolverError("branch '" + branch.id + "' has a singular series impedance block");
    Eigen::MatrixXcd yk = lu.inverse();

    y_[b].setZero();
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < k; ++c)
        y_[b](present[static_cast<std::size_t>(r)], present[static_cast<std::size_t>(c)]) =
            yk(r, c);
  }

  shunt_b_.assign(ns, 0.0);
  for (const Shunt& sh : grid_.shunts) {
    int s = slot(grid_.node_index(sh.node), sh.phase);
    // q_rated VAr injected at nominal voltage -> b = q_rated / sbase in pu.
    shunt_b_[static_cast<std::size_t>(s)] += sh.q_rated / grid_.sbase;
  }

  load_p_.assign(ns, 0.0);
  load_q_.assign(ns, 0.0);
  has_load_.assign(ns, 0);
  for (const LoadEntry& l : grid_.loads) {
    int s = slot(grid_.node_index(l.node), l.phase);
    load_p_[static_cast<std::size_t>(s)] += l.p / grid_.sbase;
    load_q_[static_cast<std::size_t>(s)] += l.q / grid_.sbase;
    has_load_[static_cast<std::size_t>(s)] = 1;
  }

  incident_.assign(nn, {});
  for (int b = 0; b < branch_count(); ++b) {
    const Branch& branch = grid_.branches[static_cast<std::size_t>(b)];
    incident_[static_cast<std::size_t>(grid_.node_index(branch.from))].push_back({b, true});
    incident_[static_cast<std::size_t>(grid_.node_index(branch.to))].push_back({b, false});
  }
}

int Network::slot(const std::string& node_id, Phase ph) const {
  const Node* n = grid_.resolve_node(node_id);
  if (!n) throw std::out_of_range("no node named '" + node_id + "'");
  return slot(grid_.node_index(n->id), ph);
}

double Network::slack_vset(Phase ph) const {
  const Node& s = grid_.nodes[static_cast<std::size_t>(slack_node_)];
  const auto& setting = s.vset[static_cast<int>(ph)];
  return setting ? *setting : 1.0;
}

double Network::slack_theta(Phase ph) {
  constexpr double deg = std::numbers::pi / 180.0;
  switch (ph) {
    case Phase::a: return 0.0;
    case Phase::b: return -120.0 * deg;
    case Phase::c: return 120.0 * deg;
  }
  return 0.0;
}

double Network::slack_theta_set(Phase ph) const {
  const Node& s = grid_.nodes[static_cast<std::size_t>(slack_node_)];
  const auto& offset = s.aset[static_cast<int>(ph)];
  return slack_theta(ph) + (offset ? *offset * std::numbers::pi / 180.0 : 0.0);
}

}  // namespace gridfdi
