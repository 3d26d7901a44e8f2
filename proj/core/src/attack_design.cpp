#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "gridfdi/powerflow.hpp"
#include "gridfdi/attack.hpp"
#include "gridfdi/diagnostics.hpp"

namespace gridfdi {

namespace {

double sv_value(const PhasorState& x, SvHandle sv) {
  return sv.kind == SvKind::V ? x.v[sv.slot] : x.theta[sv.slot];
}

void set_sv(PhasorState& x, SvHandle sv, double value) {
  if (sv.kind == SvKind::V)
    x.v[sv.slot] = value;
  else
    x.theta[sv.slot] = value;
}

/// Power a node pushes into its incident branches on one phase. Unlike
/// node_injection this excludes the local shunt, so the per-phase change-sum
/// rows cancel the loss terms exactly and reduce to the zero-injection rows
/// (a shunt's output is part of the balance, not a metered injection change).
Complex flow_injection(const Network& net, const PhasorState& x, int node, Phase ph) {
  Complex total{0.0, 0.0};
  for (const auto& [branch, is_from] : net.incident(node)) {
    const Branch& b = net.grid().branches[static_cast<std::size_t>(branch)];
    if (!b.phases.contains(ph)) continue;
    total += branch_flow(net, x, branch, is_from, ph);
  }
  return total;
}

detail::ComplexGradient flow_injection_gradient(const Network& net, const PhasorState& x, int node,
                                                Phase ph) {
  detail::ComplexGradient g;
  g.dtheta.setZero(net.node_phase_count());
  g.dv.setZero(net.node_phase_count());
  for (const auto& [branch, is_from] : net.incident(node)) {
    const Branch& b = net.grid().branches[static_cast<std::size_t>(branch)];
    if (!b.phases.contains(ph)) continue;
    detail::ComplexGradient gb = detail::branch_flow_gradient(net, x, branch, is_from, ph);
    g.dtheta += gb.dtheta;
    g.dv += gb.dv;
  }
  return g;
}

}  // namespace

ConstraintSystem::ConstraintSystem(const Network& net, AttackArea area, PhasorState anchor)
    : net_(&net), area_(std::move(area)), anchor_(std::move(anchor)) {
  const Grid& g = net.grid();

  for (int zn : area_.zero_injection_nodes) {
    for (Phase p : g.nodes[static_cast<std::size_t>(zn)].phases) {
      const std::string site =
          std::string(1, phase_letter(p)) + "_" + g.display_name(g.nodes[static_cast<std::size_t>(zn)].id);
      rows_.push_back(ConstraintRow{ConstraintRow::Type::zero_injection_p, zn, p,
                                    "P_" + site + " = 0 (zero injection)"});
      rows_.push_back(ConstraintRow{ConstraintRow::Type::zero_injection_q, zn, p,
                                    "Q_" + site + " = 0 (zero injection)"});
    }
  }

  PhaseSet phases;
  for (const NodePhase& np : area_.members) phases.insert(np.phase);
  for (Phase p : phases) {
    rows_.push_back(ConstraintRow{ConstraintRow::Type::change_sum_p, -1, p,
                                  std::string("sum dP_") + phase_letter(p) +
                                      " balances the in-area loss change"});
    rows_.push_back(ConstraintRow{ConstraintRow::Type::change_sum_q, -1, p,
                                  std::string("sum dQ_") + phase_letter(p) +
                                      " balances the in-area loss change"});
  }

  // Change-sum bookkeeping: metered members (everything but the interior
  // zero-injection nodes) and in-area branch-phases, with anchor values cached.
  std::set<int> zero_inj(area_.zero_injection_nodes.begin(), area_.zero_injection_nodes.end());
  for (const NodePhase& np : area_.members) {
    if (zero_inj.count(np.node)) continue;
    const int p = static_cast<int>(np.phase);
    cs_nodes_[p].push_back(np.node);
    cs_anchor_inj_[p].push_back(flow_injection(net, anchor_, np.node, np.phase));
  }
  for (int b = 0; b < net.branch_count(); ++b) {
    const Branch& br = g.branches[static_cast<std::size_t>(b)];
    const int from = g.node_index(br.from);
    const int to = g.node_index(br.to);
    for (Phase p : br.phases) {
      if (!area_.contains(from, p) || !area_.contains(to, p)) continue;
      cs_branches_[static_cast<int>(p)].push_back(b);
      cs_anchor_loss_[static_cast<int>(p)].push_back(branch_loss(net, anchor_, b, p));
    }
  }

  // Numerically independent subset at the anchor, kept in assembly order so
  // the zero-injection rows win over the redundant change sums.
  ChangeableSvSet all_svs = changeable_state_variables(net, area_);
  Eigen::MatrixXd jac = full_jacobian(anchor_, all_svs.svs);
  std::vector<Eigen::VectorXd> basis;
  for (int r = 0; r < static_cast<int>(rows_.size()); ++r) {
    Eigen::VectorXd w = jac.row(r);
    const double n0 = w.norm();
    if (n0 < 1e-14) continue;
    for (int pass = 0; pass < 2; ++pass)
      for (const Eigen::VectorXd& q : basis) w -= q.dot(w) * q;
    if (w.norm() > 1e-10 * n0) {
      independent_.push_back(r);
      basis.push_back(w.normalized());
    }
  }
}

Complex ConstraintSystem::row_value(const PhasorState& x, const ConstraintRow& row) const {
  const Network& net = *net_;
  switch (row.type) {
    case ConstraintRow::Type::zero_injection_p:
    case ConstraintRow::Type::zero_injection_q:
      return node_injection(net, x, row.node, row.phase);
    case ConstraintRow::Type::change_sum_p:
    case ConstraintRow::Type::change_sum_q: {
      const int p = static_cast<int>(row.phase);
      Complex total{0.0, 0.0};
      for (std::size_t i = 0; i < cs_nodes_[p].size(); ++i)
        total += flow_injection(net, x, cs_nodes_[p][i], row.phase) - cs_anchor_inj_[p][i];
      for (std::size_t i = 0; i < cs_branches_[p].size(); ++i)
        total -= branch_loss(net, x, cs_branches_[p][i], row.phase) - cs_anchor_loss_[p][i];
      return total;
    }
  }
  return Complex{0.0, 0.0};
}

detail::ComplexGradient ConstraintSystem::row_gradient(const PhasorState& x,
                                                       const ConstraintRow& row) const {
  const Network& net = *net_;
  switch (row.type) {
    case ConstraintRow::Type::zero_injection_p:
    case ConstraintRow::Type::zero_injection_q:
      return detail::node_injection_gradient(net, x, row.node, row.phase);
    case ConstraintRow::Type::change_sum_p:
    case ConstraintRow::Type::change_sum_q: {
      const int p = static_cast<int>(row.phase);
      detail::ComplexGradient g;
      g.dtheta.setZero(net.node_phase_count());
      g.dv.setZero(net.node_phase_count());
      for (int node : cs_nodes_[p]) {
        detail::ComplexGradient gn = flow_injection_gradient(net, x, node, row.phase);
        g.dtheta += gn.dtheta;
        g.dv += gn.dv;
      }
      for (int b : cs_branches_[p]) {
        detail::ComplexGradient gf = detail::branch_flow_gradient(net, x, b, true, row.phase);
        detail::ComplexGradient gt = detail::branch_flow_gradient(net, x, b, false, row.phase);
        g.dtheta -= gf.dtheta + gt.dtheta;
        g.dv -= gf.dv + gt.dv;
      }
      return g;
    }
  }
  detail::ComplexGradient empty;
  empty.dtheta.setZero(net.node_phase_count());
  empty.dv.setZero(net.node_phase_count());
  return empty;
}

namespace {

bool is_p_row(const ConstraintRow& row) {
  return row.type == ConstraintRow::Type::zero_injection_p ||
         row.type == ConstraintRow::Type::change_sum_p;
}

}  // namespace

Eigen::VectorXd ConstraintSystem::residuals(const PhasorState& x) const {
  Eigen::VectorXd out(static_cast<int>(rows_.size()));
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const Complex value = row_value(x, rows_[r]);
    out[static_cast<int>(r)] = is_p_row(rows_[r]) ? value.real() : value.imag();
  }
  return out;
}

Eigen::VectorXd ConstraintSystem::independent_residuals(const PhasorState& x) const {
  Eigen::VectorXd out(static_cast<int>(independent_.size()));
  for (std::size_t i = 0; i < independent_.size(); ++i) {
    const ConstraintRow& row = rows_[static_cast<std::size_t>(independent_[i])];
    const Complex value = row_value(x, row);
    out[static_cast<int>(i)] = is_p_row(row) ? value.real() : value.imag();
  }
  return out;
}

Eigen::MatrixXd ConstraintSystem::jacobian_rows(const PhasorState& x,
                                                const std::vector<int>& row_indices,
                                                const std::vector<SvHandle>& svs) const {
  Eigen::MatrixXd out(static_cast<int>(row_indices.size()), static_cast<int>(svs.size()));
  for (std::size_t i = 0; i < row_indices.size(); ++i) {
    const ConstraintRow& row = rows_[static_cast<std::size_t>(row_indices[i])];
    const detail::ComplexGradient g = row_gradient(x, row);
    const bool real_part = is_p_row(row);
    for (std::size_t j = 0; j < svs.size(); ++j) {
      const SvHandle sv = svs[j];
      const Complex c = sv.kind == SvKind::Theta ? g.dtheta[sv.slot] : g.dv[sv.slot];
      out(static_cast<int>(i), static_cast<int>(j)) = real_part ? c.real() : c.imag();
    }
  }
  return out;
}

Eigen::MatrixXd ConstraintSystem::independent_jacobian(const PhasorState& x,
                                                       const std::vector<SvHandle>& svs) const {
  return jacobian_rows(x, independent_, svs);
}

Eigen::MatrixXd ConstraintSystem::full_jacobian(const PhasorState& x,
                                                const std::vector<SvHandle>& svs) const {
  std::vector<int> all(rows_.size());
  for (std::size_t r = 0; r < rows_.size(); ++r) all[r] = static_cast<int>(r);
  return jacobian_rows(x, all, svs);
}

ConstraintSystem build_constraints(const Network& net, const AttackArea& area,
                                   const PhasorState& anchor) {
  return ConstraintSystem(net, area, anchor);
}

SvBounds default_bounds(const Network& net, const ChangeableSvSet& svs,
                        const PhasorState& anchor) {
  (void)net;
  constexpr double ten_degrees = 10.0 * std::numbers::pi / 180.0;
  SvBounds bounds;
  bounds.lo.resize(static_cast<int>(svs.svs.size()));
  bounds.hi.resize(static_cast<int>(svs.svs.size()));
  for (std::size_t i = 0; i < svs.svs.size(); ++i) {
    const SvHandle sv = svs.svs[i];
    const double at_anchor = sv_value(anchor, sv);
    if (sv.kind == SvKind::V) {
      bounds.lo[static_cast<int>(i)] = std::min(0.95, at_anchor - 1e-6);
      bounds.hi[static_cast<int>(i)] = std::max(1.05, at_anchor + 1e-6);
    } else {
      bounds.lo[static_cast<int>(i)] = at_anchor - ten_degrees;
      bounds.hi[static_cast<int>(i)] = at_anchor + ten_degrees;
    }
  }
  return bounds;
}

namespace {

int changeable_index(const ChangeableSvSet& changeable, SvHandle sv) {
  for (std::size_t i = 0; i < changeable.svs.size(); ++i)
    if (changeable.svs[i] == sv) return static_cast<int>(i);
  return -1;
}

int find_flow_branch(const Network& net, const Measurement& m, bool& at_from) {
  const Node* fn = net.grid().resolve_node(m.from);
  const Node* tn = net.grid().resolve_node(m.to);
  if (!fn || !tn)
    throw std::out_of_range("measurement '" + m.id() + "' references unknown nodes");
  for (int b = 0; b < net.branch_count(); ++b) {
    const Branch& branch = net.grid().branches[static_cast<std::size_t>(b)];
    if (branch.from == fn->id && branch.to == tn->id) {
      at_from = true;
      return b;
    }
    if (branch.from == tn->id && branch.to == fn->id) {
      at_from = false;
      return b;
    }
  }
  throw std::out_of_range("measurement '" + m.id() + "' references no existing branch");
}

/// Fabricates the meter set for a designed state: every structurally affected
/// reading moves by the exact model delta h(attacked) - h(anchor), everything
/// else is copied bit for bit.
AttackResult fabricate(const Network& net, const AttackArea& area, const PhasorState& anchor,
                       const PhasorState& attacked, const MeasurementSet& z,
                       std::vector<std::pair<SvHandle, double>> initialization,
                       std::vector<SvHandle> fixed, AttackDiagnostics diag, bool constrained) {
  const Grid& g = net.grid();
  auto node_interior = [&](int n) { return area.node_in_area(n) && !area.is_boundary(n); };

  // Flows change on every branch-phase with an interior endpoint (inter-phase
  // coupling spreads interior state changes over all carried phases).
  std::set<std::pair<int, int>> changed_flows;
  for (int b = 0; b < net.branch_count(); ++b) {
    const Branch& br = g.branches[static_cast<std::size_t>(b)];
    const int from = g.node_index(br.from);
    const int to = g.node_index(br.to);
    if (!node_interior(from) && !node_interior(to)) continue;
    for (Phase p : br.phases) changed_flows.insert({b, static_cast<int>(p)});
  }

  // Every endpoint of a changed flow needs something to absorb the implied
  // injection change: an injection meter, the (unmetered) slack source, or a
  // zero-injection node handled by the constraint system.
  std::set<int> zero_inj(area.zero_injection_nodes.begin(), area.zero_injection_nodes.end());
  bool slack_warned = false;
  for (const auto& [b, p_int] : changed_flows) {
    const Branch& br = g.branches[static_cast<std::size_t>(b)];
    const Phase p = static_cast<Phase>(p_int);
    for (const std::string& end_id : {br.from, br.to}) {
      const int n = g.node_index(end_id);
      const Node& node = g.nodes[static_cast<std::size_t>(n)];
      if (node.role == NodeRole::slack) {
        if (!slack_warned) {
          diag.warnings.push_back(
              "flow changes reach the slack source; they are absorbed by its unmetered injection");
          slack_warned = true;
        }
        continue;
      }
      if (node.role == NodeRole::zero_injection) {
        if (constrained && zero_inj.count(n)) continue;
        throw std::invalid_argument(
            "the attack changes the flow on branch '" + br.id + "' phase " +
            std::string(1, phase_letter(p)) + " at zero-injection node '" + end_id +
            "', which has no meter and no constraint to absorb it");
      }
      const std::string meter_id = "PI:" + end_id + ":" + phase_letter(p);
      if (z.index_of(meter_id) < 0)
        throw std::invalid_argument("the attack changes the flow on branch '" + br.id +
                                    "' phase " + std::string(1, phase_letter(p)) + " at node '" +
                                    end_id + "', which has no injection meter to absorb it");
    }
  }

  AttackResult out;
  out.area = area;
  out.initialization = std::move(initialization);
  out.fixed = std::move(fixed);
  out.anchor = anchor;
  out.attacked = attacked;
  out.z_before = z;
  out.z_after = z;

  const int m = z.size();
  out.design_before.resize(static_cast<std::size_t>(m));
  out.design_after.resize(static_cast<std::size_t>(m));
  out.changed.assign(static_cast<std::size_t>(m), 0);

  for (int k = 0; k < m; ++k) {
    const Measurement& meas = z.readings[static_cast<std::size_t>(k)];
    const double h0 = evaluate_measurement(net, anchor, meas);
    const double h1 = evaluate_measurement(net, attacked, meas);
    out.design_before[static_cast<std::size_t>(k)] = h0;
    out.design_after[static_cast<std::size_t>(k)] = h1;

    bool changed = false;
    switch (meas.kind) {
      case MeasKind::PF:
      case MeasKind::QF: {
        bool at_from = true;
        const int b = find_flow_branch(net, meas, at_from);
        changed = changed_flows.count({b, static_cast<int>(meas.phase)}) > 0;
        break;
      }
      case MeasKind::PI:
      case MeasKind::QI: {
        const Node* node = g.resolve_node(meas.node);
        if (!node)
          throw std::out_of_range("measurement '" + meas.id() + "' references an unknown node");
        const int n = g.node_index(node->id);
        if (node_interior(n)) {
          changed = true;
        } else {
          for (const auto& [b, is_from] : net.incident(n)) {
            const Branch& br = g.branches[static_cast<std::size_t>(b)];
            if (!br.phases.contains(meas.phase)) continue;
            const int other = g.node_index(is_from ? br.to : br.from);
            if (node_interior(other)) {
              changed = true;
              break;
            }
          }
        }
        break;
      }
      case MeasKind::VM:
      case MeasKind::VA: {
        const Node* node = g.resolve_node(meas.node);
        if (!node)
          throw std::out_of_range("measurement '" + meas.id() + "' references an unknown node");
        const int n = g.node_index(node->id);
        changed = node_interior(n) && area.contains(n, meas.phase);
        break;
      }
    }

    if (changed) {
      out.changed[static_cast<std::size_t>(k)] = 1;
      out.z_after.readings[static_cast<std::size_t>(k)].value += h1 - h0;
    } else if (std::abs(h1 - h0) > 1e-9 * std::max(1.0, std::abs(h0))) {
      diag.warnings.push_back("reading " + meas.id() +
                              " was expected to stay put but moved by the design (locality bug?)");
    }
  }

  out.diag = std::move(diag);
  return out;
}

}  // namespace

AttackResult design_attack_a2(const Network& net, const AttackArea& area,
                              const PhasorState& anchor, const MeasurementSet& z,
                              SvHandle init_sv, double init_delta,
                              const std::vector<SvHandle>& fixed,
                              const std::optional<SvBounds>& bounds_opt,
                              const DesignOptions& opts) {
  if (!area.a2)
    throw std::invalid_argument(
        "area has no interior zero-injection node; use the direct design instead");

  const ChangeableSvSet changeable = changeable_state_variables(net, area);
  const int init_idx = changeable_index(changeable, init_sv);
  if (init_idx < 0)
    throw std::invalid_argument("initialized variable " + sv_name(net, init_sv) +
                                " is not changeable in this area");
  std::set<int> fixed_idx;
  for (SvHandle sv : fixed) {
    const int idx = changeable_index(changeable, sv);
    if (idx < 0)
      throw std::invalid_argument("fixed variable " + sv_name(net, sv) +
                                  " is not changeable in this area");
    if (idx == init_idx)
      throw std::invalid_argument("variable " + sv_name(net, sv) +
                                  " cannot be both initialized and fixed");
    if (!fixed_idx.insert(idx).second)
      throw std::invalid_argument("variable " + sv_name(net, sv) + " is fixed twice");
  }

  std::vector<SvHandle> free_svs;
  std::vector<int> free_idx;
  for (std::size_t i = 0; i < changeable.svs.size(); ++i) {
    if (static_cast<int>(i) == init_idx || fixed_idx.count(static_cast<int>(i))) continue;
    free_svs.push_back(changeable.svs[i]);
    free_idx.push_back(static_cast<int>(i));
  }

  ConstraintSystem cs = build_constraints(net, area, anchor);
  const int k = cs.independent_count();
  const int f = static_cast<int>(free_svs.size());

  AttackDiagnostics diag;
  diag.assembled_constraints = static_cast<int>(cs.rows().size());
  diag.independent_constraints = k;

  if (k != f) {
    std::vector<std::string> suggestions;
    if (f > k) {
      Eigen::MatrixXd jac = cs.independent_jacobian(anchor, free_svs);
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(jac);
      const auto& perm = qr.colsPermutation().indices();
      for (int c = k; c < f; ++c)
        suggestions.push_back(sv_name(net, free_svs[static_cast<std::size_t>(perm[c])]));
      std::sort(suggestions.begin(), suggestions.end());
    }
    std::string message = "the area yields " + std::to_string(k) +
                          " independent constraint(s) but " + std::to_string(f) +
                          " free state variable(s); ";
    if (f > k) {
      message += "fix " + std::to_string(f - k) + " more (suggested: ";
      for (std::size_t i = 0; i < suggestions.size(); ++i) {
        if (i) message += ", ";
        message += suggestions[i];
      }
      message += ")";
    } else {
      message += "unfix " + std::to_string(k - f) + " of the fixed variables";
    }
    throw DofError(message, k, f, std::move(suggestions));
  }

  const SvBounds bounds = bounds_opt ? *bounds_opt : default_bounds(net, changeable, anchor);
  if (bounds.lo.size() != static_cast<int>(changeable.svs.size()) ||
      bounds.hi.size() != static_cast<int>(changeable.svs.size()))
    throw std::invalid_argument("bounds must cover every changeable state variable");

  PhasorState x = anchor;
  const double init_target = sv_value(anchor, init_sv) + init_delta;
  set_sv(x, init_sv, init_target);
  if (init_target < bounds.lo[init_idx] || init_target > bounds.hi[init_idx])
    diag.warnings.push_back("initialized value of " + sv_name(net, init_sv) +
                            " lies outside the design bounds");

  // A square system can still be rank-deficient for a poor choice of free
  // variables; report that as a degree-of-freedom problem with a better split.
  {
    Eigen::MatrixXd j0 = cs.independent_jacobian(x, free_svs);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(j0);
    if (qr.rank() < k) {
      std::vector<std::string> suggestions;
      const auto& perm = qr.colsPermutation().indices();
      for (int c = qr.rank(); c < f; ++c)
        suggestions.push_back(sv_name(net, free_svs[static_cast<std::size_t>(perm[c])]));
      std::sort(suggestions.begin(), suggestions.end());
      throw DofError(
          "the chosen free variables leave the constraints rank-deficient; swap out: " +
              suggestions.front(),
          k, f, std::move(suggestions));
    }
  }

  Eigen::VectorXd g = cs.independent_residuals(x);
  double g_norm = g.lpNorm<Eigen::Infinity>();
  while (g_norm > opts.tol) {
    if (diag.iterations >= opts.max_iter)
      throw SolverError("constraint solve did not converge in " + std::to_string(opts.max_iter) +
                        " iterations (residual " + std::to_string(g_norm) + " pu)");
    Eigen::MatrixXd jac = cs.independent_jacobian(x, free_svs);
    Eigen::VectorXd step = jac.partialPivLu().solve(-g);
    if (!step.allFinite()) throw SolverError("constraint Jacobian is singular");

    double alpha = 1.0;
    bool improved = false;
    for (int halvings = 0; halvings < 16; ++halvings, alpha *= 0.5) {
      PhasorState trial = x;
      for (int i = 0; i < f; ++i) {
        double value = sv_value(x, free_svs[static_cast<std::size_t>(i)]) + alpha * step[i];
        value = std::clamp(value, bounds.lo[free_idx[static_cast<std::size_t>(i)]],
                           bounds.hi[free_idx[static_cast<std::size_t>(i)]]);
        set_sv(trial, free_svs[static_cast<std::size_t>(i)], value);
      }
      Eigen::VectorXd trial_g = cs.independent_residuals(trial);
      const double trial_norm = trial_g.lpNorm<Eigen::Infinity>();
      if (trial_norm < g_norm || trial_norm <= opts.tol) {
        x = trial;
        g = trial_g;
        g_norm = trial_norm;
        improved = true;
        break;
      }
    }
    ++diag.iterations;
    if (!improved) {
      std::string binding;
      for (int i = 0; i < f; ++i) {
        const double value = sv_value(x, free_svs[static_cast<std::size_t>(i)]);
        const double lo = bounds.lo[free_idx[static_cast<std::size_t>(i)]];
        const double hi = bounds.hi[free_idx[static_cast<std::size_t>(i)]];
        if (value - lo < 1e-12 || hi - value < 1e-12) {
          if (!binding.empty()) binding += ", ";
          binding += sv_name(net, free_svs[static_cast<std::size_t>(i)]);
        }
      }
      throw SolverError(binding.empty()
                            ? "constraint solve stalled"
                            : "constraint solve stalled; bounds binding on: " + binding);
    }
  }

  for (int i = 0; i < f; ++i) {
    const double value = sv_value(x, free_svs[static_cast<std::size_t>(i)]);
    const double lo = bounds.lo[free_idx[static_cast<std::size_t>(i)]];
    const double hi = bounds.hi[free_idx[static_cast<std::size_t>(i)]];
    if (value - lo < 1e-12)
      diag.binding_bounds.push_back(sv_name(net, free_svs[static_cast<std::size_t>(i)]) +
                                    " at lower bound");
    else if (hi - value < 1e-12)
      diag.binding_bounds.push_back(sv_name(net, free_svs[static_cast<std::size_t>(i)]) +
                                    " at upper bound");
  }
  diag.max_constraint_residual = cs.residuals(x).lpNorm<Eigen::Infinity>();

  return fabricate(net, area, anchor, x, z, {{init_sv, init_delta}}, fixed, std::move(diag),
                   /*constrained=*/true);
}

AttackResult design_attack_a1(const Network& net, const AttackArea& area,
                              const PhasorState& anchor, const MeasurementSet& z,
                              const std::vector<std::pair<SvHandle, double>>& deltas,
                              const std::optional<SvBounds>& bounds_opt) {
  if (area.a2)
    throw std::invalid_argument(
        "area contains zero-injection nodes; use the constraint-based design instead");
  if (deltas.empty())
    throw std::invalid_argument("the direct design needs at least one state-variable change");

  const ChangeableSvSet changeable = changeable_state_variables(net, area);
  const SvBounds bounds = bounds_opt ? *bounds_opt : default_bounds(net, changeable, anchor);
  if (bounds.lo.size() != static_cast<int>(changeable.svs.size()) ||
      bounds.hi.size() != static_cast<int>(changeable.svs.size()))
    throw std::invalid_argument("bounds must cover every changeable state variable");

  PhasorState x = anchor;
  std::set<int> seen;
  for (const auto& [sv, delta] : deltas) {
    const int idx = changeable_index(changeable, sv);
    if (idx < 0)
      throw std::invalid_argument("variable " + sv_name(net, sv) +
                                  " is not changeable in this area");
    if (!seen.insert(idx).second)
      throw std::invalid_argument("variable " + sv_name(net, sv) + " is assigned twice");
    const double value = sv_value(anchor, sv) + delta;
    if (value < bounds.lo[idx] || value > bounds.hi[idx])
      throw std::invalid_argument("assignment puts " + sv_name(net, sv) +
                                  " outside the design bounds");
    set_sv(x, sv, value);
  }

  AttackDiagnostics diag;
  return fabricate(net, area, anchor, x, z, deltas, {}, std::move(diag), /*constrained=*/false);
}

}  // namespace gridfdi
