#include "gridfdi/powerflow.hpp"

#include <cmath>

#include "gridfdi/diagnostics.hpp"

namespace gridfdi {

PhasorState flat_state(const Network& net) {
  const int ns = net.node_phase_count();
  PhasorState x;
  x.v.resize(ns);
  x.theta.resize(ns);
  for (int s = 0; s < ns; ++s) {
    Phase ph = net.node_phase(s).phase;
    x.v[s] = net.is_slack_slot(s) ? net.slack_vset(ph) : 1.0;
    x.theta[s] = net.slack_theta_set(ph);
  }
  return x;
}

namespace {

/// Phase current leaving terminal `i` of a branch into the series impedance:
/// I^ph = sum_l Y[ph,l] (U_i^l - U_j^l).
Complex terminal_current(const Network& net, const PhasorState& x, int branch, bool at_from,
                         Phase ph) {
  const Branch& b = net.grid().branches[static_cast<std::size_t>(branch)];
  const int i_node = net.grid().node_index(at_from ? b.from : b.to);
  const int j_node = net.grid().node_index(at_from ? b.to : b.from);
  const Eigen::Matrix3cd& y = net.branch_admittance(branch);
  Complex current{0.0, 0.0};
  for (Phase l : b.phases) {
    Complex ui = x.u(net.slot(i_node, l));
    Complex uj = x.u(net.slot(j_node, l));
    current += y(static_cast<int>(ph), static_cast<int>(l)) * (ui - uj);
  }
  return current;
}

}  // namespace

Complex branch_flow(const Network& net, const PhasorState& x, int branch, bool at_from, Phase ph) {
  const Branch& b = net.grid().branches[static_cast<std::size_t>(branch)];
  if (!b.phases.contains(ph)) return Complex{0.0, 0.0};
  const int i_node = net.grid().node_index(at_from ? b.from : b.to);
  return x.u(net.slot(i_node, ph)) * std::conj(terminal_current(net, x, branch, at_from, ph));
}

Complex shunt_consumed(const Network& net, const PhasorState& x, int s) {
  const double b = net.shunt_b(s);
  if (b == 0.0) return Complex{0.0, 0.0};
  const double v = x.v[s];
  return Complex{0.0, -b * v * v};
}

Complex node_injection(const Network& net, const PhasorState& x, int node, Phase ph) {
  Complex total{0.0, 0.0};
  for (const auto& [branch, is_from] : net.incident(node)) {
    const Branch& b = net.grid().branches[static_cast<std::size_t>(branch)];
    if (!b.phases.contains(ph)) continue;
    total += branch_flow(net, x, branch, is_from, ph);
  }
  const int s = net.slot(node, ph);
  total += shunt_consumed(net, x, s);
  return total;
}

Complex branch_loss(const Network& net, const PhasorState& x, int branch, Phase ph) {
  return branch_flow(net, x, branch, true, ph) + branch_flow(net, x, branch, false, ph);
}

Loading loading_from_grid(const Network& net) {
  const int ns = net.node_phase_count();
  Loading loading;
  loading.p.setZero(ns);
  loading.q.setZero(ns);
  for (int s = 0; s < ns; ++s) {
    loading.p[s] = net.load_p(s);
    loading.q[s] = net.load_q(s);
  }
  return loading;
}

namespace detail {

ComplexGradient branch_flow_gradient(const Network& net, const PhasorState& x, int branch,
                                     bool at_from, Phase ph) {
  const int ns = net.node_phase_count();
  ComplexGradient g;
  g.dtheta.setZero(ns);
  g.dv.setZero(ns);

  const Branch& b = net.grid().branches[static_cast<std::size_t>(branch)];
  if (!b.phases.contains(ph)) return g;
  const int i_node = net.grid().node_index(at_from ? b.from : b.to);
  const int j_node = net.grid().node_index(at_from ? b.to : b.from);
  const Eigen::Matrix3cd& y = net.branch_admittance(branch);
  const Complex j{0.0, 1.0};

  const int s_ph = net.slot(i_node, ph);
  const Complex u_ph = x.u(s_ph);
  const Complex i_conj = std::conj(terminal_current(net, x, branch, at_from, ph));

  for (Phase l : b.phases) {
    const int si = net.slot(i_node, l);
    const int sj = net.slot(j_node, l);
    const Complex ui = x.u(si);
    const Complex uj = x.u(sj);
    const Complex y_phl = y(static_cast<int>(ph), static_cast<int>(l));
    // S = U_i^ph conj(I); dI/dU_i^l = y_phl, dI/dU_j^l = -y_phl.
    g.dtheta[si] += u_ph * std::conj(y_phl * j * ui);
    g.dv[si] += u_ph * std::conj(y_phl * ui / x.v[si]);
    g.dtheta[sj] += u_ph * std::conj(-y_phl * j * uj);
    g.dv[sj] += u_ph * std::conj(-y_phl * uj / x.v[sj]);
  }
  g.dtheta[s_ph] += j * u_ph * i_conj;
  g.dv[s_ph] += u_ph / x.v[s_ph] * i_conj;
  return g;
}

ComplexGradient node_injection_gradient(const Network& net, const PhasorState& x, int node,
                                        Phase ph) {
  const int ns = net.node_phase_count();
  ComplexGradient g;
  g.dtheta.setZero(ns);
  g.dv.setZero(ns);
  for (const auto& [branch, is_from] : net.incident(node)) {
    const Branch& b = net.grid().branches[static_cast<std::size_t>(branch)];
    if (!b.phases.contains(ph)) continue;
    ComplexGradient gb = branch_flow_gradient(net, x, branch, is_from, ph);
    g.dtheta += gb.dtheta;
    g.dv += gb.dv;
  }
  const int s = net.slot(node, ph);
  // Shunt consumption -j b V^2 only varies with the local magnitude.
  g.dv[s] += Complex{0.0, -2.0 * net.shunt_b(s) * x.v[s]};
  return g;
}

}  // namespace detail

namespace {

Eigen::VectorXd loadflow_mismatch(const Network& net, const PhasorState& x,
                                  const Loading& loading) {
  const int nf = net.free_slot_count();
  Eigen::VectorXd f(2 * nf);
  for (int s = 0; s < net.node_phase_count(); ++s) {
    const int k = net.theta_unknown(s);
    if (k < 0) continue;
    const NodePhase& np = net.node_phase(s);
    Complex inj = node_injection(net, x, np.node, np.phase);
    f[k] = inj.real() + loading.p[s];
    f[k + nf] = inj.imag() + loading.q[s];
  }
  return f;
}

}  // namespace

SteadyState solve_loadflow(const Network& net, const Loading& loading,
                           const LoadflowOptions& opts) {
  PhasorState x = flat_state(net);
  for (int s = 0; s < net.node_phase_count(); ++s) {
    if (!net.is_slack_slot(s)) continue;
    const auto& setting = opts.slack_v[static_cast<int>(net.node_phase(s).phase)];
    if (setting) x.v[s] = *setting;
  }

  const int nf = net.free_slot_count();
  const int nu = 2 * nf;
  Eigen::VectorXd f = loadflow_mismatch(net, x, loading);
  double f_norm = f.lpNorm<Eigen::Infinity>();
  int iterations = 0;

  while (f_norm > opts.tol) {
    if (iterations >= opts.max_iter)
      throw SolverError("load flow did not converge in " + std::to_string(opts.max_iter) +
                        " iterations (mismatch " + std::to_string(f_norm) + " pu)");
    ++iterations;

    Eigen::MatrixXd jac(nu, nu);
    for (int s = 0; s < net.node_phase_count(); ++s) {
      const int k = net.theta_unknown(s);
      if (k < 0) continue;
      const NodePhase& np = net.node_phase(s);
      detail::ComplexGradient g = detail::node_injection_gradient(net, x, np.node, np.phase);
      for (int t = 0; t < net.node_phase_count(); ++t) {
        const int ct = net.theta_unknown(t);
        if (ct < 0) continue;
        jac(k, ct) = g.dtheta[t].real();
        jac(k, ct + nf) = g.dv[t].real();
        jac(k + nf, ct) = g.dtheta[t].imag();
        jac(k + nf, ct + nf) = g.dv[t].imag();
      }
    }

    Eigen::VectorXd step = jac.partialPivLu().solve(-f);
    if (!step.allFinite()) throw SolverError("load flow Jacobian is singular");

    double alpha = 1.0;
    bool improved = false;
    PhasorState trial = x;
    Eigen::VectorXd trial_f;
    for (int halvings = 0; halvings < 16; ++halvings, alpha *= 0.5) {
      bool valid = true;
      for (int s = 0; s < net.node_phase_count(); ++s) {
        const int k = net.theta_unknown(s);
        if (k < 0) {
          trial.theta[s] = x.theta[s];
          trial.v[s] = x.v[s];
          continue;
        }
        trial.theta[s] = x.theta[s] + alpha * step[k];
        trial.v[s] = x.v[s] + alpha * step[k + nf];
        if (trial.v[s] < 1e-3) valid = false;
      }
      if (!valid) continue;
      trial_f = loadflow_mismatch(net, trial, loading);
      const double trial_norm = trial_f.lpNorm<Eigen::Infinity>();
      if (trial_norm < f_norm || trial_norm <= opts.tol) {
        x = trial;
        f = trial_f;
        f_norm = trial_norm;
        improved = true;
        break;
      }
    }
    if (!improved) throw SolverError("load flow diverged (step halving stalled)");
  }

  SteadyState out;
  out.state = x;
  out.iterations = iterations;
  out.max_mismatch = f_norm;
  out.flows.resize(static_cast<std::size_t>(net.branch_count()));
  for (int b = 0; b < net.branch_count(); ++b) {
    const Branch& branch = net.grid().branches[static_cast<std::size_t>(b)];
    for (Phase ph : branch.phases) {
      out.flows[static_cast<std::size_t>(b)].from[static_cast<int>(ph)] =
          branch_flow(net, x, b, true, ph);
      out.flows[static_cast<std::size_t>(b)].to[static_cast<int>(ph)] =
          branch_flow(net, x, b, false, ph);
    }
  }
  out.injections.resize(static_cast<std::size_t>(net.node_phase_count()));
  for (int s = 0; s < net.node_phase_count(); ++s) {
    const NodePhase& np = net.node_phase(s);
    out.injections[static_cast<std::size_t>(s)] = node_injection(net, x, np.node, np.phase);
  }
  return out;
}

}  // namespace gridfdi
