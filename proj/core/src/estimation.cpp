#include "gridfdi/estimation.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <set>
#include <stdexcept>

#include "gridfdi/powerflow.hpp"
#include "gridfdi/diagnostics.hpp"

namespace gridfdi {

namespace {

int resolved_node_index(const Network& net, const std::string& id_or_alias,
                        const std::string& meas_id) {
  const Node* n = net.grid().resolve_node(id_or_alias);
  if (!n) throw std::out_of_range("measurement '" + meas_id + "' references an unknown node");
  return net.grid().node_index(n->id);
}

}  // namespace

Eigen::MatrixXd measurement_jacobian(const Network& net, const MeasurementSet& z,
                                     const PhasorState& x) {
  const int m = z.size();
  const int nu = net.unknown_count();
  const int nf = net.free_slot_count();
  Eigen::MatrixXd h(m, nu);
  h.setZero();

  auto fill_power_row = [&](int row, const detail::ComplexGradient& g, bool real_part) {
    for (int t = 0; t < net.node_phase_count(); ++t) {
      const int ct = net.theta_unknown(t);
      if (ct < 0) continue;
      const Complex dth = g.dtheta[t] * net.sbase();
      const Complex dv = g.dv[t] * net.sbase();
      h(row, ct) = real_part ? dth.real() : dth.imag();
      h(row, ct + nf) = real_part ? dv.real() : dv.imag();
    }
  };

  for (int k = 0; k < m; ++k) {
    const Measurement& meas = z.readings[static_cast<std::size_t>(k)];
    switch (meas.kind) {
      case MeasKind::PF:
      case MeasKind::QF: {
        const int from = resolved_node_index(net, meas.from, meas.id());
        const int to = resolved_node_index(net, meas.to, meas.id());
        int branch = -1;
        bool at_from = true;
        for (int b = 0; b < net.branch_count(); ++b) {
          const Branch& br = net.grid().branches[static_cast<std::size_t>(b)];
          if (net.grid().node_index(br.from) == from && net.grid().node_index(br.to) == to) {
            branch = b;
            at_from = true;
            break;
          }
          if (net.grid().node_index(br.from) == to && net.grid().node_index(br.to) == from) {
            branch = b;
            at_from = false;
            break;
          }
        }
        if (branch < 0)
          throw std::out_of_range("measurement '" + meas.id() + "' references no existing branch");
        fill_power_row(k, detail::branch_flow_gradient(net, x, branch, at_from, meas.phase),
                       meas.kind == MeasKind::PF);
        break;
      }
      case MeasKind::PI:
      case MeasKind::QI: {
        const int node = resolved_node_index(net, meas.node, meas.id());
        fill_power_row(k, detail::node_injection_gradient(net, x, node, meas.phase),
                       meas.kind == MeasKind::PI);
        break;
      }
      case MeasKind::VM: {
        const int node = resolved_node_index(net, meas.node, meas.id());
        const int s = net.slot(node, meas.phase);
        if (s < 0)
          throw std::out_of_range("measurement '" + meas.id() + "' references an absent phase");
        const int col = net.v_unknown(s);
        if (col >= 0) h(k, col) = net.vbase(node);
        break;
      }
      case MeasKind::VA: {
        const int node = resolved_node_index(net, meas.node, meas.id());
        const int s = net.slot(node, meas.phase);
        if (s < 0)
          throw std::out_of_range("measurement '" + meas.id() + "' references an absent phase");
        const int col = net.theta_unknown(s);
        if (col >= 0) h(k, col) = 1.0;
        break;
      }
    }
  }
  return h;
}

namespace {

Eigen::VectorXd measurement_values(const Network& net, const MeasurementSet& z,
                                   const PhasorState& x) {
  Eigen::VectorXd out(z.size());
  for (int k = 0; k < z.size(); ++k)
    out[k] = evaluate_measurement(net, x, z.readings[static_cast<std::size_t>(k)]);
  return out;
}

}  // namespace

EstimateResult estimate(const Network& net, const MeasurementSet& z, const PhasorState* init,
                        const EstimateOptions& opts) {
  const int m = z.size();
  const int nu = net.unknown_count();
  const int nf = net.free_slot_count();
  if (m == 0) throw std::invalid_argument("cannot estimate from an empty measurement set");

  Eigen::VectorXd inv_sigma(m);
  for (int k = 0; k < m; ++k) {
    const double sigma = z.readings[static_cast<std::size_t>(k)].sigma;
    if (!(sigma > 0.0))
      throw std::invalid_argument("measurement '" + z.readings[static_cast<std::size_t>(k)].id() +
                                  "' needs a positive sigma");
    inv_sigma[k] = 1.0 / sigma;
  }

  // Slack magnitudes are pinned to the first VM reading per slack phase when
  // available (converted to pu), otherwise to the dataset setpoints.
  const int slack = net.slack_node();
  std::array<std::optional<double>, 3> pin;
  std::set<int> pinned_rows;
  for (int k = 0; k < m; ++k) {
    const Measurement& meas = z.readings[static_cast<std::size_t>(k)];
    if (meas.kind != MeasKind::VM) continue;
    const Node* n = net.grid().resolve_node(meas.node);
    if (!n || net.grid().node_index(n->id) != slack) continue;
    auto& slot_pin = pin[static_cast<int>(meas.phase)];
    if (slot_pin) continue;
    slot_pin = meas.value / net.vbase(slack);
    pinned_rows.insert(k);
  }

  PhasorState x = init ? *init : flat_state(net);
  for (int s = 0; s < net.node_phase_count(); ++s) {
    if (!net.is_slack_slot(s)) continue;
    const Phase ph = net.node_phase(s).phase;
    x.theta[s] = net.slack_theta_set(ph);
    x.v[s] = pin[static_cast<int>(ph)] ? *pin[static_cast<int>(ph)] : net.slack_vset(ph);
  }

  EstimateResult result;
  result.dof = m - static_cast<int>(pinned_rows.size()) - nu;

  Eigen::VectorXd h_val = measurement_values(net, z, x);
  Eigen::VectorXd values(m);
  for (int k = 0; k < m; ++k) values[k] = z.readings[static_cast<std::size_t>(k)].value;
  Eigen::VectorXd r = values - h_val;
  double objective = (inv_sigma.array() * r.array()).square().sum();

  Eigen::MatrixXd jac;  // kept for the residual covariance at the solution
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    jac = measurement_jacobian(net, z, x);
    Eigen::MatrixXd a = inv_sigma.asDiagonal() * jac;
    Eigen::VectorXd b = inv_sigma.asDiagonal() * r;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < nu)
      throw ObservabilityError(
          "measurement set leaves " + std::to_string(nu - qr.rank()) +
              " state direction(s) undetermined",
          nu - qr.rank());
    Eigen::VectorXd step = qr.solve(b);

    double alpha = 1.0;
    bool improved = false;
    PhasorState trial = x;
    for (int halvings = 0; halvings < 16; ++halvings, alpha *= 0.5) {
      bool valid = true;
      for (int s = 0; s < net.node_phase_count(); ++s) {
        const int k = net.theta_unknown(s);
        if (k < 0) continue;
        trial.theta[s] = x.theta[s] + alpha * step[k];
        trial.v[s] = x.v[s] + alpha * step[k + nf];
        if (trial.v[s] < 1e-3) valid = false;
      }
      if (!valid) continue;
      Eigen::VectorXd trial_h = measurement_values(net, z, trial);
      Eigen::VectorXd trial_r = values - trial_h;
      const double trial_obj = (inv_sigma.array() * trial_r.array()).square().sum();
      if (trial_obj <= objective * (1.0 + 1e-14) || trial_obj <= 1e-300) {
        x = trial;
        r = trial_r;
        objective = trial_obj;
        improved = true;
        break;
      }
    }
    ++result.iterations;
    if (!improved) break;  // stalled; reported as non-converged below
    if (step.lpNorm<Eigen::Infinity>() <= opts.tol) {
      result.converged = true;
      break;
    }
  }

  result.state = x;
  result.objective = objective;
  result.residual_norm = std::sqrt(objective);
  result.residuals = r;

  // Residual covariance diagonal S = R - H G^-1 H^T for the normalized test.
  jac = measurement_jacobian(net, z, x);
  Eigen::MatrixXd a = inv_sigma.asDiagonal() * jac;
  Eigen::MatrixXd gain = a.transpose() * a;
  Eigen::LDLT<Eigen::MatrixXd> gain_ldlt(gain);
  result.normalized_residuals.setZero(m);
  result.normalizable.assign(static_cast<std::size_t>(m), 0);
  if (gain_ldlt.info() == Eigen::Success) {
    Eigen::MatrixXd g_inv_ht = gain_ldlt.solve(jac.transpose());  // nu x m
    for (int k = 0; k < m; ++k) {
      if (pinned_rows.count(k)) continue;  // pinned rows carry no residual information
      const double sigma = z.readings[static_cast<std::size_t>(k)].sigma;
      const double r_kk = sigma * sigma;
      const double s_kk = r_kk - jac.row(k).dot(g_inv_ht.col(k));
      if (s_kk < 1e-8 * r_kk) continue;  // critical reading, not normalizable
      result.normalizable[static_cast<std::size_t>(k)] = 1;
      result.normalized_residuals[k] = std::abs(r[k]) / std::sqrt(s_kk);
    }
  }
  return result;
}

BddVerdict detect_bad_data(const EstimateResult& result, const MeasurementSet& z,
                           const BddOptions& opts) {
  if (!result.converged)
    throw std::logic_error("bad-data detection needs a converged estimate");
  if (result.dof < 1)
    throw std::logic_error("bad-data detection needs positive redundancy (dof = " +
                           std::to_string(result.dof) + ")");

  BddVerdict verdict;
  verdict.objective = result.objective;
  if (opts.tau) {
    verdict.tau = *opts.tau;
  } else {
    boost::math::chi_squared dist(static_cast<double>(result.dof));
    verdict.tau = boost::math::quantile(dist, opts.chi2_quantile);
  }
  verdict.max_normalized_residual = 0.0;
  for (int k = 0; k < result.normalized_residuals.size(); ++k) {
    const double rn = result.normalized_residuals[k];
    verdict.max_normalized_residual = std::max(verdict.max_normalized_residual, rn);
    if (rn > opts.rn_threshold)
      verdict.suspects.push_back({z.readings[static_cast<std::size_t>(k)].id(), rn});
  }
  std::sort(verdict.suspects.begin(), verdict.suspects.end(),
            [](const auto& lhs, const auto& rhs) { return lhs.second > rhs.second; });
  verdict.clean = verdict.objective <= verdict.tau &&
                  verdict.max_normalized_residual <= opts.rn_threshold;
  return verdict;
}

}  // namespace gridfdi
