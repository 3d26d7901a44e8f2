#include "gridfdi/dc_model.hpp"

#include <cmath>
#include <stdexcept>

#include "gridfdi/diagnostics.hpp"
#include "gridfdi/network.hpp"

namespace gridfdi {

namespace {

struct DcBranch {
  int from = -1;
  int to = -1;
  double b = 0.0;  // susceptance magnitude 1/x, pu
};

}  // namespace

DcModel build_dc_model(const Network& net) {
  const Grid& grid = net.grid();
  DcModel dc;

  std::vector<int> col_of(static_cast<std::size_t>(net.node_count()), -1);
  for (int n = 0; n < net.node_count(); ++n) {
    if (n == net.slack_node()) continue;
    col_of[static_cast<std::size_t>(n)] = static_cast<int>(dc.col_node.size());
    dc.col_node.push_back(n);
  }
  const int cols = static_cast<int>(dc.col_node.size());

  std::vector<DcBranch> branches;
  for (const Branch& br : grid.branches) {
    if (!br.phases.contains(Phase::a)) continue;
    const Node& from = grid.node_by_id(br.from);
    const double zbase = from.vbase * from.vbase / grid.sbase;
    const double x = br.z[0][0].imag() / zbase;
    if (std::abs(x) < 1e-12)
      throw SolverError("branch " + br.from + "-" + br.to +
                        " has no series reactance; cannot linearize");
    branches.push_back(
        DcBranch{grid.node_index(br.from), grid.node_index(br.to), 1.0 / x});
  }

  std::vector<int> loaded;
  for (int n = 0; n < net.node_count(); ++n) {
    if (n == net.slack_node()) continue;
    const int s = net.slot(n, Phase::a);
    if (s >= 0 && net.has_load(s)) loaded.push_back(n);
  }

  const int rows = 2 * static_cast<int>(branches.size()) + static_cast<int>(loaded.size());
  dc.h = Eigen::MatrixXd::Zero(rows, cols);
  int row = 0;
  for (const DcBranch& br : branches) {
    const std::string from_id = grid.nodes[static_cast<std::size_t>(br.from)].id;
    const std::string to_id = grid.nodes[static_cast<std::size_t>(br.to)].id;
    const int cf = col_of[static_cast<std::size_t>(br.from)];
    const int ct = col_of[static_cast<std::size_t>(br.to)];
    dc.row_ids.push_back("PF:" + from_id + ":" + to_id);
    if (cf >= 0) dc.h(row, cf) += br.b;
    if (ct >= 0) dc.h(row, ct) -= br.b;
    ++row;
    dc.row_ids.push_back("PF:" + to_id + ":" + from_id);
    if (ct >= 0) dc.h(row, ct) += br.b;
    if (cf >= 0) dc.h(row, cf) -= br.b;
    ++row;
  }
  for (int n : loaded) {
    dc.row_ids.push_back("PI:" + grid.nodes[static_cast<std::size_t>(n)].id);
    for (const DcBranch& br : branches) {
      if (br.from != n && br.to != n) continue;
      const int other = br.from == n ? br.to : br.from;
      const int cn = col_of[static_cast<std::size_t>(n)];
      const int co = col_of[static_cast<std::size_t>(other)];
      if (cn >= 0) dc.h(row, cn) += br.b;
      if (co >= 0) dc.h(row, co) -= br.b;
    }
    ++row;
  }

  // DC power flow: B' theta = p with p the net per-phase injection in pu.
  Eigen::MatrixXd bmat = Eigen::MatrixXd::Zero(cols, cols);
  for (const DcBranch& br : branches) {
    const int cf = col_of[static_cast<std::size_t>(br.from)];
    const int ct = col_of[static_cast<std::size_t>(br.to)];
    if (cf >= 0) bmat(cf, cf) += br.b;
    if (ct >= 0) bmat(ct, ct) += br.b;
    if (cf >= 0 && ct >= 0) {
      bmat(cf, ct) -= br.b;
      bmat(ct, cf) -= br.b;
    }
  }
  Eigen::VectorXd p = Eigen::VectorXd::Zero(cols);
  for (int c = 0; c < cols; ++c) {
    const int s = net.slot(dc.col_node[static_cast<std::size_t>(c)], Phase::a);
    if (s >= 0 && net.has_load(s)) p[c] = -net.load_p(s);
  }
  dc.theta = bmat.partialPivLu().solve(p);
  if (!dc.theta.allFinite())
    throw SolverError("DC susceptance matrix is singular");
  dc.z = dc.h * dc.theta;
  return dc;
}

Eigen::VectorXd dc_attack_baseline(const Eigen::MatrixXd& h, const Eigen::VectorXd& z,
                                   const Eigen::VectorXd& x, const Eigen::VectorXd& c) {
  if (z.size() != h.rows())
    throw std::invalid_argument("measurement vector length does not match the model rows");
  if (x.size() != h.cols() || c.size() != h.cols())
    throw std::invalid_argument("state/attack vector length does not match the model columns");
  return z + h * c;
}

double dc_wls_residual(const Eigen::MatrixXd& h, const Eigen::VectorXd& z) {
  if (z.size() != h.rows())
    throw std::invalid_argument("measurement vector length does not match the model rows");
  const Eigen::VectorXd x_fit = h.colPivHouseholderQr().solve(z);
  return (z - h * x_fit).norm();
}

MeasurementSet map_dc_attack_to_ac(const Network& net, const MeasurementSet& z_ac,
                                   const DcModel& dc, const Eigen::VectorXd& attack) {
  if (attack.size() != dc.h.rows())
    throw std::invalid_argument("attack vector length does not match the DC model rows");
  MeasurementSet out = z_ac;
  for (int k = 0; k < attack.size(); ++k) {
    const double delta_w = attack[k] * net.sbase();
    if (delta_w == 0.0) continue;
    const std::string& id = dc.row_ids[static_cast<std::size_t>(k)];
    for (Phase ph : {Phase::a, Phase::b, Phase::c}) {
      const int idx = out.index_of(id + ":" + phase_letter(ph));
      if (idx >= 0) out.readings[static_cast<std::size_t>(idx)].value += delta_w;
    }
  }
  return out;
}

}  // namespace gridfdi
