#include "gridfdi/assessment.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <stdexcept>

#include "gridfdi/diagnostics.hpp"

namespace gridfdi {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

std::string fmt_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

AssessmentRow value_row(std::string name, std::string kind, double value, bool is_angle) {
  AssessmentRow row;
  row.name = std::move(name);
  row.kind = std::move(kind);
  row.design = value;
  row.oracle = value;
  row.is_angle = is_angle;
  return row;
}

/// One comparison table: every power reading in pu, shunt outputs in pu, and
/// the full state (V in pu, theta in degrees). `design` and `oracle` both get
/// the evaluated value; compare_sets pairs the tables up afterwards.
std::vector<AssessmentRow> value_table(const Network& net, const PhasorState& x,
                                       const MeasurementSet& z,
                                       const std::vector<double>* model_values) {
  std::vector<AssessmentRow> rows;
  for (int k = 0; k < z.size(); ++k) {
    const Measurement& m = z.readings[static_cast<std::size_t>(k)];
    double value = model_values ? (*model_values)[static_cast<std::size_t>(k)]
                                : evaluate_measurement(net, x, m);
    if (m.is_power()) {
      rows.push_back(value_row(m.id(), to_string(m.kind), value / net.sbase(), false));
    } else if (m.kind == MeasKind::VM) {
      const int n = net.grid().node_index(m.node);
      rows.push_back(value_row(m.id(), "VM", value / net.vbase(n), false));
    }
  }
  for (int s = 0; s < net.node_phase_count(); ++s) {
    const NodePhase& np = net.node_phase(s);
    const std::string& id = net.grid().nodes[static_cast<std::size_t>(np.node)].id;
    const std::string suffix = ":" + id + ":" + phase_letter(np.phase);
    rows.push_back(value_row("V" + suffix, "V", x.v[s], false));
    rows.push_back(value_row("theta" + suffix, "theta", x.theta[s] * kRadToDeg, true));
  }
  for (const Shunt& sh : net.grid().shunts) {
    const int s = net.slot(sh.node, sh.phase);
    rows.push_back(value_row("QC:" + sh.node + ":" + phase_letter(sh.phase), "QC",
                             shunt_consumed(net, x, s).imag(), false));
  }
  return rows;
}

AssessmentReport finalize(std::vector<AssessmentRow> rows, const AssessOptions& opts,
                          int iterations) {
  AssessmentReport report;
  report.rows = std::move(rows);
  report.oracle_iterations = iterations;
  for (const AssessmentRow& row : report.rows) {
    if (row.is_angle)
      report.max_angle_diff_deg = std::max(report.max_angle_diff_deg, std::abs(row.diff));
    else
      report.max_abs_pct_diff = std::max(report.max_abs_pct_diff, std::abs(row.diff));
  }
  const bool pct_ok = report.max_abs_pct_diff < opts.stealth_threshold_pct;
  const bool angle_ok = report.max_angle_diff_deg < opts.angle_threshold_deg;
  report.stealthy = pct_ok && angle_ok;
  if (report.stealthy) {
    report.reason = "all magnitude differences below " + fmt_number(opts.stealth_threshold_pct) +
                    "% and angle differences below " + fmt_number(opts.angle_threshold_deg) +
                    " deg";
  } else {
    report.reason = "exceeded:";
    if (!pct_ok)
      report.reason += " max |diff| " + fmt_number(report.max_abs_pct_diff) + "% >= " +
                       fmt_number(opts.stealth_threshold_pct) + "%";
    if (!angle_ok)
      report.reason += std::string(pct_ok ? " " : "; ") + "max angle diff " +
                       fmt_number(report.max_angle_diff_deg) + " deg >= " +
                       fmt_number(opts.angle_threshold_deg) + " deg";
  }
  return report;
}

}  // namespace

std::vector<AssessmentRow> compare_sets(const std::vector<AssessmentRow>& design_rows,
                                        const std::vector<AssessmentRow>& oracle_rows,
                                        const AssessOptions& opts) {
  std::map<std::string, const AssessmentRow*> oracle_by_name;
  for (const AssessmentRow& row : oracle_rows) oracle_by_name[row.name] = &row;
  if (oracle_by_name.size() != oracle_rows.size())
    throw std::invalid_argument("oracle table contains duplicate row names");

  std::string missing;
  std::vector<AssessmentRow> out;
  out.reserve(design_rows.size());
  std::map<std::string, int> seen;
  for (const AssessmentRow& d : design_rows) {
    if (++seen[d.name] > 1)
      throw std::invalid_argument("design table contains duplicate row name '" + d.name + "'");
    auto it = oracle_by_name.find(d.name);
    if (it == oracle_by_name.end()) {
      missing += missing.empty() ? d.name : ", " + d.name;
      continue;
    }
    AssessmentRow row = d;
    row.oracle = it->second->oracle;
    if (row.is_angle) {
      row.diff = row.design - row.oracle;
    } else {
      const double denom =
          std::abs(row.design) < opts.near_zero_floor_pu ? opts.near_zero_floor_pu : row.design;
      row.diff = (row.design - row.oracle) / denom * 100.0;
    }
    out.push_back(std::move(row));
    oracle_by_name.erase(it);
  }
  std::string extra;
  for (const auto& [name, row] : oracle_by_name) extra += extra.empty() ? name : ", " + name;
  if (!missing.empty() || !extra.empty()) {
    std::string msg = "comparison tables do not share the same keys";
    if (!missing.empty()) msg += "; missing from oracle: " + missing;
    if (!extra.empty()) msg += "; extra in oracle: " + extra;
    throw std::invalid_argument(msg);
  }
  std::sort(out.begin(), out.end(),
            [](const AssessmentRow& a, const AssessmentRow& b) { return a.name < b.name; });
  return out;
}

AssessmentReport assess(const Network& net, const AttackResult& attack, const AssessOptions& opts) {
  // Reconstruct the loading the meters claim: injections are minus the loads.
  Loading loading;
  loading.p.setZero(net.node_phase_count());
  loading.q.setZero(net.node_phase_count());
  LoadflowOptions lf_opts;
  for (const Measurement& m : attack.z_after.readings) {
    if (m.kind == MeasKind::PI || m.kind == MeasKind::QI) {
      const int n = net.grid().node_index(m.node);
      if (n < 0) throw std::invalid_argument("attack readings reference unknown node '" + m.node + "'");
      const int s = net.slot(n, m.phase);
      if (s < 0) throw std::invalid_argument("attack readings reference an absent phase at '" + m.node + "'");
      if (m.kind == MeasKind::PI)
        loading.p[s] = -m.value / net.sbase();
      else
        loading.q[s] = -m.value / net.sbase();
    } else if (m.kind == MeasKind::VM) {
      const int n = net.grid().node_index(m.node);
      if (n == net.slack_node())
        lf_opts.slack_v[static_cast<int>(m.phase)] = m.value / net.vbase(n);
    }
  }

  SteadyState steady;
  try {
    steady = solve_loadflow(net, loading, lf_opts);
  } catch (const SolverError& e) {
    AssessmentReport report;
    report.stealthy = false;
    report.reason = std::string("oracle load flow failed: ") + e.what();
    return report;
  }

  const std::vector<AssessmentRow> design_rows =
      value_table(net, attack.attacked, attack.z_after, &attack.design_after);
  const std::vector<AssessmentRow> oracle_rows =
      value_table(net, steady.state, attack.z_after, nullptr);
  return finalize(compare_sets(design_rows, oracle_rows, opts), opts, steady.iterations);
}

std::string assessment_to_csv(const AssessmentReport& report) {
  std::string out = "name,kind,design,oracle,diff,is_angle\n";
  for (const AssessmentRow& row : report.rows) {
    out += row.name + "," + row.kind + "," + fmt_number(row.design) + "," +
           fmt_number(row.oracle) + "," + fmt_number(row.diff) + "," +
           (row.is_angle ? "true" : "false") + "\n";
  }
  out += "summary\n";
  out += "max_abs_pct_diff," + fmt_number(report.max_abs_pct_diff) + "\n";
  out += "max_angle_diff_deg," + fmt_number(report.max_angle_diff_deg) + "\n";
  out += std::string("stealthy,") + (report.stealthy ? "true" : "false") + "\n";
  out += "oracle_iterations," + std::to_string(report.oracle_iterations) + "\n";
  out += "reason," + report.reason + "\n";
  return out;
}

std::string assessment_to_json(const AssessmentReport& report) {
  nlohmann::ordered_json root;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const AssessmentRow& row : report.rows)
    rows.push_back({{"name", row.name},
                    {"kind", row.kind},
                    {"design", row.design},
                    {"oracle", row.oracle},
                    {"diff", row.diff},
                    {"is_angle", row.is_angle}});
  root["rows"] = std::move(rows);
  root["max_abs_pct_diff"] = report.max_abs_pct_diff;
  root["max_angle_diff_deg"] = report.max_angle_diff_deg;
  root["stealthy"] = report.stealthy;
  root["reason"] = report.reason;
  root["oracle_iterations"] = report.oracle_iterations;
  return root.dump(2) + "\n";
}

std::string assessment_plot_data(const AssessmentReport& report) {
  std::string out = "# index pct_diff name\n";
  int index = 0;
  for (const AssessmentRow& row : report.rows) {
    if (row.is_angle) continue;
    out += std::to_string(index) + " " + fmt_number(row.diff) + " " + row.name + "\n";
    ++index;
  }
  return out;
}

}  // namespace gridfdi
