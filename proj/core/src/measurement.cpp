#include "gridfdi/measurement.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "gridfdi/diagnostics.hpp"

namespace gridfdi {

std::string to_string(MeasKind kind) {
  switch (kind) {
    case MeasKind::PF: return "PF";
    case MeasKind::QF: return "QF";
    case MeasKind::PI: return "PI";
    case MeasKind::QI: return "QI";
    case MeasKind::VM: return "VM";
    case MeasKind::VA: return "VA";
  }
  return "?";
}

MeasKind meas_kind_from_string(const std::string& text) {
  if (text == "PF") return MeasKind::PF;
  if (text == "QF") return MeasKind::QF;
  if (text == "PI") return MeasKind::PI;
  if (text == "QI") return MeasKind::QI;
  if (text == "VM") return MeasKind::VM;
  if (text == "VA") return MeasKind::VA;
  throw std::invalid_argument("unknown measurement kind '" + text + "'");
}

std::string Measurement::id() const {
  std::string out = to_string(kind) + ":";
  if (kind == MeasKind::PF || kind == MeasKind::QF)
    out += from + ":" + to;
  else
    out += node;
  out += ":";
  out += phase_letter(phase);
  return out;
}

int MeasurementSet::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < readings.size(); ++i)
    if (readings[i].id() == id) return static_cast<int>(i);
  return -1;
}

MeasurementSet measure_all(const Network& net, const SteadyState& steady,
                           const MeasureOptions& opts) {
  MeasurementSet z;
  const double sbase = net.sbase();
  const double power_floor = opts.sigma_power_floor_pu * sbase;

  auto power_sigma = [&](double value) {
    return std::max(std::abs(value) * opts.sigma_power_rel, power_floor);
  };

  for (int b = 0; b < net.branch_count(); ++b) {
    const Branch& branch = net.grid().branches[static_cast<std::size_t>(b)];
    for (Phase ph : branch.phases) {
      const Complex s_from = steady.flows[static_cast<std::size_t>(b)].from[static_cast<int>(ph)];
      const Complex s_to = steady.flows[static_cast<std::size_t>(b)].to[static_cast<int>(ph)];
      Measurement pf{MeasKind::PF, branch.from, branch.to, "", ph, s_from.real() * sbase, 0.0};
      pf.sigma = power_sigma(pf.value);
      z.readings.push_back(pf);
      Measurement qf{MeasKind::QF, branch.from, branch.to, "", ph, s_from.imag() * sbase, 0.0};
      qf.sigma = power_sigma(qf.value);
      z.readings.push_back(qf);
      Measurement pr{MeasKind::PF, branch.to, branch.from, "", ph, s_to.real() * sbase, 0.0};
      pr.sigma = power_sigma(pr.value);
      z.readings.push_back(pr);
      Measurement qr{MeasKind::QF, branch.to, branch.from, "", ph, s_to.imag() * sbase, 0.0};
      qr.sigma = power_sigma(qr.value);
      z.readings.push_back(qr);
    }
  }

  for (int node = 0; node < net.node_count(); ++node) {
    const Node& n = net.grid().nodes[static_cast<std::size_t>(node)];
    for (Phase ph : n.phases) {
      const int s = net.slot(node, ph);
      if (!net.has_load(s)) continue;
      const Complex inj = steady.injections[static_cast<std::size_t>(s)];
      Measurement pi{MeasKind::PI, "", "", n.id, ph, inj.real() * sbase, 0.0};
      pi.sigma = power_sigma(pi.value);
      z.readings.push_back(pi);
      Measurement qi{MeasKind::QI, "", "", n.id, ph, inj.imag() * sbase, 0.0};
      qi.sigma = power_sigma(qi.value);
      z.readings.push_back(qi);
    }
  }

  const int slack = net.slack_node();
  const Node& sn = net.grid().nodes[static_cast<std::size_t>(slack)];
  for (Phase ph : sn.phases) {
    const int s = net.slot(slack, ph);
    Measurement vm{MeasKind::VM, "", "", sn.id, ph, steady.state.v[s] * net.vbase(slack), 0.0};
    vm.sigma = std::max(std::abs(vm.value) * opts.sigma_voltage_rel, 1e-6 * net.vbase(slack));
    z.readings.push_back(vm);
  }
  return z;
}

MeasurementSet add_noise(const MeasurementSet& z, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  MeasurementSet noisy = z;
  for (Measurement& m : noisy.readings) {
    const double draw = unit(rng);  // one draw per reading keeps the stream aligned
    if (m.sigma > 0.0) m.value += draw * m.sigma;
  }
  return noisy;
}

namespace {

/// Locates the branch joining the measurement endpoints; `at_from` reports
/// whether `m.from` is the branch's from side.
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

int find_node_slot(const Network& net, const Measurement& m) {
  const Node* n = net.grid().resolve_node(m.node);
  if (!n) throw std::out_of_range("measurement '" + m.id() + "' references an unknown node");
  const int s = net.slot(net.grid().node_index(n->id), m.phase);
  if (s < 0)
    throw std::out_of_range("measurement '" + m.id() + "' references an absent node phase");
  return s;
}

}  // namespace

double evaluate_measurement(const Network& net, const PhasorState& x, const Measurement& m) {
  switch (m.kind) {
    case MeasKind::PF:
    case MeasKind::QF: {
      bool at_from = true;
      const int b = find_flow_branch(net, m, at_from);
      const Complex s = branch_flow(net, x, b, at_from, m.phase) * net.sbase();
      return m.kind == MeasKind::PF ? s.real() : s.imag();
    }
    case MeasKind::PI:
    case MeasKind::QI: {
      const int s = find_node_slot(net, m);
      const NodePhase& np = net.node_phase(s);
      const Complex inj = node_injection(net, x, np.node, np.phase) * net.sbase();
      return m.kind == MeasKind::PI ? inj.real() : inj.imag();
    }
    case MeasKind::VM: {
      const int s = find_node_slot(net, m);
      return x.v[s] * net.vbase(net.node_phase(s).node);
    }
    case MeasKind::VA: {
      const int s = find_node_slot(net, m);
      return x.theta[s];
    }
  }
  throw std::logic_error("unhandled measurement kind");
}

std::string display_name(const Network& net, const Measurement& m) {
  std::string prefix;
  switch (m.kind) {
    case MeasKind::PF:
    case MeasKind::PI: prefix = "P"; break;
    case MeasKind::QF:
    case MeasKind::QI: prefix = "Q"; break;
    case MeasKind::VM: prefix = "V"; break;
    case MeasKind::VA: prefix = "theta"; break;
  }
  std::string site;
  if (m.kind == MeasKind::PF || m.kind == MeasKind::QF)
    site = net.grid().display_name(m.from) + net.grid().display_name(m.to);
  else
    site = net.grid().display_name(m.node);
  return prefix + "_" + phase_letter(m.phase) + "_" + site;
}

namespace {

std::string fmt_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void append_measurement_rows(std::string& out, const MeasurementSet& z) {
  out += "id,kind,from,to,node,phase,value,sigma\n";
  for (const Measurement& m : z.readings) {
    out += m.id();
    out += ',';
    out += to_string(m.kind);
    out += ',';
    out += m.from;
    out += ',';
    out += m.to;
    out += ',';
    out += m.node;
    out += ',';
    out += phase_letter(m.phase);
    out += ',';
    out += fmt_number(m.value);
    out += ',';
    out += fmt_number(m.sigma);
    out += '\n';
  }
}

}  // namespace

std::string measurements_to_csv(const MeasurementSet& z) {
  std::string out;
  append_measurement_rows(out, z);
  return out;
}

std::string steady_state_to_csv(const Network& net, const SteadyState& steady,
                                const MeasurementSet& z) {
  std::string out;
  append_measurement_rows(out, z);
  out += "state\n";
  out += "node,phase,V_pu,theta_deg\n";
  for (int s = 0; s < net.node_phase_count(); ++s) {
    const NodePhase& np = net.node_phase(s);
    out += net.grid().nodes[static_cast<std::size_t>(np.node)].id;
    out += ',';
    out += phase_letter(np.phase);
    out += ',';
    out += fmt_number(steady.state.v[s]);
    out += ',';
    out += fmt_number(steady.state.theta[s] * 180.0 / std::numbers::pi);
    out += '\n';
  }
  return out;
}

MeasurementSet measurements_from_csv(const std::string& text) {
  MeasurementSet z;
  std::vector<Diagnostic> problems;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == "state") break;  // trailing state section is informational
    if (!header_seen) {
      if (line != "id,kind,from,to,node,phase,value,sigma")
        problems.push_back(
            Diagnostic{lineno, 1, "expected header 'id,kind,from,to,node,phase,value,sigma'"});
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (true) {
      std::size_t comma = line.find(',', pos);
      cells.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (cells.size() != 8) {
      problems.push_back(Diagnostic{lineno, 1, "expected 8 comma-separated cells, got " +
                                                   std::to_string(cells.size())});
      continue;
    }
    Measurement m;
    try {
      m.kind = meas_kind_from_string(cells[1]);
    } catch (const std::invalid_argument& e) {
      problems.push_back(Diagnostic{lineno, 1, e.what()});
      continue;
    }
    m.from = cells[2];
    m.to = cells[3];
    m.node = cells[4];
    if (cells[5].size() != 1 ||
        (cells[5][0] != 'a' && cells[5][0] != 'b' && cells[5][0] != 'c')) {
      problems.push_back(Diagnostic{lineno, 1, "bad phase '" + cells[5] + "'"});
      continue;
    }
    m.phase = phase_from_letter(cells[5][0]);
    char* end = nullptr;
    m.value = std::strtod(cells[6].c_str(), &end);
    if (end != cells[6].c_str() + cells[6].size()) {
      problems.push_back(Diagnostic{lineno, 1, "cannot read value '" + cells[6] + "'"});
      continue;
    }
    m.sigma = std::strtod(cells[7].c_str(), &end);
    if (end != cells[7].c_str() + cells[7].size() || m.sigma < 0.0) {
      problems.push_back(Diagnostic{lineno, 1, "cannot read sigma '" + cells[7] + "'"});
      continue;
    }
    if (m.id() != cells[0])
      problems.push_back(Diagnostic{
          lineno, 1, "id '" + cells[0] + "' does not match the row fields ('" + m.id() + "')"});
    bool is_flow = m.kind == MeasKind::PF || m.kind == MeasKind::QF;
    if (is_flow && (m.from.empty() || m.to.empty() || !m.node.empty()))
      problems.push_back(Diagnostic{lineno, 1, "flow rows need from and to, and no node"});
    if (!is_flow && (m.node.empty() || !m.from.empty() || !m.to.empty()))
      problems.push_back(Diagnostic{lineno, 1, "node rows need node, and no from/to"});
    z.readings.push_back(std::move(m));
  }
  if (!header_seen)
    problems.push_back(Diagnostic{0, 0, "measurement CSV is empty"});
  if (!problems.empty()) throw ParseError(std::move(problems));
  return z;
}

}  // namespace gridfdi
