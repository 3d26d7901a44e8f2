#include <nlohmann/json.hpp>
#include <stdexcept>

#include "gridfdi/attack.hpp"
#include "gridfdi/diagnostics.hpp"

namespace gridfdi {

namespace {

using json = nlohmann::ordered_json;

json state_to_json(const Network& net, const PhasorState& x) {
  json rows = json::array();
  for (int s = 0; s < net.node_phase_count(); ++s) {
    const NodePhase& np = net.node_phase(s);
    rows.push_back({{"node", net.grid().nodes[static_cast<std::size_t>(np.node)].id},
                    {"phase", std::string(1, phase_letter(np.phase))},
                    {"V_pu", x.v[s]},
                    {"theta_rad", x.theta[s]}});
  }
  return rows;
}

PhasorState state_from_json(const Network& net, const json& rows) {
  PhasorState x;
  x.v.setZero(net.node_phase_count());
  x.theta.setZero(net.node_phase_count());
  std::vector<char> seen(static_cast<std::size_t>(net.node_phase_count()), 0);
  for (const json& row : rows) {
    const int s = net.slot(row.at("node").get<std::string>(),
                           phase_from_letter(row.at("phase").get<std::string>().at(0)));
    if (s < 0) throw std::out_of_range("state row references an absent node phase");
    x.v[s] = row.at("V_pu").get<double>();
    x.theta[s] = row.at("theta_rad").get<double>();
    seen[static_cast<std::size_t>(s)] = 1;
  }
  for (char c : seen)
    if (!c) throw std::out_of_range("state section does not cover every node phase");
  return x;
}

int node_index_checked(const Network& net, const std::string& id) {
  const int n = net.grid().node_index(id);
  if (n < 0) throw std::out_of_range("unknown node '" + id + "'");
  return n;
}

json node_list_to_json(const Network& net, const std::vector<int>& nodes) {
  json out = json::array();
  for (int n : nodes) out.push_back(net.grid().nodes[static_cast<std::size_t>(n)].id);
  return out;
}

std::vector<int> node_list_from_json(const Network& net, const json& arr) {
  std::vector<int> out;
  for (const json& id : arr) out.push_back(node_index_checked(net, id.get<std::string>()));
  return out;
}

}  // namespace

std::string attack_to_json(const Network& net, const AttackResult& attack) {
  json root;

  json area;
  area["seed"] = attack.area.seed;
  json members = json::array();
  for (const NodePhase& np : attack.area.members)
    members.push_back({{"node", net.grid().nodes[static_cast<std::size_t>(np.node)].id},
                       {"phase", std::string(1, phase_letter(np.phase))}});
  area["members"] = std::move(members);
  area["interior"] = node_list_to_json(net, attack.area.interior_nodes);
  area["boundary"] = node_list_to_json(net, attack.area.boundary_nodes);
  area["zero_injection"] = node_list_to_json(net, attack.area.zero_injection_nodes);
  area["launch_candidates"] = node_list_to_json(net, attack.area.launch_candidates);
  area["a2"] = attack.area.a2;
  area["reaches_slack"] = attack.area.reaches_slack;
  area["notes"] = attack.area.notes;
  area["display_members"] = attack.area.display_members;
  root["area"] = std::move(area);

  json initialization = json::array();
  for (const auto& [sv, delta] : attack.initialization)
    initialization.push_back({{"sv", sv_name(net, sv)}, {"delta", delta}});
  root["initialization"] = std::move(initialization);

  json fixed = json::array();
  for (SvHandle sv : attack.fixed) fixed.push_back(sv_name(net, sv));
  root["fixed"] = std::move(fixed);

  root["state"] = {{"anchor", state_to_json(net, attack.anchor)},
                   {"attacked", state_to_json(net, attack.attacked)}};

  json readings = json::array();
  for (int k = 0; k < attack.z_before.size(); ++k) {
    const Measurement& before = attack.z_before.readings[static_cast<std::size_t>(k)];
    const Measurement& after = attack.z_after.readings[static_cast<std::size_t>(k)];
    readings.push_back({{"id", before.id()},
                        {"kind", to_string(before.kind)},
                        {"from", before.from},
                        {"to", before.to},
                        {"node", before.node},
                        {"phase", std::string(1, phase_letter(before.phase))},
                        {"sigma", before.sigma},
                        {"before", before.value},
                        {"after", after.value},
                        {"design_before", attack.design_before[static_cast<std::size_t>(k)]},
                        {"design_after", attack.design_after[static_cast<std::size_t>(k)]},
                        {"changed", attack.changed[static_cast<std::size_t>(k)] != 0}});
  }
  root["measurements"] = std::move(readings);

  root["diagnostics"] = {{"iterations", attack.diag.iterations},
                         {"max_constraint_residual", attack.diag.max_constraint_residual},
                         {"assembled_constraints", attack.diag.assembled_constraints},
                         {"independent_constraints", attack.diag.independent_constraints},
                         {"binding_bounds", attack.diag.binding_bounds},
                         {"warnings", attack.diag.warnings}};

  return root.dump(2) + "\n";
}

AttackResult attack_from_json(const Network& net, const std::string& text) {
  try {
    const json root = json::parse(text);
    AttackResult out;

    const json& area = root.at("area");
    out.area.seed = area.at("seed").get<std::string>();
    for (const json& row : area.at("members")) {
      const int n = node_index_checked(net, row.at("node").get<std::string>());
      out.area.members.push_back(
          NodePhase{n, phase_from_letter(row.at("phase").get<std::string>().at(0))});
    }
    out.area.interior_nodes = node_list_from_json(net, area.at("interior"));
    out.area.boundary_nodes = node_list_from_json(net, area.at("boundary"));
    out.area.zero_injection_nodes = node_list_from_json(net, area.at("zero_injection"));
    out.area.launch_candidates = node_list_from_json(net, area.at("launch_candidates"));
    out.area.a2 = area.at("a2").get<bool>();
    out.area.reaches_slack = area.at("reaches_slack").get<bool>();
    out.area.notes = area.at("notes").get<std::vector<std::string>>();
    out.area.display_members = area.at("display_members").get<std::vector<std::string>>();

    for (const json& row : root.at("initialization"))
      out.initialization.push_back(
          {parse_sv(net, row.at("sv").get<std::string>()), row.at("delta").get<double>()});
    for (const json& name : root.at("fixed"))
      out.fixed.push_back(parse_sv(net, name.get<std::string>()));

    out.anchor = state_from_json(net, root.at("state").at("anchor"));
    out.attacked = state_from_json(net, root.at("state").at("attacked"));

    for (const json& row : root.at("measurements")) {
      Measurement m;
      m.kind = meas_kind_from_string(row.at("kind").get<std::string>());
      m.from = row.at("from").get<std::string>();
      m.to = row.at("to").get<std::string>();
      m.node = row.at("node").get<std::string>();
      m.phase = phase_from_letter(row.at("phase").get<std::string>().at(0));
      m.sigma = row.at("sigma").get<double>();
      m.value = row.at("before").get<double>();
      if (m.id() != row.at("id").get<std::string>())
        throw std::out_of_range("measurement id '" + row.at("id").get<std::string>() +
                                "' does not match its fields");
      out.z_before.readings.push_back(m);
      m.value = row.at("after").get<double>();
      out.z_after.readings.push_back(m);
      out.design_before.push_back(row.at("design_before").get<double>());
      out.design_after.push_back(row.at("design_after").get<double>());
      out.changed.push_back(row.at("changed").get<bool>() ? 1 : 0);
    }

    const json& diag = root.at("diagnostics");
    out.diag.iterations = diag.at("iterations").get<int>();
    out.diag.max_constraint_residual = diag.at("max_constraint_residual").get<double>();
    out.diag.assembled_constraints = diag.at("assembled_constraints").get<int>();
    out.diag.independent_constraints = diag.at("independent_constraints").get<int>();
    out.diag.binding_bounds = diag.at("binding_bounds").get<std::vector<std::string>>();
    out.diag.warnings = diag.at("warnings").get<std::vector<std::string>>();
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError({Diagnostic{0, 0, std::string("bad attack file: ") + e.what()}});
  } catch (const std::invalid_argument& e) {
    throw ParseError({Diagnostic{0, 0, std::string("bad attack file: ") + e.what()}});
  } catch (const std::out_of_range& e) {
    throw ParseError({Diagnostic{0, 0, std::string("bad attack file: ") + e.what()}});
  }
}

}  // namespace gridfdi
