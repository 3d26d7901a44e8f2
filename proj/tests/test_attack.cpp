#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "gridfdi/attack.hpp"
#include "gridfdi/diagnostics.hpp"
#include "gridfdi/system.hpp"
#include "test_support.hpp"

using namespace gridfdi;
using testsup::deg2rad;
using testsup::load_feeder;
using testsup::rad2deg;

namespace {

struct Fixture {
  System sys = load_feeder();
  SteadyState steady;
  MeasurementSet z;

  Fixture() {
    steady = solve_loadflow(sys.net, loading_from_grid(sys.net));
    z = measure_all(sys.net, steady);
  }

  AttackArea area(const std::string& seed) const {
    return find_attack_area(sys.net, sys.original, sys.merge_map, seed);
  }
  std::vector<int> nodes(std::initializer_list<const char*> ids) const {
    std::vector<int> out;
    for (const char* id : ids) out.push_back(sys.net.grid().node_index(id));
    return out;
  }
};

std::vector<std::string> sv_names(const Network& net, const ChangeableSvSet& svs) {
  std::vector<std::string> out;
  for (const SvHandle& sv : svs.svs) out.push_back(sv_name(net, sv));
  return out;
}

bool any_note_contains(const std::vector<std::string>& notes, const std::string& needle) {
  return std::any_of(notes.begin(), notes.end(), [&](const std::string& n) {
    return n.find(needle) != std::string::npos;
  });
}

}  // namespace

TEST_CASE("area growth from the single-phase laterals") {
  Fixture f;
  AttackArea a = f.area("12");  // alias of 652
  CHECK(a.seed == "652");
  CHECK(a.a2);  // the unmetered junction 684 sits inside
  CHECK(!a.reaches_slack);
  CHECK(a.display_members == std::vector<std::string>{"11ac", "12a", "13c", "08ac"});
  CHECK(a.interior_nodes == f.nodes({"684", "652", "611"}));
  CHECK(a.boundary_nodes == f.nodes({"671"}));
  CHECK(a.zero_injection_nodes == f.nodes({"684"}));
  CHECK(a.launch_candidates == f.nodes({"652", "611"}));
  CHECK(a.members.size() == 6);  // 684ac 652a 611c 671ac
  CHECK(a.contains(f.sys.net.grid().node_index("671"), Phase::a));
  CHECK(!a.contains(f.sys.net.grid().node_index("671"), Phase::b));
  CHECK(a.is_boundary(f.sys.net.grid().node_index("671")));
  CHECK(any_note_contains(a.notes, "state at 08 stays pinned (boundary)"));

  // Seeding anywhere inside reproduces the same area.
  AttackArea same = f.area("611");
  CHECK(same.members == a.members);
}

TEST_CASE("area growth stops at metered injections") {
  Fixture f;
  AttackArea a = f.area("05");  // alias of 646
  CHECK(!a.a2);
  CHECK(a.display_members == std::vector<std::string>{"05bc", "04bc"});
  CHECK(a.interior_nodes == f.nodes({"646"}));
  CHECK(a.boundary_nodes == f.nodes({"645"}));
  CHECK(a.zero_injection_nodes.empty());

  AttackArea b = f.area("10");  // alias of 675
  CHECK(!b.a2);
  CHECK(b.display_members == std::vector<std::string>{"10abc", "09ac", "08b"});
  CHECK(b.interior_nodes == f.nodes({"675"}));
  CHECK(b.boundary_nodes == f.nodes({"671"}));
}

TEST_CASE("area growth through zero-injection trunk reaches the source") {
  Fixture f;
  AttackArea a = f.area("04");  // alias of 645
  CHECK(a.a2);
  CHECK(a.reaches_slack);
  CHECK(a.display_members ==
        std::vector<std::string>{"02abc", "03abc", "04bc", "05bc", "06abc", "07abc", "01abc",
                                 "08abc"});
  CHECK(a.interior_nodes == f.nodes({"650L", "632", "645", "646", "633", "634"}));
  CHECK(a.boundary_nodes == f.nodes({"650H", "671"}));
  CHECK(a.zero_injection_nodes == f.nodes({"650L", "632", "633"}));
  CHECK(any_note_contains(a.notes, "slack source"));
}

TEST_CASE("area seeds are validated") {
  Fixture f;
  CHECK_THROWS_AS(f.area("nonexistent"), std::invalid_argument);
  CHECK_THROWS_AS(f.area("650H"), std::invalid_argument);  // slack seed
  CHECK_THROWS_AS(f.area("01"), std::invalid_argument);    // slack alias
}

TEST_CASE("area enumeration deduplicates and sorts by size") {
  Fixture f;
  std::vector<AttackArea> areas = enumerate_attack_areas(f.sys.net, f.sys.original, f.sys.merge_map);
  CHECK(areas.size() == 6);
  for (std::size_t i = 1; i < areas.size(); ++i)
    CHECK(areas[i - 1].members.size() <= areas[i].members.size());
  // Every area names at least one seed that grows it.
  for (const AttackArea& a : areas) {
    CHECK(any_note_contains(a.notes, "seed"));
    AttackArea regrown = f.area(a.seed);
    CHECK(regrown.members == a.members);
  }
}

TEST_CASE("changeable state variables exclude boundary and slack pairs") {
  Fixture f;
  const Network& net = f.sys.net;
  CHECK(sv_names(net, changeable_state_variables(net, f.area("12"))) ==
        std::vector<std::string>{"V_a_684", "theta_a_684", "V_c_684", "theta_c_684", "V_a_652",
                                 "theta_a_652", "V_c_611", "theta_c_611"});
  CHECK(sv_names(net, changeable_state_variables(net, f.area("05"))) ==
        std::vector<std::string>{"V_b_646", "theta_b_646", "V_c_646", "theta_c_646"});
  CHECK(changeable_state_variables(net, f.area("10")).svs.size() == 6);
}

TEST_CASE("state variable names parse and print both ways") {
  Fixture f;
  const Network& net = f.sys.net;
  SvHandle h = parse_sv(net, "theta_a_652");
  CHECK(h.kind == SvKind::Theta);
  CHECK(h.slot == net.slot("652", Phase::a));
  CHECK(sv_name(net, h) == "theta_a_652");
  // Aliases resolve to the same handle; names print with the node id.
  CHECK(parse_sv(net, "theta_a_12") == h);
  CHECK(parse_sv(net, "V_c_13") == parse_sv(net, "V_c_611"));
  CHECK(parse_sv(net, "V_a_08") == parse_sv(net, "V_a_671"));

  CHECK_THROWS_AS(parse_sv(net, "volt_a_652"), std::invalid_argument);
  CHECK_THROWS_AS(parse_sv(net, "V_d_652"), std::invalid_argument);
  CHECK_THROWS_AS(parse_sv(net, "V_a_999"), std::invalid_argument);
  CHECK_THROWS_AS(parse_sv(net, "V_b_652"), std::invalid_argument);  // absent phase
}

TEST_CASE("constraint system assembles the area balance equations") {
  Fixture f;
  const Network& net = f.sys.net;
  AttackArea area = f.area("12");
  ConstraintSystem cs = build_constraints(net, area, f.steady.state);

  // 684 carries a and c: four zero-injection rows; the area spans phases a and
  // c: four change-sum rows.
  CHECK(cs.rows().size() == 8);
  int zi = 0, csum = 0;
  for (const ConstraintRow& row : cs.rows()) {
    if (row.type == ConstraintRow::Type::zero_injection_p ||
        row.type == ConstraintRow::Type::zero_injection_q)
      ++zi;
    else
      ++csum;
    CHECK(!row.label.empty());
  }
  CHECK(zi == 4);
  CHECK(csum == 4);
  CHECK(cs.independent_count() == 4);

  // The anchor satisfies every constraint.
  CHECK(cs.residuals(f.steady.state).lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK(cs.independent_residuals(f.steady.state).lpNorm<Eigen::Infinity>() < 1e-10);

  // Perturbing an interior angle violates them.
  PhasorState bent = f.steady.state;
  bent.theta[net.slot("652", Phase::a)] += deg2rad(0.1);
  CHECK(cs.residuals(bent).lpNorm<Eigen::Infinity>() > 1e-5);

  const ChangeableSvSet svs = changeable_state_variables(net, area);
  Eigen::MatrixXd full = cs.full_jacobian(f.steady.state, svs.svs);
  CHECK(full.rows() == 8);
  CHECK(full.cols() == 8);
  Eigen::MatrixXd ind = cs.independent_jacobian(f.steady.state, svs.svs);
  CHECK(ind.rows() == 4);
}

TEST_CASE("zero initialization is a fixed point of both design types") {
  Fixture f;
  const Network& net = f.sys.net;

  std::vector<SvHandle> fixed = {parse_sv(net, "V_a_684"), parse_sv(net, "V_c_684"),
                                 parse_sv(net, "theta_c_684")};
  AttackResult a2 = design_attack_a2(net, f.area("12"), f.steady.state, f.z,
                                     parse_sv(net, "theta_a_652"), 0.0, fixed);
  AttackResult a1 =
      design_attack_a1(net, f.area("10"), f.steady.state, f.z, {{parse_sv(net, "theta_a_675"), 0.0}});

  for (const AttackResult* r : {&a2, &a1}) {
    for (int s = 0; s < net.node_phase_count(); ++s) {
      CHECK(r->attacked.v[s] == f.steady.state.v[s]);
      CHECK(r->attacked.theta[s] == f.steady.state.theta[s]);
    }
    for (int k = 0; k < f.z.size(); ++k)
      CHECK(r->z_after.readings[static_cast<std::size_t>(k)].value ==
            f.z.readings[static_cast<std::size_t>(k)].value);
  }
  // Structurally affected rows are still marked, they just did not move.
  CHECK(std::count(a2.changed.begin(), a2.changed.end(), 1) == 24);
}

TEST_CASE("constraint-based design reproduces the published attack state") {
  Fixture f;
  const Network& net = f.sys.net;
  std::vector<SvHandle> fixed = {parse_sv(net, "V_a_684"), parse_sv(net, "V_c_684"),
                                 parse_sv(net, "theta_c_684")};
  AttackResult r = design_attack_a2(net, f.area("12"), f.steady.state, f.z,
                                    parse_sv(net, "theta_a_652"), deg2rad(0.1), fixed);

  CHECK(r.diag.assembled_constraints == 8);
  CHECK(r.diag.independent_constraints == 4);
  CHECK(r.diag.iterations <= 5);
  CHECK(r.diag.max_constraint_residual < 1e-10);
  CHECK(r.diag.binding_bounds.empty());

  const PhasorState& x = r.attacked;
  const int s652a = net.slot("652", Phase::a);
  const int s611c = net.slot("611", Phase::c);
  const int s684a = net.slot("684", Phase::a);
  const int s684c = net.slot("684", Phase::c);

  // Initialized and fixed variables take their prescribed values exactly.
  CHECK(x.theta[s652a] == doctest::Approx(f.steady.state.theta[s652a] + deg2rad(0.1)));
  CHECK(x.v[s684a] == f.steady.state.v[s684a]);
  CHECK(x.v[s684c] == f.steady.state.v[s684c]);
  CHECK(x.theta[s684c] == f.steady.state.theta[s684c]);

  // Solved values, against this workbench's frozen numbers (tight)...
  CHECK(x.v[s652a] == doctest::Approx(0.980504).epsilon(2e-5));
  CHECK(x.v[s611c] == doctest::Approx(0.984848).epsilon(2e-5));
  CHECK(rad2deg(x.theta[s684a]) == doctest::Approx(-5.1222).epsilon(2e-4));
  CHECK(rad2deg(x.theta[s611c]) == doctest::Approx(116.5183).epsilon(2e-5));

  // ... and against the published table (V within 0.5%, angles within 0.05 deg).
  CHECK(std::abs(x.v[s652a] - 0.9805) / 0.9805 < 0.005);
  CHECK(std::abs(x.v[s611c] - 0.9848) / 0.9848 < 0.005);
  CHECK(std::abs(rad2deg(x.theta[s652a]) - (-4.966)) < 0.05);
  CHECK(std::abs(rad2deg(x.theta[s684a]) - (-5.122)) < 0.05);
  CHECK(std::abs(rad2deg(x.theta[s611c]) - 116.518) < 0.05);
}

TEST_CASE("fabricated meters follow the published flow table") {
  Fixture f;
  const Network& net = f.sys.net;
  std::vector<SvHandle> fixed = {parse_sv(net, "V_a_684"), parse_sv(net, "V_c_684"),
                                 parse_sv(net, "theta_c_684")};
  AttackResult r = design_attack_a2(net, f.area("12"), f.steady.state, f.z,
                                    parse_sv(net, "theta_a_652"), deg2rad(0.1), fixed);

  auto after_kw = [&](const std::string& id) {
    const int at = r.z_after.index_of(id);
    REQUIRE(at >= 0);
    return r.z_after.readings[static_cast<std::size_t>(at)].value / 1e3;
  };
  // Published fabricated flows (kW / kvar), 1% tolerance.
  const std::vector<std::pair<std::string, double>> table = {
      {"PF:684:671:a", -103.03}, {"PF:684:652:a", 103.03},  {"QF:684:671:a", -105.30},
      {"QF:684:652:a", 105.30},  {"PF:684:671:c", -172.62}, {"PF:684:611:c", 172.62},
      {"QF:684:671:c", 11.26},   {"QF:684:611:c", -11.26},  {"PF:652:684:a", -102.17},
      {"PF:671:684:a", 103.25},  {"QF:652:684:a", -104.99}, {"QF:671:684:a", 105.49},
      {"PF:611:684:c", -172.21}, {"PF:671:684:c", 172.99},  {"QF:611:684:c", 11.67},
      {"QF:671:684:c", -10.98},
  };
  for (const auto& [id, expected] : table)
    CHECK(std::abs(after_kw(id) - expected) <= 0.01 * std::abs(expected));

  // Fabricated injections: the published table reports consumption, the
  // readings report injection, so the expected sign flips.
  const std::vector<std::pair<std::string, double>> injections = {
      {"PI:652:a", -102.17},
      {"QI:652:a", -104.99},
      {"PI:611:c", -172.21},
      {"QI:611:c", -85.32},
  };
  for (const auto& [id, expected] : injections)
    CHECK(std::abs(after_kw(id) - expected) <= 0.01 * std::abs(expected));

  // Boundary absorption at the supernode: P flows into the area changed, so the
  // 671 injections moved with them.
  const int pi671a = f.z.index_of("PI:671:a");
  CHECK(r.z_after.readings[static_cast<std::size_t>(pi671a)].value !=
        f.z.readings[static_cast<std::size_t>(pi671a)].value);
}

TEST_CASE("fabrication is local and exact") {
  Fixture f;
  const Network& net = f.sys.net;
  std::vector<SvHandle> fixed = {parse_sv(net, "V_a_684"), parse_sv(net, "V_c_684"),
                                 parse_sv(net, "theta_c_684")};
  AttackResult r = design_attack_a2(net, f.area("12"), f.steady.state, f.z,
                                    parse_sv(net, "theta_a_652"), deg2rad(0.1), fixed);

  const std::set<std::string> expected_changed = {
      "PF:671:684:a", "QF:671:684:a", "PF:684:671:a", "QF:684:671:a",
      "PF:671:684:c", "QF:671:684:c", "PF:684:671:c", "QF:684:671:c",
      "PF:684:652:a", "QF:684:652:a", "PF:652:684:a", "QF:652:684:a",
      "PF:684:611:c", "QF:684:611:c", "PF:611:684:c", "QF:611:684:c",
      "PI:652:a",     "QI:652:a",     "PI:611:c",     "QI:611:c",
      "PI:671:a",     "QI:671:a",     "PI:671:c",     "QI:671:c",
  };
  std::set<std::string> actual;
  for (int k = 0; k < f.z.size(); ++k) {
    const Measurement& before = f.z.readings[static_cast<std::size_t>(k)];
    const Measurement& after = r.z_after.readings[static_cast<std::size_t>(k)];
    if (r.changed[static_cast<std::size_t>(k)]) {
      actual.insert(before.id());
      // Fabrication applies the exact model delta.
      const double model_delta = r.design_after[static_cast<std::size_t>(k)] -
                                 r.design_before[static_cast<std::size_t>(k)];
      CHECK(after.value - before.value == doctest::Approx(model_delta).epsilon(1e-12));
    } else {
      // Untouched rows are bit-for-bit copies.
      CHECK(after.value == before.value);
    }
    CHECK(after.sigma == before.sigma);
  }
  CHECK(actual == expected_changed);
  CHECK(r.diag.warnings.empty());

  // Noiseless anchors make the design columns coincide with the meters.
  for (int k = 0; k < f.z.size(); ++k) {
    CHECK(r.design_before[static_cast<std::size_t>(k)] ==
          doctest::Approx(f.z.readings[static_cast<std::size_t>(k)].value).epsilon(1e-9));
  }
}

TEST_CASE("direct assignment design moves only the launch node") {
  Fixture f;
  const Network& net = f.sys.net;
  AttackResult r = design_attack_a1(net, f.area("10"), f.steady.state, f.z,
                                    {{parse_sv(net, "theta_a_675"), deg2rad(0.1)},
                                     {parse_sv(net, "V_b_675"), -0.002}});
  const int sa = net.slot("675", Phase::a);
  const int sb = net.slot("675", Phase::b);
  CHECK(r.attacked.theta[sa] == doctest::Approx(f.steady.state.theta[sa] + deg2rad(0.1)));
  CHECK(r.attacked.v[sb] == doctest::Approx(f.steady.state.v[sb] - 0.002));
  // Everything else stays at the anchor.
  for (int s = 0; s < net.node_phase_count(); ++s) {
    if (s == sa) continue;
    CHECK(r.attacked.theta[s] == f.steady.state.theta[s]);
    if (s == sb) continue;
    CHECK(r.attacked.v[s] == f.steady.state.v[s]);
  }

  // Affected rows: the 675-671 branch flows (3 phases, both ends) plus the
  // injections at 675 and at the boundary supernode.
  int changed_count = 0;
  for (int k = 0; k < f.z.size(); ++k) {
    const Measurement& m = f.z.readings[static_cast<std::size_t>(k)];
    if (r.changed[static_cast<std::size_t>(k)]) {
      ++changed_count;
      const bool flow_row = (m.from == "671" && m.to == "675") || (m.from == "675" && m.to == "671");
      const bool inj_row = m.node == "675" || m.node == "671";
      CHECK((flow_row || inj_row));
    }
  }
  CHECK(changed_count == 12 + 6 + 6);

  CHECK_THROWS_AS(design_attack_a1(net, f.area("10"), f.steady.state, f.z,
                                   {{parse_sv(net, "theta_a_652"), deg2rad(0.1)}}),
                  std::invalid_argument);  // foreign handle for this area
}

TEST_CASE("degrees of freedom are diagnosed with a suggested fix") {
  Fixture f;
  const Network& net = f.sys.net;
  AttackArea wide = f.area("04");
  SvHandle init = parse_sv(net, "theta_b_645");

  std::vector<SvHandle> fixed;
  try {
    design_attack_a2(net, wide, f.steady.state, f.z, init, deg2rad(0.05), {});
    FAIL("expected DofError");
  } catch (const DofError& e) {
    CHECK(e.constraints() == 18);
    CHECK(e.free_unknowns() == 31);
    CHECK(e.suggested_fixed().size() == 13);
    for (const std::string& name : e.suggested_fixed()) fixed.push_back(parse_sv(net, name));
  }

  AttackResult r = design_attack_a2(net, wide, f.steady.state, f.z, init, deg2rad(0.05), fixed);
  CHECK(r.diag.max_constraint_residual < 1e-10);
  CHECK(std::count(r.changed.begin(), r.changed.end(), 1) == 96);
  CHECK(any_note_contains(r.diag.warnings, "slack source"));

  // Fixing too much trips the same diagnosis from the other side.
  std::vector<SvHandle> too_many = fixed;
  too_many.push_back(parse_sv(net, "V_b_632"));
  CHECK_THROWS_AS(design_attack_a2(net, wide, f.steady.state, f.z, init, deg2rad(0.05), too_many),
                  DofError);
}

TEST_CASE("designs respect the state bounds") {
  Fixture f;
  const Network& net = f.sys.net;

  // Direct assignments outside the bounds are rejected up front.
  CHECK_THROWS_AS(design_attack_a1(net, f.area("10"), f.steady.state, f.z,
                                   {{parse_sv(net, "V_a_675"), 0.2}}),
                  std::invalid_argument);

  // Default bounds bracket the anchor: magnitude window plus a +-10 deg cone.
  const ChangeableSvSet svs = changeable_state_variables(net, f.area("12"));
  SvBounds bounds = default_bounds(net, svs, f.steady.state);
  REQUIRE(bounds.lo.size() == 8);
  REQUIRE(bounds.hi.size() == 8);
  for (int i = 0; i < 8; ++i) {
    const SvHandle& sv = svs.svs[static_cast<std::size_t>(i)];
    const double anchor_value = sv.kind == SvKind::V ? f.steady.state.v[sv.slot]
                                                     : f.steady.state.theta[sv.slot];
    CHECK(bounds.lo[i] < anchor_value);
    CHECK(bounds.hi[i] > anchor_value);
    if (sv.kind == SvKind::V) {
      CHECK(bounds.lo[i] <= 0.95);
      CHECK(bounds.hi[i] >= 1.05);
    } else {
      CHECK(bounds.lo[i] == doctest::Approx(anchor_value - deg2rad(10.0)));
      CHECK(bounds.hi[i] == doctest::Approx(anchor_value + deg2rad(10.0)));
    }
  }

  // Clamping every free magnitude to the anchor makes the solve stall and the
  // binding variables are reported.
  SvBounds tight = bounds;
  for (int i = 0; i < 8; ++i) {
    if (svs.svs[static_cast<std::size_t>(i)].kind != SvKind::V) continue;
    const double v = f.steady.state.v[svs.svs[static_cast<std::size_t>(i)].slot];
    tight.lo[i] = v - 1e-7;
    tight.hi[i] = v + 1e-7;
  }
  std::vector<SvHandle> fixed = {parse_sv(net, "V_a_684"), parse_sv(net, "V_c_684"),
                                 parse_sv(net, "theta_c_684")};
  try {
    design_attack_a2(net, f.area("12"), f.steady.state, f.z, parse_sv(net, "theta_a_652"),
                     deg2rad(0.1), fixed, tight);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    const std::string what = e.what();
    CHECK(what.find("bounds binding") != std::string::npos);
    CHECK(what.find("V_a_652") != std::string::npos);
  }
}

TEST_CASE("flow changes need a meter willing to absorb them") {
  const char* text = R"(base S=1e6
node src phases=ab role=slack vbase=2400
node mid phases=ab role=injection vbase=2400
node leaf phases=ab role=injection vbase=2400
branch b1 from=src to=mid phases=ab kind=line z aa=0.4+0.9j bb=0.4+0.9j ab=0.05+0.2j
branch b2 from=mid to=leaf phases=ab kind=line z aa=0.4+0.9j bb=0.4+0.9j ab=0.05+0.2j
load node=mid phase=b P=50e3 Q=20e3
load node=leaf phase=a P=40e3 Q=15e3
load node=leaf phase=b P=45e3 Q=18e3
)";
  System sys = System::from_text(text);
  const Network& net = sys.net;
  SteadyState steady = solve_loadflow(net, loading_from_grid(net));
  MeasurementSet z = measure_all(net, steady);
  AttackArea area = find_attack_area(net, sys.original, sys.merge_map, "leaf");
  CHECK(area.interior_nodes == std::vector<int>{net.grid().node_index("leaf")});
  CHECK(area.boundary_nodes == std::vector<int>{net.grid().node_index("mid")});

  // Phase a of the mid node has no load, hence no injection meter: the implied
  // absorption is impossible and the design refuses.
  try {
    design_attack_a1(net, area, steady.state, z, {{parse_sv(net, "theta_a_leaf"), deg2rad(0.05)}});
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("no injection meter to absorb it") != std::string::npos);
    CHECK(std::string(e.what()).find("mid") != std::string::npos);
  }

  // Metering that phase (here: giving it load) makes the same design valid.
  System sys2 = System::from_text(std::string(text) + "load node=mid phase=a P=30e3 Q=10e3\n");
  SteadyState steady2 = solve_loadflow(sys2.net, loading_from_grid(sys2.net));
  MeasurementSet z2 = measure_all(sys2.net, steady2);
  AttackArea area2 = find_attack_area(sys2.net, sys2.original, sys2.merge_map, "leaf");
  AttackResult ok = design_attack_a1(sys2.net, area2, steady2.state, z2,
                                     {{parse_sv(sys2.net, "theta_a_leaf"), deg2rad(0.05)}});
  CHECK(std::count(ok.changed.begin(), ok.changed.end(), 1) > 0);
}

TEST_CASE("attack results serialize to JSON and back") {
  Fixture f;
  const Network& net = f.sys.net;
  std::vector<SvHandle> fixed = {parse_sv(net, "V_a_684"), parse_sv(net, "V_c_684"),
                                 parse_sv(net, "theta_c_684")};
  AttackResult r = design_attack_a2(net, f.area("12"), f.steady.state, f.z,
                                    parse_sv(net, "theta_a_652"), deg2rad(0.1), fixed);

  const std::string text = attack_to_json(net, r);
  AttackResult back = attack_from_json(net, text);

  CHECK(back.area.seed == r.area.seed);
  CHECK(back.area.members == r.area.members);
  CHECK(back.initialization.size() == 1);
  CHECK(back.initialization[0].first == r.initialization[0].first);
  CHECK(back.initialization[0].second == r.initialization[0].second);
  CHECK(back.fixed == r.fixed);
  for (int s = 0; s < net.node_phase_count(); ++s) {
    CHECK(back.attacked.v[s] == r.attacked.v[s]);
    CHECK(back.attacked.theta[s] == r.attacked.theta[s]);
    CHECK(back.anchor.v[s] == r.anchor.v[s]);
  }
  REQUIRE(back.z_after.size() == r.z_after.size());
  for (int k = 0; k < r.z_after.size(); ++k) {
    CHECK(back.z_after.readings[static_cast<std::size_t>(k)].value ==
          r.z_after.readings[static_cast<std::size_t>(k)].value);
    CHECK(back.changed[static_cast<std::size_t>(k)] == r.changed[static_cast<std::size_t>(k)]);
  }
  CHECK(back.diag.independent_constraints == r.diag.independent_constraints);

  // Serialization is deterministic.
  CHECK(attack_to_json(net, back) == text);
  CHECK_THROWS_AS(attack_from_json(net, "not json"), ParseError);
}
