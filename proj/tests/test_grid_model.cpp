#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <set>

#include "doctest.h"
#include "gridfdi/diagnostics.hpp"
#include "gridfdi/grid_io.hpp"
#include "gridfdi/network.hpp"
#include "gridfdi/topology.hpp"
#include "test_support.hpp"

using namespace gridfdi;
using testsup::load_feeder;

TEST_CASE("phase sets parse, iterate and combine") {
  CHECK(PhaseSet::parse("a").to_string() == "a");
  CHECK(PhaseSet::parse("bc").to_string() == "bc");
  CHECK(PhaseSet::parse("abc").size() == 3);
  CHECK_THROWS_AS(PhaseSet::parse(""), std::invalid_argument);
  CHECK_THROWS_AS(PhaseSet::parse("ax"), std::invalid_argument);
  CHECK_THROWS_AS(PhaseSet::parse("aa"), std::invalid_argument);
  CHECK_THROWS_AS(PhaseSet::parse("ba"), std::invalid_argument);  // canonical order required

  PhaseSet s = PhaseSet::parse("ac");
  CHECK(s.contains(Phase::a));
  CHECK(!s.contains(Phase::b));
  CHECK(s.contains(PhaseSet::of(Phase::c)));
  CHECK(s.unite(PhaseSet::of(Phase::b)) == PhaseSet::abc());
  CHECK(s.intersect(PhaseSet::parse("ab")).to_string() == "a");

  int count = 0;
  for (Phase p : PhaseSet::parse("ac")) {
    CHECK((p == Phase::a || p == Phase::c));
    ++count;
  }
  CHECK(count == 2);

  CHECK(phase_letter(Phase::b) == 'b');
  CHECK(phase_from_letter('c') == Phase::c);
  CHECK_THROWS_AS(phase_from_letter('d'), std::invalid_argument);
}

static const char* kTinyGrid = R"(# two-node fixture
base S=1e6
node src phases=abc role=slack vbase=2400 vset=a:1.02,c:0.99 aset=b:0.5
node tap phases=ab role=injection vbase=2400 alias=T1
branch main from=src to=tap phases=ab kind=line length=100 z aa=0.2+0.5j bb=0.21+0.52j ab=0.05+0.1j
load node=tap phase=a P=100e3 Q=50e3
shunt node=tap phase=b Q=25e3
)";

TEST_CASE("grid text parses into the expected model") {
  Grid g = parse_grid(kTinyGrid);
  CHECK(g.sbase == 1e6);
  REQUIRE(g.nodes.size() == 2);
  REQUIRE(g.branches.size() == 1);
  REQUIRE(g.loads.size() == 1);
  REQUIRE(g.shunts.size() == 1);

  const Node& src = g.nodes[0];
  CHECK(src.role == NodeRole::slack);
  CHECK(src.vset[0] == 1.02);
  CHECK(!src.vset[1].has_value());
  CHECK(src.vset[2] == 0.99);
  CHECK(!src.aset[0].has_value());
  CHECK(src.aset[1] == 0.5);

  const Branch& br = g.branches[0];
  CHECK(br.kind == BranchKind::line);
  CHECK(br.length_m == 100.0);
  CHECK(br.z[0][0] == Complex{0.2, 0.5});
  CHECK(br.z[0][1] == Complex{0.05, 0.1});
  CHECK(br.z[1][0] == br.z[0][1]);  // symmetric fill
  CHECK(br.z[2][2] == Complex{0.0, 0.0});

  CHECK(g.resolve_node("T1") == &g.nodes[1]);
  CHECK(g.resolve_node("tap") == &g.nodes[1]);
  CHECK(g.resolve_node("nope") == nullptr);
  CHECK(g.display_name("tap") == "T1");
  CHECK(g.display_name("src") == "src");
  CHECK(g.node_index("tap") == 1);
  CHECK(g.node_index("missing") == -1);
}

TEST_CASE("parser reports every lexical problem with line positions") {
  const char* bad = R"(base S=1e6
node src phases=abc role=slack vbase=2400
node tap phases=zz role=injection vbase=2400
branch main from=src to=tap phases=a z aa=1+1j
load node=tap phase=a P=ten Q=0
)";
  try {
    parse_grid(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.diagnostics().size() >= 2);
    bool has_line3 = false, has_line5 = false;
    for (const Diagnostic& d : e.diagnostics()) {
      if (d.line == 3) has_line3 = true;
      if (d.line == 5) has_line5 = true;
      CHECK(!d.render().empty());
    }
    CHECK(has_line3);  // bad phase set
    CHECK(has_line5);  // non-numeric load
  }
}

TEST_CASE("dangling references surface as validation diagnostics") {
  const char* bad = R"(base S=1e6
node src phases=abc role=slack vbase=2400
node tap phases=a role=injection vbase=2400
branch main from=src to=ghost phases=a kind=line z aa=1+1j
load node=tap phase=a P=1 Q=0
)";
  try {
    parse_grid(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    REQUIRE(!e.diagnostics().empty());
    bool mentions_ghost = false;
    for (const Diagnostic& d : e.diagnostics())
      if (d.message.find("ghost") != std::string::npos) mentions_ghost = true;
    CHECK(mentions_ghost);
  }
}

TEST_CASE("vset and aset entries are validated") {
  CHECK_THROWS_AS(parse_grid("base S=1e6\n"
                             "node s phases=a role=slack vbase=100 vset=a:1.0,a:1.1\n"),
                  ParseError);
  CHECK_THROWS_AS(parse_grid("base S=1e6\n"
                             "node s phases=a role=slack vbase=100 aset=q:0.1\n"),
                  ParseError);
  CHECK_THROWS_AS(parse_grid("base S=1e6\n"
                             "node s phases=a role=slack vbase=100 vset=1.0\n"),
                  ParseError);
}

TEST_CASE("structural validation catches semantic problems") {
  // Load attached to a zero-injection node.
  CHECK_THROWS_AS(parse_grid("base S=1e6\n"
                             "node s phases=a role=slack vbase=100\n"
                             "node z phases=a role=zero vbase=100\n"
                             "branch b1 from=s to=z phases=a z aa=1+1j\n"
                             "load node=z phase=a P=1 Q=0\n"),
                  ParseError);
  // Two slack nodes.
  CHECK_THROWS_AS(parse_grid("base S=1e6\n"
                             "node s phases=a role=slack vbase=100\n"
                             "node t phases=a role=slack vbase=100\n"
                             "branch b1 from=s to=t phases=a z aa=1+1j\n"),
                  ParseError);
  // Branch phases not carried by an endpoint.
  CHECK_THROWS_AS(parse_grid("base S=1e6\n"
                             "node s phases=abc role=slack vbase=100\n"
                             "node t phases=a role=injection vbase=100\n"
                             "branch b1 from=s to=t phases=ab z aa=1+1j bb=1+1j\n"
                             "load node=t phase=a P=1 Q=0\n"),
                  ParseError);
  // Branch with a zero self-impedance on a declared phase.
  CHECK_THROWS_AS(parse_grid("base S=1e6\n"
                             "node s phases=ab role=slack vbase=100\n"
                             "node t phases=ab role=injection vbase=100\n"
                             "branch b1 from=s to=t phases=ab z aa=1+1j\n"
                             "load node=t phase=a P=1 Q=0\n"),
                  ParseError);
}

TEST_CASE("serialization round-trips bit-exactly") {
  Grid g = parse_grid(kTinyGrid);
  const std::string text = serialize_grid(g);
  Grid h = parse_grid(text);
  REQUIRE(h.nodes.size() == g.nodes.size());
  REQUIRE(h.branches.size() == g.branches.size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    CHECK(h.nodes[i].id == g.nodes[i].id);
    CHECK(h.nodes[i].alias == g.nodes[i].alias);
    CHECK(h.nodes[i].phases == g.nodes[i].phases);
    CHECK(h.nodes[i].role == g.nodes[i].role);
    CHECK(h.nodes[i].vbase == g.nodes[i].vbase);
    CHECK(h.nodes[i].vset == g.nodes[i].vset);
    CHECK(h.nodes[i].aset == g.nodes[i].aset);
  }
  for (std::size_t i = 0; i < g.branches.size(); ++i) {
    CHECK(h.branches[i].z == g.branches[i].z);
    CHECK(h.branches[i].kind == g.branches[i].kind);
    CHECK(h.branches[i].length_m == g.branches[i].length_m);
  }
  CHECK(h.loads.size() == g.loads.size());
  CHECK(h.shunts.size() == g.shunts.size());
  // The canonical form is a fixed point of parse+serialize.
  CHECK(serialize_grid(h) == text);
}

TEST_CASE("bundled feeder dataset loads and merges") {
  System sys = load_feeder();
  CHECK(sys.original.nodes.size() == 14);
  CHECK(sys.original.sbase == doctest::Approx(1e6));

  // The closed switch collapses its endpoints into one supernode.
  const Grid& merged = sys.net.grid();
  CHECK(merged.nodes.size() == 13);
  CHECK(std::none_of(merged.branches.begin(), merged.branches.end(),
                     [](const Branch& b) { return b.kind == BranchKind::switch_; }));
  CHECK(sys.merge_map.merged_id("692") == "671");
  CHECK(sys.merge_map.merged_id("671") == "671");
  const std::vector<std::string>& group = sys.merge_map.originals("671");
  CHECK(group == std::vector<std::string>{"671", "692"});
  // Loads of the absorbed node are summed per phase onto the representative.
  int merged_loads_at_671 = 0;
  double p_a = 0.0, q_c = 0.0;
  for (const LoadEntry& l : merged.loads) {
    if (l.node != "671") continue;
    ++merged_loads_at_671;
    if (l.phase == Phase::a) p_a = l.p;
    if (l.phase == Phase::c) q_c = l.q;
  }
  CHECK(merged_loads_at_671 == 3);
  CHECK(p_a == doctest::Approx(382e3 + 41.4e3));
  CHECK(q_c == doctest::Approx(217e3 + 26.4e3));

  // Merging is idempotent.
  auto [again, mm2] = merge_switches(merged);
  CHECK(again.nodes.size() == merged.nodes.size());
  CHECK(mm2.originals("671") == std::vector<std::string>{"671"});

  const std::vector<std::string> zi = zero_injection_nodes(merged);
  CHECK(zi == std::vector<std::string>{"650L", "632", "633", "684", "680"});
}

TEST_CASE("switches across voltage bases are rejected") {
  CHECK_THROWS_AS(parse_grid("base S=1e6\n"
                             "node s phases=a role=slack vbase=100\n"
                             "node t phases=a role=injection vbase=200\n"
                             "branch b1 from=s to=t phases=a kind=switch\n"
                             "load node=t phase=a P=1 Q=0\n"),
                  ParseError);
}

TEST_CASE("network indexes slots and unknowns") {
  System sys = load_feeder();
  const Network& net = sys.net;
  CHECK(net.node_count() == 13);
  CHECK(net.node_phase_count() == 32);
  CHECK(net.free_slot_count() == 29);
  CHECK(net.unknown_count() == 58);

  const int s652a = net.slot("652", Phase::a);
  REQUIRE(s652a >= 0);
  CHECK(net.node_phase(s652a).phase == Phase::a);
  CHECK(net.slot("652", Phase::b) == -1);
  CHECK(net.slot("650H", Phase::b) >= 0);
  CHECK(net.is_slack_slot(net.slot("650H", Phase::b)));
  CHECK(!net.is_slack_slot(s652a));
  CHECK(net.theta_unknown(net.slot("650H", Phase::a)) == -1);
  CHECK(net.theta_unknown(s652a) >= 0);
  CHECK(net.v_unknown(s652a) == net.theta_unknown(s652a) + net.free_slot_count());

  // Source setpoints: vset trims the magnitude, aset the angle.
  CHECK(net.slack_vset(Phase::b) == 1.05);
  CHECK(net.slack_theta_set(Phase::b) == Network::slack_theta(Phase::b));
  CHECK(net.slack_theta_set(Phase::a) ==
        doctest::Approx(testsup::deg2rad(0.1369825)).epsilon(1e-12));
  CHECK(net.slack_theta_set(Phase::c) ==
        doctest::Approx(Network::slack_theta(Phase::c) + testsup::deg2rad(0.1958957)).epsilon(1e-12));
}

TEST_CASE("per-unit admittance inverts the present-phase impedance block") {
  System sys = load_feeder();
  const Network& net = sys.net;
  const Grid& merged = net.grid();

  for (int b = 0; b < net.branch_count(); ++b) {
    const Branch& br = merged.branches[static_cast<std::size_t>(b)];
    const Node& from = merged.node_by_id(br.from);
    const double zbase = from.vbase * from.vbase / merged.sbase;

    std::vector<int> present;
    for (Phase p : br.phases) present.push_back(static_cast<int>(p));
    const int k = static_cast<int>(present.size());
    Eigen::MatrixXcd zsub(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) zsub(i, j) = br.z[present[i]][present[j]] / zbase;
    const Eigen::MatrixXcd ysub = zsub.inverse();

    const Eigen::Matrix3cd& y = net.branch_admittance(b);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        CHECK(std::abs(y(present[i], present[j]) - ysub(i, j)) < 1e-12 * std::abs(ysub(i, j)) + 1e-15);
    // Absent rows and columns stay zero.
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const bool present_ij = br.phases.contains(static_cast<Phase>(i)) &&
                                br.phases.contains(static_cast<Phase>(j));
        if (!present_ij) CHECK(y(i, j) == Complex{0.0, 0.0});
      }
  }

  // Spot value: the feeder base impedance is vbase^2 / sbase.
  const Node& head = merged.node_by_id("650H");
  CHECK(head.vbase * head.vbase / merged.sbase == doctest::Approx(5.76853).epsilon(1e-5));
}

TEST_CASE("loads and shunts land on the right slots") {
  System sys = load_feeder();
  const Network& net = sys.net;
  const int s675a = net.slot("675", Phase::a);
  CHECK(net.has_load(s675a));
  CHECK(net.load_p(s675a) == doctest::Approx(485e3 / 1e6));
  CHECK(net.load_q(s675a) == doctest::Approx(190e3 / 1e6));
  CHECK(net.shunt_b(s675a) > 0.0);  // capacitor bank
  const int s652a = net.slot("652", Phase::a);
  CHECK(net.shunt_b(s652a) == 0.0);
  const int s680a = net.slot("680", Phase::a);
  CHECK(!net.has_load(s680a));
}
