#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "gridfdi/phase.hpp"

namespace gridfdi {

using Complex = std::complex<double>;

enum class NodeRole { slack, injection, zero_injection };
enum class BranchKind { line, switch_, transformer };

std::string to_string(NodeRole role);
std::string to_string(BranchKind kind);

struct Node {
  std::string id;
  std::string alias;  // optional display name, e.g. "671" carries alias "08"
  PhaseSet phases;
  NodeRole role = NodeRole::injection;
  double vbase = 0.0;  // volts, line-to-neutral
  // Per-phase slack voltage setpoint in pu (slack nodes only). Encodes fixed
  // regulator/source taps; defaults to 1.0 where unset.
  std::array<std::optional<double>, 3> vset{};
  // Per-phase slack angle offset in degrees from the 0/-120/+120 references
  // (slack nodes only). Captures the phasor asymmetry the upstream system
  // delivers at the feeder head; defaults to 0 where unset.
  std::array<std::optional<double>, 3> aset{};
};

struct Branch {
  std::string id;
  std::string from;
  std::string to;
  PhaseSet phases;
  BranchKind kind = BranchKind::line;
  // Series impedance in ohms referred to the from-side voltage base,
  // abc-indexed; rows/columns of absent phases stay zero. Symmetric.
  std::array<std::array<Complex, 3>, 3> z{};
  std::optional<double> length_m;  // lines only, informational
};

struct Shunt {
  std::string node;
  Phase phase = Phase::a;
  double q_rated = 0.0;  // VAr injected at nominal voltage; constant impedance
};

struct LoadEntry {
  std::string node;
  Phase phase = Phase::a;
  double p = 0.0;  // watts consumed
  double q = 0.0;  // VArs consumed
};

struct Grid {
  double sbase = 0.0;  // VA, per phase
  std::vector<Node> nodes;
  std::vector<Branch> branches;
  std::vector<Shunt> shunts;
  std::vector<LoadEntry> loads;

  int node_index(const std::string& id) const;  // -1 when missing
  const Node* find_node(const std::string& id) const;
  const Node& node_by_id(const std::string& id) const;  // throws std::out_of_range
  /// Resolves either a node id or an alias; nullptr when neither matches.
  const Node* resolve_node(const std::string& id_or_alias) const;
  const std::string& display_name(const std::string& id) const;  // alias if set
};

/// Structural validation (dangling references, phase continuity, duplicate
/// slack, asymmetric impedance blocks, loads on zero-injection nodes, ...).
/// Throws ParseError listing every violation found.
void validate_grid(const Grid& grid);

}  // namespace gridfdi
