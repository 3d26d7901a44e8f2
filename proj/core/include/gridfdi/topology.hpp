#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gridfdi/grid.hpp"

namespace gridfdi {

/// Nodes with role zero-injection (the hard-constraint set).
std::vector<std::string> zero_injection_nodes(const Grid& grid);

/// Bookkeeping from merge_switches: how original nodes map onto merged
/// supernodes, so results can be reported per original node.
struct MergeMap {
  // original node id -> merged node id (identity for untouched nodes)
  std::map<std::string, std::string> to_merged;
  // merged node id -> original ids it absorbed, representative first
  std::map<std::string, std::vector<std::string>> groups;

  const std::string& merged_id(const std::string& original) const;
  const std::vector<std::string>& originals(const std::string& merged) const;
};

/// Collapses every switch branch into a supernode carrying the union of the
/// endpoints' phases, loads and shunts. The representative keeps the id and
/// alias of the switch's from-side node. Idempotent; throws ParseError when a
/// switch connects nodes with different voltage bases.
std::pair<Grid, MergeMap> merge_switches(const Grid& grid);

}  // namespace gridfdi
