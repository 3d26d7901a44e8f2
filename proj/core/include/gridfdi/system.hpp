#pragma once

#include <string>
#include <utility>

#include "gridfdi/grid_io.hpp"
#include "gridfdi/network.hpp"
#include "gridfdi/topology.hpp"

namespace gridfdi {

/// Everything the pipeline needs from one grid file: the parsed grid, its
/// switch-merged form, the merge bookkeeping, and the indexed network.
struct System {
  Grid original;
  MergeMap merge_map;
  Network net;  // built on the merged grid

  static System from_text(const std::string& text) {
    Grid g = parse_grid(text);
    auto [merged, mm] = merge_switches(g);
    return System{std::move(g), std::move(mm), Network{std::move(merged)}};
  }

  static System from_file(const std::string& path) {
    Grid g = load_grid_file(path);
    auto [merged, mm] = merge_switches(g);
    return System{std::move(g), std::move(mm), Network{std::move(merged)}};
  }
};

}  // namespace gridfdi
