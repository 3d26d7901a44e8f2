#pragma once

#include <string>

#include "gridfdi/grid.hpp"

namespace gridfdi {

/// Parses the line-oriented grid description format:
///
///   # comment
///   base S=<VA per phase>
///   node <id> phases=<abc subset> role=<slack|injection|zero> vbase=<volts>
///        [alias=<name>] [vset=<ph>:<pu>[,<ph>:<pu>...]]
///   branch <id> from=<id> to=<id> phases=<subset> kind=<line|switch|transformer>
///          [length=<meters>] z <ph><ph>=<R>+<X>j ...
///   load node=<id> phase=<p> P=<watts> Q=<vars>
///   shunt node=<id> phase=<p> Q=<vars>
///
/// Omitted impedance couplings default to zero; `z ab=...` fills both (a,b)
/// and (b,a). Returns a validated Grid or throws ParseError with
/// line/column-tagged diagnostics.
Grid parse_grid(const std::string& text);

/// Reads and parses a grid file; file-system problems become ParseError too.
Grid load_grid_file(const std::string& path);

/// Writes the canonical text form. parse_grid(serialize_grid(g)) is
/// semantically identical to g (full-precision impedances).
std::string serialize_grid(const Grid& grid);

}  // namespace gridfdi
