#include "gridfdi/phase.hpp"

#include <stdexcept>

namespace gridfdi {

char phase_letter(Phase p) {
  switch (p) {
    case Phase::a: return 'a';
    case Phase::b: return 'b';
    case Phase::c: return 'c';
  }
  return '?';
}

Phase phase_from_letter(char ch) {
  switch (ch) {
    case 'a': return Phase::a;
    case 'b': return Phase::b;
    case 'c': return Phase::c;
    default: throw std::invalid_argument(std::string("unknown phase letter '") + ch + "'");
  }
}

PhaseSet PhaseSet::parse(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("phase set must not be empty");
  PhaseSet set;
  Phase last = Phase::a;
  bool first = true;
  for (char ch : text) {
    Phase p = phase_from_letter(ch);
    if (!first && static_cast<int>(p) <= static_cast<int>(last))
      throw std::invalid_argument("phase set '" + text + "' is not in canonical a<b<c order");
    set.insert(p);
    last = p;
    first = false;
  }
  return set;
}

int PhaseSet::size() const {
  int n = 0;
  for (Phase p : all_phases)
    if (contains(p)) ++n;
  return n;
}

std::string PhaseSet::to_string() const {
  std::string out;
  for (Phase p : all_phases)
    if (contains(p)) out.push_back(phase_letter(p));
  return out;
}

}  // namespace gridfdi
