#include "gridfdi/grid_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "gridfdi/diagnostics.hpp"

namespace gridfdi {

std::string Diagnostic::render() const {
  std::string out;
  if (line > 0) {
    out += "line " + std::to_string(line);
    if (column > 0) out += ":" + std::to_string(column);
    out += ": ";
  }
  out += message;
  return out;
}

namespace {

std::string join_diagnostics(const std::vector<Diagnostic>& diags) {
  std::string out;
  for (const Diagnostic& d : diags) {
    if (!out.empty()) out += '\n';
    out += d.render();
  }
  return out.empty() ? std::string("invalid input") : out;
}

}  // namespace

ParseError::ParseError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(join_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {}

namespace {

struct Token {
  std::string text;
  int column = 0;  // 1-based
};

std::vector<Token> tokenize(const std::string& line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
      continue;
    }
    if (line[i] == '#') break;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    out.push_back(Token{line.substr(start, i - start), static_cast<int>(start) + 1});
  }
  return out;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

// Accepts "R", "Xj", and "R+Xj"/"R-Xj" (exponents allowed in either part).
bool parse_complex_value(const std::string& s, Complex& out) {
  if (s.empty()) return false;
  if (s.back() != 'j') {
    double re = 0.0;
    if (!parse_number(s, re)) return false;
    out = Complex{re, 0.0};
    return true;
  }
  std::string body = s.substr(0, s.size() - 1);
  std::size_t split = std::string::npos;
  for (std::size_t i = body.size(); i-- > 1;) {
    char c = body[i];
    if ((c == '+' || c == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  double re = 0.0, im = 0.0;
  if (split == std::string::npos) {
    if (!parse_number(body, im)) return false;
    out = Complex{0.0, im};
    return true;
  }
  if (!parse_number(body.substr(0, split), re)) return false;
  if (!parse_number(body.substr(split), im)) return false;
  out = Complex{re, im};
  return true;
}

class Parser {
public:
  Grid run(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::vector<Token> toks = tokenize(line);
      if (toks.empty()) continue;
      const std::string& head = toks[0].text;
      if (head == "base")
        parse_base(toks, lineno);
      else if (head == "node")
        parse_node(toks, lineno);
      else if (head == "branch")
        parse_branch(toks, lineno);
      else if (head == "load")
        parse_load(toks, lineno);
      else if (head == "shunt")
        parse_shunt(toks, lineno);
      else
        error(lineno, toks[0].column, "unknown record type '" + head + "'");
    }
    if (!base_seen_) error(0, 0, "missing 'base S=<VA per phase>' line");
    if (!diags_.empty()) throw ParseError(std::move(diags_));
    validate_grid(grid_);
    return std::move(grid_);
  }

private:
  void error(int line, int column, const std::string& message) {
    diags_.push_back(Diagnostic{line, column, message});
  }

  bool split_kv(const Token& t, int lineno, std::string& key, std::string& value) {
    std::size_t eq = t.text.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == t.text.size()) {
      error(lineno, t.column, "expected key=value, got '" + t.text + "'");
      return false;
    }
    key = t.text.substr(0, eq);
    value = t.text.substr(eq + 1);
    return true;
  }

  bool require_number(const Token& t, int lineno, const std::string& value, const std::string& what,
                      double& out) {
    if (!parse_number(value, out)) {
      error(lineno, t.column, "cannot read " + what + " from '" + value + "'");
      return false;
    }
    return true;
  }

  bool require_phases(const Token& t, int lineno, const std::string& value, PhaseSet& out) {
    try {
      out = PhaseSet::parse(value);
      return true;
    } catch (const std::invalid_argument& e) {
      error(lineno, t.column, e.what());
      return false;
    }
  }

  bool require_phase(const Token& t, int lineno, const std::string& value, Phase& out) {
    if (value.size() == 1) {
      try {
        out = phase_from_letter(value[0]);
        return true;
      } catch (const std::invalid_argument&) {
      }
    }
    error(lineno, t.column, "expected a single phase letter, got '" + value + "'");
    return false;
  }

  void parse_base(const std::vector<Token>& toks, int lineno) {
    if (base_seen_) error(lineno, toks[0].column, "duplicate base line");
    base_seen_ = true;
    bool have_s = false;
    for (std::size_t i = 1; i < toks.size(); ++i) {
      std::string key, value;
      if (!split_kv(toks[i], lineno, key, value)) continue;
      if (key == "S") {
        have_s = require_number(toks[i], lineno, value, "power base", grid_.sbase);
      } else {
        error(lineno, toks[i].column, "unknown base attribute '" + key + "'");
      }
    }
    if (!have_s) error(lineno, toks[0].column, "base line needs S=<VA per phase>");
  }

  void parse_node(const std::vector<Token>& toks, int lineno) {
    if (toks.size() < 2 || toks[1].text.find('=') != std::string::npos) {
      error(lineno, toks[0].column, "node line needs an id after 'node'");
      return;
    }
    Node node;
    node.id = toks[1].text;
    bool have_phases = false, have_role = false, have_vbase = false;
    for (std::size_t i = 2; i < toks.size(); ++i) {
      std::string key, value;
      if (!split_kv(toks[i], lineno, key, value)) continue;
      if (key == "phases") {
        have_phases = require_phases(toks[i], lineno, value, node.phases);
      } else if (key == "role") {
        have_role = true;
        if (value == "slack")
          node.role = NodeRole::slack;
        else if (value == "injection")
          node.role = NodeRole::injection;
        else if (value == "zero")
          node.role = NodeRole::zero_injection;
        else {
          error(lineno, toks[i].column,
                "unknown role '" + value + "' (expected slack, injection, or zero)");
          have_role = false;
        }
      } else if (key == "vbase") {
        have_vbase = require_number(toks[i], lineno, value, "voltage base", node.vbase);
      } else if (key == "alias") {
        node.alias = value;
      } else if (key == "vset") {
        parse_phase_map(toks[i], lineno, value, "vset", node.vset);
      } else if (key == "aset") {
        parse_phase_map(toks[i], lineno, value, "aset", node.aset);
      } else {
        error(lineno, toks[i].column, "unknown node attribute '" + key + "'");
      }
    }
    if (!have_phases) error(lineno, toks[0].column, "node '" + node.id + "' is missing phases=");
    if (!have_role) error(lineno, toks[0].column, "node '" + node.id + "' is missing role=");
    if (!have_vbase) error(lineno, toks[0].column, "node '" + node.id + "' is missing vbase=");
    grid_.nodes.push_back(std::move(node));
  }

  void parse_phase_map(const Token& t, int lineno, const std::string& value,
                       const std::string& what, std::array<std::optional<double>, 3>& out) {
    std::size_t pos = 0;
    while (pos <= value.size()) {
      std::size_t comma = value.find(',', pos);
      std::string item =
          value.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      double v = 0.0;
      if (item.size() < 3 || item[1] != ':' ||
          (item[0] != 'a' && item[0] != 'b' && item[0] != 'c') ||
          !parse_number(item.substr(2), v)) {
        error(lineno, t.column, what + " entries look like a:1.05, got '" + item + "'");
      } else {
        Phase p = phase_from_letter(item[0]);
        if (out[static_cast<int>(p)])
          error(lineno, t.column,
                "duplicate " + what + " entry for phase " + std::string(1, phase_letter(p)));
        out[static_cast<int>(p)] = v;
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }

  void parse_branch(const std::vector<Token>& toks, int lineno) {
    if (toks.size() < 2 || toks[1].text.find('=') != std::string::npos) {
      error(lineno, toks[0].column, "branch line needs an id after 'branch'");
      return;
    }
    Branch branch;
    branch.id = toks[1].text;
    bool have_from = false, have_to = false, have_phases = false, have_kind = false;
    std::size_t i = 2;
    for (; i < toks.size(); ++i) {
      if (toks[i].text == "z") {
        ++i;
        break;
      }
      std::string key, value;
      if (!split_kv(toks[i], lineno, key, value)) continue;
      if (key == "from") {
        branch.from = value;
        have_from = true;
      } else if (key == "to") {
        branch.to = value;
        have_to = true;
      } else if (key == "phases") {
        have_phases = require_phases(toks[i], lineno, value, branch.phases);
      } else if (key == "kind") {
        have_kind = true;
        if (value == "line")
          branch.kind = BranchKind::line;
        else if (value == "switch")
          branch.kind = BranchKind::switch_;
        else if (value == "transformer")
          branch.kind = BranchKind::transformer;
        else {
          error(lineno, toks[i].column,
                "unknown kind '" + value + "' (expected line, switch, or transformer)");
          have_kind = false;
        }
      } else if (key == "length") {
        double len = 0.0;
        if (require_number(toks[i], lineno, value, "length", len)) branch.length_m = len;
      } else {
        error(lineno, toks[i].column, "unknown branch attribute '" + key + "'");
      }
    }
    std::set<std::string> z_seen;
    for (; i < toks.size(); ++i) {
      std::string key, value;
      if (!split_kv(toks[i], lineno, key, value)) continue;
      if (key.size() != 2 || (key[0] != 'a' && key[0] != 'b' && key[0] != 'c') ||
          (key[1] != 'a' && key[1] != 'b' && key[1] != 'c')) {
        error(lineno, toks[i].column, "impedance entries look like ab=R+Xj, got '" + key + "'");
        continue;
      }
      Phase pr = phase_from_letter(key[0]);
      Phase pc = phase_from_letter(key[1]);
      if (!z_seen.insert(std::string{phase_letter(std::min(pr, pc)), phase_letter(std::max(pr, pc))})
               .second)
        error(lineno, toks[i].column, "duplicate impedance entry '" + key + "'");
      Complex z;
      if (!parse_complex_value(value, z)) {
        error(lineno, toks[i].column, "cannot read impedance from '" + value + "'");
        continue;
      }
      branch.z[static_cast<int>(pr)][static_cast<int>(pc)] = z;
      branch.z[static_cast<int>(pc)][static_cast<int>(pr)] = z;
    }
    if (!have_from) error(lineno, toks[0].column, "branch '" + branch.id + "' is missing from=");
    if (!have_to) error(lineno, toks[0].column, "branch '" + branch.id + "' is missing to=");
    if (!have_phases) error(lineno, toks[0].column, "branch '" + branch.id + "' is missing phases=");
    if (!have_kind) error(lineno, toks[0].column, "branch '" + branch.id + "' is missing kind=");
    grid_.branches.push_back(std::move(branch));
  }

  void parse_load(const std::vector<Token>& toks, int lineno) {
    LoadEntry load;
    bool have_node = false, have_phase = false, have_p = false, have_q = false;
    for (std::size_t i = 1; i < toks.size(); ++i) {
      std::string key, value;
      if (!split_kv(toks[i], lineno, key, value)) continue;
      if (key == "node") {
        load.node = value;
        have_node = true;
      } else if (key == "phase") {
        have_phase = require_phase(toks[i], lineno, value, load.phase);
      } else if (key == "P") {
        have_p = require_number(toks[i], lineno, value, "load P", load.p);
      } else if (key == "Q") {
        have_q = require_number(toks[i], lineno, value, "load Q", load.q);
      } else {
        error(lineno, toks[i].column, "unknown load attribute '" + key + "'");
      }
    }
    if (!have_node || !have_phase || !have_p || !have_q)
      error(lineno, toks[0].column, "load lines need node=, phase=, P=, Q=");
    grid_.loads.push_back(std::move(load));
  }

  void parse_shunt(const std::vector<Token>& toks, int lineno) {
    Shunt shunt;
    bool have_node = false, have_phase = false, have_q = false;
    for (std::size_t i = 1; i < toks.size(); ++i) {
      std::string key, value;
      if (!split_kv(toks[i], lineno, key, value)) continue;
      if (key == "node") {
        shunt.node = value;
        have_node = true;
      } else if (key == "phase") {
        have_phase = require_phase(toks[i], lineno, value, shunt.phase);
      } else if (key == "Q") {
        have_q = require_number(toks[i], lineno, value, "shunt Q", shunt.q_rated);
      } else {
        error(lineno, toks[i].column, "unknown shunt attribute '" + key + "'");
      }
    }
    if (!have_node || !have_phase || !have_q)
      error(lineno, toks[0].column, "shunt lines need node=, phase=, Q=");
    grid_.shunts.push_back(std::move(shunt));
  }

  Grid grid_;
  std::vector<Diagnostic> diags_;
  bool base_seen_ = false;
};

std::string fmt_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_complex(Complex z) {
  std::string out = fmt_number(z.real());
  out += std::signbit(z.imag()) ? '-' : '+';
  out += fmt_number(std::abs(z.imag()));
  out += 'j';
  return out;
}

}  // namespace

Grid parse_grid(const std::string& text) { return Parser{}.run(text); }

Grid load_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError({Diagnostic{0, 0, "cannot open grid file '" + path + "'"}});
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_grid(buf.str());
}

std::string serialize_grid(const Grid& grid) {
  std::string out;
  out += "base S=" + fmt_number(grid.sbase) + "\n\n";
  for (const Node& n : grid.nodes) {
    out += "node " + n.id + " phases=" + n.phases.to_string() + " role=" + to_string(n.role) +
           " vbase=" + fmt_number(n.vbase);
    if (!n.alias.empty()) out += " alias=" + n.alias;
    std::string vset;
    for (Phase p : n.phases) {
      if (!n.vset[static_cast<int>(p)]) continue;
      if (!vset.empty()) vset += ',';
      vset += phase_letter(p);
      vset += ':';
      vset += fmt_number(*n.vset[static_cast<int>(p)]);
    }
    if (!vset.empty()) out += " vset=" + vset;
    std::string aset;
    for (Phase p : n.phases) {
      if (!n.aset[static_cast<int>(p)]) continue;
      if (!aset.empty()) aset += ',';
      aset += phase_letter(p);
      aset += ':';
      aset += fmt_number(*n.aset[static_cast<int>(p)]);
    }
    if (!aset.empty()) out += " aset=" + aset;
    out += '\n';
  }
  out += '\n';
  for (const Branch& b : grid.branches) {
    out += "branch " + b.id + " from=" + b.from + " to=" + b.to +
           " phases=" + b.phases.to_string() + " kind=" + to_string(b.kind);
    if (b.length_m) out += " length=" + fmt_number(*b.length_m);
    std::string zs;
    for (Phase pr : b.phases) {
      for (Phase pc : b.phases) {
        if (static_cast<int>(pc) < static_cast<int>(pr)) continue;
        Complex z = b.z[static_cast<int>(pr)][static_cast<int>(pc)];
        if (z == Complex{0.0, 0.0} && (pr != pc || b.kind == BranchKind::switch_)) continue;
        zs += ' ';
        zs += phase_letter(pr);
        zs += phase_letter(pc);
        zs += '=';
        zs += fmt_complex(z);
      }
    }
    if (!zs.empty()) out += " z" + zs;
    out += '\n';
  }
  if (!grid.loads.empty()) out += '\n';
  for (const LoadEntry& l : grid.loads)
    out += "load node=" + l.node + " phase=" + std::string(1, phase_letter(l.phase)) +
           " P=" + fmt_number(l.p) + " Q=" + fmt_number(l.q) + '\n';
  if (!grid.shunts.empty()) out += '\n';
  for (const Shunt& s : grid.shunts)
    out += "shunt node=" + s.node + " phase=" + std::string(1, phase_letter(s.phase)) +
           " Q=" + fmt_number(s.q_rated) + '\n';
  return out;
}

}  // namespace gridfdi
