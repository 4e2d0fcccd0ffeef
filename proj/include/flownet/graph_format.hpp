#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "flownet/delay.hpp"
#include "flownet/graph.hpp"
#include "flownet/solver.hpp"
#include "flownet/structural.hpp"

namespace flownet {

/// Everything a graph file can describe: the validated graph, the delay
/// kernels, and optional simulation data.
struct ParsedScenario {
  GraphDescription description;
  MetricGraph graph;
  DelayBank delays;
  std::size_t nx = 256;
  double dt = 0.0;
  double horizon = 0.0;
  std::optional<Control> control;
  std::map<std::string, PiecewiseConstant> initial;  // per edge id
  std::uint64_t seed = 0;
};

namespace format_detail {

struct Line {
  int number;
  std::string text;
};

inline std::vector<Line> split_lines(const std::string& text) {
  std::vector<Line> out;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t' ||
                             line.back() == '\r'))
      line.pop_back();
    std::size_t start = 0;
    while (start < line.size() && (line[start] == ' ' || line[start] == '\t'))
      ++start;
    line.erase(0, start);
    if (!line.empty()) out.push_back({n, line});
  }
  return out;
}

inline std::vector<std::string> tokens(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

// TODO: track token offsets so parse errors carry real column numbers.
inline double to_double(const std::string& tok, const std::string& file,
                        int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(file, line, 1, "expected a number, got '" + tok + "'");
  }
}

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// "b0 b1 ... bk | v1 ... vk" -> breakpoint/value arrays
inline std::pair<std::vector<double>, std::vector<double>> parse_table(
    const std::string& rhs, const std::string& file, int line) {
  const auto bar = rhs.find('|');
  if (bar == std::string::npos)
    throw ParseError(file, line, 1, "expected 'breakpoints | values'");
  std::vector<double> breaks, values;
  for (const auto& t : tokens(rhs.substr(0, bar)))
    breaks.push_back(to_double(t, file, line));
  for (const auto& t : tokens(rhs.substr(bar + 1)))
    values.push_back(to_double(t, file, line));
  return {breaks, values};
}

} // namespace format_detail

/// Parse the sectioned key-value graph format. See docs/formats.md for the
/// grammar. Structural problems in the data surface as ValidationError with
/// the violated rule; syntax problems as ParseError with a location. A
/// non-negative depth_override replaces the file's truncation depth.
inline ParsedScenario parse_graph_text(const std::string& text,
                                       const std::string& filename = "<text>",
                                       int depth_override = -1) {
  using namespace format_detail;
  ParsedScenario out;
  GraphDescription& d = out.description;

  std::map<std::string, std::size_t> edge_order;
  auto edge_ref = [&](const std::string& id) -> EdgeSpec& {
    auto it = edge_order.find(id);
    if (it == edge_order.end()) {
      edge_order[id] = d.edges.size();
      EdgeSpec e;
      e.id = id;
      e.velocity = PiecewiseConstant::constant(1.0);
      e.absorption = PiecewiseConstant::constant(0.0);
      d.edges.push_back(std::move(e));
      return d.edges.back();
    }
    return d.edges[it->second];
  };

  struct DelayDraft {
    double r = 0.0;
    std::vector<DelayMeasure::Atom> atoms;
    std::vector<double> density_breaks;
    std::vector<double> density_values;
  };
  std::map<std::string, DelayDraft> delay_drafts;
  std::vector<double> control_flat;
  Eigen::Index control_rows = -1, control_cols = -1;
  std::vector<double> alloc_flat;
  std::string control_kind;
  std::vector<double> control_args;

  std::string section;
  for (const Line& ln : split_lines(text)) {
    if (ln.text.front() == '[') {
      if (ln.text.back() != ']')
        throw ParseError(filename, ln.number, 1, "unterminated section header");
      section = ln.text.substr(1, ln.text.size() - 2);
      continue;
    }
    if (section == "vertices") {
      for (const auto& t : tokens(ln.text)) d.vertices.push_back(t);
      continue;
    }
    const auto eq = ln.text.find('=');
    if (eq == std::string::npos)
      throw ParseError(filename, ln.number, 1, "expected 'key = value'");
    std::string key = ln.text.substr(0, eq);
    std::string value = ln.text.substr(eq + 1);
    while (!key.empty() && key.back() == ' ') key.pop_back();
    if (section.empty())
      throw ParseError(filename, ln.number, 1,
                       "key '" + key + "' outside any section");

    if (section == "params") {
      if (key == "kirchhoff_tol") d.kirchhoff_tol = to_double(tokens(value).at(0), filename, ln.number);
      else if (key == "nx") out.nx = static_cast<std::size_t>(to_double(tokens(value).at(0), filename, ln.number));
      else if (key == "dt") out.dt = to_double(tokens(value).at(0), filename, ln.number);
      else if (key == "depth") d.truncation_depth = static_cast<int>(to_double(tokens(value).at(0), filename, ln.number));
      else if (key == "root") d.truncation_root = tokens(value).at(0);
      else if (key == "seed") out.seed = static_cast<std::uint64_t>(to_double(tokens(value).at(0), filename, ln.number));
      else throw ParseError(filename, ln.number, 1, "unknown parameter '" + key + "'");
    } else if (section == "edges") {
      const auto dot = key.find('.');
      if (dot == std::string::npos) {
        // "id = tail head"
        const auto tk = tokens(value);
        if (tk.size() != 2)
          throw ParseError(filename, ln.number, 1,
                           "edge line needs 'id = tail head'");
        EdgeSpec& e = edge_ref(key);
        e.tail = tk[0];
        e.head = tk[1];
      } else {
        const std::string id = key.substr(0, dot);
        const std::string field = key.substr(dot + 1);
        EdgeSpec& e = edge_ref(id);
        if (field == "c" || field == "q") {
          auto [breaks, values] = parse_table(value, filename, ln.number);
          try {
            PiecewiseConstant pc(breaks, values);
            (field == "c" ? e.velocity : e.absorption) = pc;
          } catch (const ValidationError& err) {
            throw ParseError(filename, ln.number, 1, err.what());
          }
        } else {
          throw ParseError(filename, ln.number, 1,
                           "unknown edge field '" + field + "'");
        }
      }
    } else if (section == "weights") {
      // "vertex edge = w"
      const auto kt = tokens(key);
      if (kt.size() != 2)
        throw ParseError(filename, ln.number, 1,
                         "weight line needs 'vertex edge = value'");
      EdgeSpec& e = edge_ref(kt[1]);
      if (!e.tail.empty() && e.tail != kt[0])
        throw ParseError(filename, ln.number, 1,
                         "weight vertex '" + kt[0] +
                             "' is not the tail of edge '" + kt[1] + "'");
      e.weight = to_double(tokens(value).at(0), filename, ln.number);
    } else if (section == "control") {
      if (key == "shape") {
        const auto tk = tokens(value);
        if (tk.size() != 2)
          throw ParseError(filename, ln.number, 1, "shape = rows cols");
        control_rows = static_cast<Eigen::Index>(to_double(tk[0], filename, ln.number));
        control_cols = static_cast<Eigen::Index>(to_double(tk[1], filename, ln.number));
      } else if (key == "K") {
        for (const auto& t : tokens(value))
          control_flat.push_back(to_double(t, filename, ln.number));
      } else {
        throw ParseError(filename, ln.number, 1, "unknown control key '" + key + "'");
      }
    } else if (section == "allocation") {
      if (key == "H") {
        for (const auto& t : tokens(value))
          alloc_flat.push_back(to_double(t, filename, ln.number));
      } else {
        throw ParseError(filename, ln.number, 1, "unknown allocation key '" + key + "'");
      }
    } else if (section == "delays") {
      const auto dot = key.find('.');
      if (dot == std::string::npos)
        throw ParseError(filename, ln.number, 1,
                         "delay keys look like 'edge.r', 'edge.atoms', "
                         "'edge.density'");
      const std::string id = key.substr(0, dot);
      const std::string field = key.substr(dot + 1);
      DelayDraft& dd = delay_drafts[id];
      if (field == "r") {
        dd.r = to_double(tokens(value).at(0), filename, ln.number);
      } else if (field == "atoms") {
        for (const auto& t : tokens(value)) {
          const auto colon = t.find(':');
          if (colon == std::string::npos)
            throw ParseError(filename, ln.number, 1,
                             "atoms are 'theta:weight' pairs");
          dd.atoms.push_back({to_double(t.substr(0, colon), filename, ln.number),
                              to_double(t.substr(colon + 1), filename, ln.number)});
        }
      } else if (field == "density") {
        auto [breaks, values] = parse_table(value, filename, ln.number);
        dd.density_breaks = breaks;
        dd.density_values = values;
      } else {
        throw ParseError(filename, ln.number, 1,
                         "unknown delay field '" + field + "'");
      }
    } else if (section == "initial") {
      auto [breaks, values] = parse_table(value, filename, ln.number);
      try {
        out.initial.emplace(key, PiecewiseConstant(breaks, values));
      } catch (const ValidationError& err) {
        throw ParseError(filename, ln.number, 1, err.what());
      }
    } else if (section == "simulate") {
      if (key == "T") {
        out.horizon = to_double(tokens(value).at(0), filename, ln.number);
      } else if (key == "u") {
        const auto tk = tokens(value);
        if (tk.empty() || (tk[0] != "exp" && tk[0] != "const"))
          throw ParseError(filename, ln.number, 1,
                           "control is 'exp rate a1 a2 ...' or 'const a1 ...'");
        control_kind = tk[0];
        control_args.clear();
        for (std::size_t i = 1; i < tk.size(); ++i)
          control_args.push_back(to_double(tk[i], filename, ln.number));
      } else {
        throw ParseError(filename, ln.number, 1, "unknown simulate key '" + key + "'");
      }
    } else {
      throw ParseError(filename, ln.number, 1, "unknown section '" + section + "'");
    }
  }

  if (control_rows >= 0) {
    if (static_cast<Eigen::Index>(control_flat.size()) !=
        control_rows * control_cols)
      throw ValidationError("Control", "control matrix needs rows*cols entries");
    d.control.resize(control_rows, control_cols);
    for (Eigen::Index r = 0; r < control_rows; ++r)
      for (Eigen::Index c = 0; c < control_cols; ++c)
        d.control(r, c) = control_flat[static_cast<std::size_t>(r * control_cols + c)];
  }
  if (!alloc_flat.empty()) {
    const auto m = static_cast<Eigen::Index>(d.edges.size());
    if (static_cast<Eigen::Index>(alloc_flat.size()) != m * m)
      throw ValidationError("Allocation", "allocation matrix must be m x m");
    Matrix H(m, m);
    for (Eigen::Index r = 0; r < m; ++r)
      for (Eigen::Index c = 0; c < m; ++c)
        H(r, c) = alloc_flat[static_cast<std::size_t>(r * m + c)];
    d.allocation = H;
  }

  if (depth_override >= 0) d.truncation_depth = depth_override;
  out.graph = MetricGraph::build(d);

  std::vector<DelayMeasure> measures;
  for (const auto& e : out.graph.edges()) {
    auto it = delay_drafts.find(e.id);
    if (it == delay_drafts.end()) {
      measures.emplace_back();
    } else {
      const DelayDraft& dd = it->second;
      measures.emplace_back(dd.r, dd.atoms, dd.density_breaks,
                            dd.density_values);
    }
  }
  out.delays = DelayBank(std::move(measures));

  if (!control_kind.empty()) {
    if (control_args.empty())
      throw ValidationError("Control", "control needs amplitudes");
    double rate = 0.0;
    std::size_t first = 0;
    if (control_kind == "exp") {
      rate = control_args.at(0);
      first = 1;
    }
    Vector amp(static_cast<Eigen::Index>(control_args.size() - first));
    for (std::size_t i = first; i < control_args.size(); ++i)
      amp[static_cast<Eigen::Index>(i - first)] = control_args[i];
    out.control = Control::exponential(rate, amp);
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("IO", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ParsedScenario parse_graph_file(const std::string& path,
                                       int depth_override = -1) {
  return parse_graph_text(read_file(path), path, depth_override);
}

/// Canonical serialization; parsing it back yields an identical graph.
inline std::string write_graph_text(const ParsedScenario& sc) {
  using format_detail::fmt;
  std::ostringstream o;
  const GraphDescription& d = sc.description;
  o << "[params]\n";
  o << "kirchhoff_tol = " << fmt(d.kirchhoff_tol) << "\n";
  o << "nx = " << sc.nx << "\n";
  if (sc.dt > 0.0) o << "dt = " << fmt(sc.dt) << "\n";
  if (d.truncation_depth > 0) {
    o << "depth = " << d.truncation_depth << "\n";
    if (!d.truncation_root.empty()) o << "root = " << d.truncation_root << "\n";
  }
  o << "\n[vertices]\n";
  for (const auto& v : d.vertices) o << v << "\n";
  o << "\n[edges]\n";
  auto table = [&](const PiecewiseConstant& pc) {
    std::string s;
    for (double b : pc.breakpoints()) s += fmt(b) + " ";
    s += "|";
    for (double v : pc.values()) s += " " + fmt(v);
    return s;
  };
  for (const auto& e : d.edges) {
    o << e.id << " = " << e.tail << " " << e.head << "\n";
    o << e.id << ".c = " << table(e.velocity) << "\n";
    o << e.id << ".q = " << table(e.absorption) << "\n";
  }
  o << "\n[weights]\n";
  for (const auto& e : d.edges)
    o << e.tail << " " << e.id << " = " << fmt(e.weight.value_or(1.0)) << "\n";
  if (d.control.size() > 0) {
    o << "\n[control]\n";
    o << "shape = " << d.control.rows() << " " << d.control.cols() << "\n";
    o << "K =";
    for (Eigen::Index r = 0; r < d.control.rows(); ++r)
      for (Eigen::Index c = 0; c < d.control.cols(); ++c)
        o << " " << fmt(d.control(r, c));
    o << "\n";
  }
  if (d.allocation) {
    o << "\n[allocation]\n";
    o << "H =";
    for (Eigen::Index r = 0; r < d.allocation->rows(); ++r)
      for (Eigen::Index c = 0; c < d.allocation->cols(); ++c)
        o << " " << fmt((*d.allocation)(r, c));
    o << "\n";
  }
  bool any_delay = false;
  for (std::size_t j = 0; j < sc.delays.size(); ++j)
    if (!sc.delays[j].is_zero()) any_delay = true;
  if (any_delay) {
    o << "\n[delays]\n";
    for (std::size_t j = 0; j < sc.delays.size(); ++j) {
      const DelayMeasure& m = sc.delays[j];
      if (m.is_zero()) continue;
      const std::string& id = d.edges[j].id;
      o << id << ".r = " << fmt(m.horizon()) << "\n";
      if (!m.atoms().empty()) {
        o << id << ".atoms =";
        for (const auto& a : m.atoms())
          o << " " << fmt(a.theta) << ":" << fmt(a.weight);
        o << "\n";
      }
      if (!m.density_values().empty()) {
        o << id << ".density =";
        for (double b : m.density_breaks()) o << " " << fmt(b);
        o << " |";
        for (double v : m.density_values()) o << " " << fmt(v);
        o << "\n";
      }
    }
  }
  if (!sc.initial.empty()) {
    o << "\n[initial]\n";
    for (const auto& [id, pc] : sc.initial)
      o << id << " = " << table(pc) << "\n";
  }
  if (sc.horizon > 0.0 || sc.control) {
    o << "\n[simulate]\n";
    if (sc.horizon > 0.0) o << "T = " << fmt(sc.horizon) << "\n";
    if (sc.control) {
      o << "u = exp " << fmt(sc.control->rate());
      for (Eigen::Index i = 0; i < sc.control->amplitude().size(); ++i)
        o << " " << fmt(sc.control->amplitude()[i]);
      o << "\n";
    }
  }
  return o.str();
}

struct PatternFile {
  std::optional<StructuredMatrix> single;
  std::optional<StructuredMatrix> a;
  std::optional<StructuredMatrix> k;
};

/// Pattern grid file: either one bare grid of x/0/1 symbols, or [A] and [K]
/// sections holding the state and input patterns.
inline PatternFile parse_pattern_text(const std::string& text,
                                      const std::string& filename = "<text>") {
  using namespace format_detail;
  PatternFile out;
  std::string section;
  std::map<std::string, std::vector<std::vector<char>>> grids;
  for (const Line& ln : split_lines(text)) {
    if (ln.text.front() == '[') {
      if (ln.text.back() != ']')
        throw ParseError(filename, ln.number, 1, "unterminated section header");
      section = ln.text.substr(1, ln.text.size() - 2);
      continue;
    }
    std::vector<char> row;
    for (const auto& t : tokens(ln.text)) {
      if (t.size() != 1)
        throw ParseError(filename, ln.number, 1,
                         "pattern entries are single symbols x, 0 or 1");
      row.push_back(t[0]);
    }
    grids[section].push_back(std::move(row));
  }
  try {
    if (grids.count("")) out.single = StructuredMatrix::from_grid(grids[""]);
    if (grids.count("A")) out.a = StructuredMatrix::from_grid(grids["A"]);
    if (grids.count("K")) out.k = StructuredMatrix::from_grid(grids["K"]);
  } catch (const ValidationError& e) {
    throw ParseError(filename, 1, 1, e.what());
  }
  if (!out.single && !(out.a && out.k))
    throw ParseError(filename, 1, 1,
                     "expected one bare grid or both [A] and [K] sections");
  return out;
}

inline PatternFile parse_pattern_file(const std::string& path) {
  return parse_pattern_text(read_file(path), path);
}

} // namespace flownet
