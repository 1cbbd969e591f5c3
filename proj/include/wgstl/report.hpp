#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "wgstl/error.hpp"
#include "wgstl/formula.hpp"
#include "wgstl/model.hpp"
#include "wgstl/params.hpp"
#include "wgstl/parser.hpp"

namespace wgstl {

// Fixed-point with `digits` decimals; never prints a negative zero.
inline std::string format_fixed(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  std::string s = buf;
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

inline std::string format_vector(const std::vector<double>& v, int digits = 4) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_fixed(v[i], digits);
  }
  return out + "]";
}

// Satisfied when a.x - c > 0; printed in the equivalent "(-a).x <= -c" form,
// e.g. "-0.0298*x1 + 0.0226*x2 <= 0.6593".
inline std::string render_predicate(const Predicate& p, int digits = 4) {
  std::string out;
  for (std::size_t j = 0; j < p.a.size(); ++j) {
    const std::string mag = format_fixed(std::abs(p.a[j]), digits);
    const bool negative = -p.a[j] < 0.0 && mag.find_first_not_of("0.") != std::string::npos;
    if (j == 0) {
      out += negative ? "-" : "";
    } else {
      out += negative ? " - " : " + ";
    }
    out += mag + "*x" + std::to_string(j + 1);
  }
  return out + " <= " + format_fixed(-p.c, digits);
}

namespace detail {

inline std::string describe_node(const Formula& f, std::size_t id) {
  const auto& n = f.node(id);
  std::string s = "n" + std::to_string(id) + " " + std::string(keyword(n.op));
  if (is_temporal(n.op)) s += " [" + std::to_string(n.lo) + " " + std::to_string(n.hi) + "]";
  return s;
}

inline std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
  return out;
}

}  // namespace detail

// The hardened formula as one s-expression line, followed by ';' comment lines
// with predicates and normalized importance weights. The whole text parses
// back to the hardened formula.
inline std::string print_formula(const Formula& tmpl, const OperatorAssignment& assignment, const ParamStore& ps) {
  const Formula f = tmpl.harden(assignment);
  std::string out = to_sexpr(f) + "\n";
  for (const auto& p : ps.predicates(f)) out += "; " + p.name + " := " + render_predicate(p) + "\n";
  for (std::size_t id = 0; id < f.size(); ++id) {
    const auto& n = f.node(id);
    if (is_connective(n.op)) {
      const auto* s = ps.child_weights(id);
      if (!s) throw ValidationError("missing parameter slot for node " + std::to_string(id));
      const auto w = ps.normalized(*s);
      out += "; " + detail::describe_node(f, id) + ": ";
      for (std::size_t m = 0; m < w.size(); ++m) {
        out += (m ? ", " : "") + std::string("w") + std::to_string(m + 1) + "=" + format_fixed(w[m]);
      }
      out += "\n";
    } else if (is_temporal(n.op)) {
      const auto* s = ps.time_weights(id);
      if (!s) throw ValidationError("missing parameter slot for node " + std::to_string(id));
      out += "; " + detail::describe_node(f, id) + ": Ω = " + format_vector(ps.normalized(*s)) + "\n";
    } else if (is_graph(n.op)) {
      for (const auto& s : ps.slots()) {
        if (s.kind != SlotKind::NeighborWeights || s.owner != id) continue;
        out += "; " + detail::describe_node(f, id) + " at " + *s.at + ": 𝒲 = " + format_vector(ps.normalized(s)) +
               " over (" + detail::join(s.labels) + ")\n";
      }
    }
  }
  return out;
}

// Human-readable model dump.
inline std::string inspect_text(const TrainedModel& m) {
  std::string out;
  out += "root: " + m.root + "\n";
  out += "dimensions: ";
  for (std::size_t j = 0; j < m.dim_names.size(); ++j) {
    out += (j ? ", " : "") + std::string("x") + std::to_string(j + 1) + "=" + m.dim_names[j];
  }
  out += "\n";
  out += "structure: " + to_sexpr(m.structure) + "\n";
  out += "operators:";
  if (m.assignment.empty()) out += " (none learned)";
  for (const auto& [id, op] : m.assignment) out += " n" + std::to_string(id) + "=" + std::string(keyword(op));
  out += "\n\nformula:\n" + print_formula(m.structure, m.assignment, m.params);
  out += "\nweights (normalized, each group sums to 1):\n";
  for (const auto& s : m.params.slots()) {
    if (!is_weight_slot(s.kind)) continue;
    const auto w = m.params.normalized(s);
    double total = 0.0;
    for (double x : w) total += x;
    std::string name = s.kind == SlotKind::TimeWeights ? "Ω" : s.kind == SlotKind::NeighborWeights ? "𝒲" : "w";
    out += "  " + s.id + ": " + name + " = " + format_vector(w) + "  sum=" + format_fixed(total, 6);
    if (!s.labels.empty()) out += "  over (" + detail::join(s.labels) + ")";
    out += "\n";
  }
  if (!m.log.empty()) {
    const auto& last = m.log.back();
    out += "\ntraining: " + std::to_string(m.log.size()) + " epoch records, final stage " +
           std::to_string(last.stage) + " best loss " + format_fixed(last.best_loss, 6) + "\n";
  }
  return out;
}

}  // namespace wgstl
