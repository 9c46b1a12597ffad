#include "gridrestore/mps.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace gridrestore {

std::string mps_column_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "C%07zu", index + 1);
  return buf;
}

std::string mps_row_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "R%07zu", index + 1);
  return buf;
}

namespace {

// Shortest %g rendering that fits the 12-character numeric field.
std::string number12(double value) {
  if (value == 0.0) return "0";
  char buf[64];
  for (int precision = 12; precision >= 1; --precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, value);
    if (std::string_view(buf).size() <= 12) return buf;
  }
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

// Field layout: 2-3, 5-12, 15-22, 25-36, 40-47, 50-61 (1-based columns).
std::string data_line(const std::string& f1, const std::string& f2, const std::string& f3,
                      const std::string& f4) {
  std::string line = " " + pad(f1, 2) + " " + pad(f2, 8) + "  " + pad(f3, 8) + "  " + f4;
  while (!line.empty() && line.back() == ' ') line.pop_back();
  return line;
}

std::string render(const LinearProgram& lp, const std::set<std::size_t>& binaries) {
  const bool maximize = lp.objective().sense == Sense::maximize;
  const double obj_sign = maximize ? -1.0 : 1.0;
  std::ostringstream out;
  out << "* gridrestore fixed-format MPS\n";
  out << "* variables " << lp.num_variables() << ", constraints " << lp.num_constraints() << ", binaries "
      << binaries.size() << "\n";
  if (maximize) out << "* objective sense maximize: coefficients negated\n";
  out << "NAME          GRIDRST\n";
  out << "ROWS\n";
  out << " N  OBJ\n";
  const auto& cons = lp.constraints();
  for (std::size_t i = 0; i < cons.size(); ++i) {
    const char* type = cons[i].relation == Relation::less_equal  ? "L"
                       : cons[i].relation == Relation::equal     ? "E"
                                                                 : "G";
    out << data_line(type, mps_row_name(i), "", "") << "\n";
  }

  // Column-major coefficients; row index -1 is the objective.
  std::vector<std::map<long long, double>> columns(lp.num_variables());
  for (const auto& t : lp.objective().terms) columns[t.var][-1] += obj_sign * t.coef;
  for (std::size_t i = 0; i < cons.size(); ++i)
    for (const auto& t : cons[i].terms) columns[t.var][static_cast<long long>(i)] += t.coef;

  out << "COLUMNS\n";
  bool in_marker = false;
  std::size_t marker_count = 0;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const bool is_binary = binaries.contains(j);
    if (is_binary != in_marker) {
      const char* tag = is_binary ? "'INTORG'" : "'INTEND'";
      char name[16];
      std::snprintf(name, sizeof name, "MARK%04zu", marker_count++);
      out << "    " << pad(name, 8) << "  " << pad("'MARKER'", 8) << "                 " << tag << "\n";
      in_marker = is_binary;
    }
    bool wrote = false;
    const std::string col = mps_column_name(j);
    for (const auto& [row, coef] : columns[j]) {
      if (coef == 0.0) continue;
      out << data_line("", col, row < 0 ? "OBJ" : mps_row_name(static_cast<std::size_t>(row)), number12(coef))
          << "\n";
      wrote = true;
    }
    if (!wrote) out << data_line("", col, "OBJ", "0") << "\n";
  }
  if (in_marker) {
    char name[16];
    std::snprintf(name, sizeof name, "MARK%04zu", marker_count++);
    out << "    " << pad(name, 8) << "  " << pad("'MARKER'", 8) << "                 'INTEND'\n";
  }

  out << "RHS\n";
  for (std::size_t i = 0; i < cons.size(); ++i) {
    if (cons[i].rhs != 0.0) out << data_line("", "RHS", mps_row_name(i), number12(cons[i].rhs)) << "\n";
  }
  out << "RANGES\n";
  out << "BOUNDS\n";
  const auto& vars = lp.variables();
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const std::string col = mps_column_name(j);
    const double lo = vars[j].lower;
    const double up = vars[j].upper;
    if (lo == up) {
      out << data_line("FX", "BND", col, number12(lo)) << "\n";
      continue;
    }
    const bool lo_inf = std::isinf(lo);
    const bool up_inf = std::isinf(up);
    if (lo_inf && up_inf) {
      out << data_line("FR", "BND", col, "") << "\n";
      continue;
    }
    if (lo_inf) {
      out << data_line("MI", "BND", col, "") << "\n";
    } else if (lo != 0.0 || (!up_inf && up < 0.0)) {
      out << data_line("LO", "BND", col, number12(lo)) << "\n";
    }
    if (!up_inf) out << data_line("UP", "BND", col, number12(up)) << "\n";
  }
  out << "ENDATA\n";
  return out.str();
}

}  // namespace

std::string write_mps(const LinearProgram& lp) {
  lp.validate();
  return render(lp, {});
}

std::string write_mps(const MixedIntegerProgram& mip) {
  mip.validate();
  return render(mip.base, std::set<std::size_t>(mip.binary_vars.begin(), mip.binary_vars.end()));
}

}  // namespace gridrestore
