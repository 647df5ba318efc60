#include "gausstrace/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace gausstrace {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw std::invalid_argument("CsvTable: row width differs from header");
  rows_.push_back(std::move(row));
}

void CsvTable::write(std::ostream& out) const {
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << csv_escape(fields[i]);
    out << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
}

std::string CsvTable::str() const {
  std::ostringstream out;
  write(out);
  return out.str();
}

void CsvTable::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write(out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

CsvTable identity_table(const std::vector<IdentityReport>& reports) {
  CsvTable t({"identity_id", "domain", "phi_label", "k_or_q", "lhs", "rhs", "lhs_err", "rhs_err", "pass"});
  for (const auto& r : reports) {
    const std::string phi = r.psi.empty() ? r.phi : r.phi + ";" + r.psi;
    t.add_row({to_string(r.id), r.domain, phi, r.index, format_double(r.lhs), format_double(r.rhs),
               format_double(r.lhs_err), format_double(r.rhs_err), r.pass ? "1" : "0"});
  }
  return t;
}

CsvTable density_table(const DensityCurve& curve) {
  CsvTable t({"xi", "value", "stderr"});
  for (std::size_t i = 0; i < curve.grid.size(); ++i)
    t.add_row({format_double(curve.grid[i]), format_double(curve.values[i]), format_double(curve.std_errors[i])});
  return t;
}

CsvTable trace_norm_table(const std::vector<TraceNormReport>& reports) {
  CsvTable t({"f_label", "interp1", "interp2", "interp3", "interp4", "ratio_max"});
  for (const auto& r : reports)
    t.add_row({r.f_label, format_double(r.norms[0]), format_double(r.norms[1]), format_double(r.norms[2]),
               format_double(r.norms[3]), format_double(r.ratio_max)});
  return t;
}

CsvTable extension_table(const ExtensionBoundReport& report) {
  CsvTable t({"f_label", "degree", "l2_norm", "grad_norm", "w12_norm", "t2_norm", "ratio", "mc_w12", "mc_w12_err"});
  for (const auto& r : report.rows)
    t.add_row({r.label, std::to_string(r.degree), format_double(r.l2_norm), format_double(r.grad_norm),
               format_double(r.w12_norm), format_double(r.t2_norm), format_double(r.ratio),
               format_double(r.mc_w12.mean), format_double(r.mc_w12.std_error)});
  return t;
}

}  // namespace gausstrace
