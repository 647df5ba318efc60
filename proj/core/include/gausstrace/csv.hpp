#pragma once

// Deterministic CSV output: numbers as %.17g, fields quoted only when needed,
// '\n' line endings, so equal inputs give equal bytes.

#include "gausstrace/halfspace_spectral.hpp"
#include "gausstrace/surface_measure.hpp"
#include "gausstrace/trace_identities.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace gausstrace {

[[nodiscard]] std::string format_double(double v);
[[nodiscard]] std::string csv_escape(const std::string& field);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> row);
  [[nodiscard]] const std::vector<std::string>& header() const noexcept { return header_; }
  [[nodiscard]] const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }

  void write(std::ostream& out) const;
  [[nodiscard]] std::string str() const;
  /// Writes to `path`, throwing std::runtime_error on I/O failure.
  void save(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// identity_id, domain, phi_label, k_or_q, lhs, rhs, lhs_err, rhs_err, pass
[[nodiscard]] CsvTable identity_table(const std::vector<IdentityReport>& reports);
/// xi, value, stderr
[[nodiscard]] CsvTable density_table(const DensityCurve& curve);
/// f_label, interp1, interp2, interp3, interp4, ratio_max
[[nodiscard]] CsvTable trace_norm_table(const std::vector<TraceNormReport>& reports);
/// f_label, degree, l2_norm, grad_norm, w12_norm, t2_norm, ratio, mc_w12, mc_w12_err
[[nodiscard]] CsvTable extension_table(const ExtensionBoundReport& report);

}  // namespace gausstrace
