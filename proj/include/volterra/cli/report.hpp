#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "volterra/kspa.hpp"
#include "volterra/selection.hpp"
#include "volterra/simulation.hpp"

namespace volterra::cli {

using nlohmann::json;

inline constexpr const char* kSchemaVersion = "1";

/// A rectangular table rendered as CSV. Doubles are written with "%.17g".
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  /// Each cell is a string, a double or an integer.
  using Cell = std::variant<std::string, double, long long>;
  void add_row(std::vector<Cell> row);

  const std::vector<std::string>& header() const noexcept { return header_; }
  std::size_t rows() const noexcept { return rows_.size(); }
  std::string render() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

/// JSON payload plus the CSV renderings that accompany it. The JSON is the
/// source of truth; every CSV cell appears in it.
struct Report {
  json data = json::object();
  std::vector<std::pair<std::string, CsvTable>> tables;

  void add_table(std::string file_name, CsvTable table);
  /// Pretty-printed JSON text with a trailing newline.
  std::string json_text() const;
};

/// Writes `<dir>/<json_name>` and every table into `dir`, each atomically.
void write_report(const Report& report, const std::string& dir, const std::string& json_name);

/// NaN and infinities map to null.
json number(double value);
json numbers(const std::vector<double>& values);
json numbers(const VectorXd& values);

json to_json(const ModelConfig& config);
json to_json(const KernelSpec& spec);
json to_json(const CvReport& report);
json to_json(const KspaResult& result);
json to_json(const McSummary& summary);

struct Histogram {
  /// bins + 1 ascending edges.
  std::vector<double> edges;
  std::vector<long long> counts;
};

/// Freedman-Diaconis bin width 2 IQR n^(-1/3) with at least 5 and at most
/// 1000 bins; a zero width (constant data or zero IQR) falls back to 5 bins.
/// The last bin is closed on the right.
Histogram histogram(const std::vector<double>& values);

/// (x, F(x)) rows at the distinct sample values.
CsvTable ecdf_table(const ErrorSample& sample);

/// Histogram rows (bin_lo, bin_hi, count).
CsvTable histogram_table(const std::vector<double>& values);

/// Histogram and ECDF plot data for each sample: `<prefix>_hist_<label>.csv`
/// and `<prefix>_ecdf_<label>.csv`.
void emit_plot_data(Report& report, const std::string& prefix,
                    const std::vector<ErrorSample>& samples);

}  // namespace volterra::cli
