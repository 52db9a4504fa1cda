#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "lagflow/equilibria.hpp"
#include "lagflow/mass_mesh.hpp"

namespace lagflow {

/// Shortest round-trip-safe text for a double (17 significant digits).
std::string format_double(double v);

/// `# key = value` lines written at the top of every CSV.
class CsvHeader {
 public:
  void add(std::string key, std::string value);
  void add(std::string key, double value);
  void add(std::string key, std::size_t value);
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  void write(std::ostream& os) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

void write_snapshots(std::ostream& os, const CsvHeader& header, const std::vector<double>& times,
                     const std::vector<LagrangianState>& states);
void write_densities(std::ostream& os, const CsvHeader& header, const std::vector<double>& times,
                     const std::vector<LagrangianState>& states);

struct TimeseriesRow {
  double t = 0.0;
  double entropy = 0.0;
  double information = 0.0;
  double entropy_gap = 0.0;
  double information_gap = 0.0;
  double l1_error = 0.0;
  int newton_iterations = 0;
  double residual = 0.0;
};
void write_timeseries(std::ostream& os, const CsvHeader& header, const std::vector<TimeseriesRow>& rows);

void write_convergence(std::ostream& os, const CsvHeader& header, const std::vector<ConvergenceRow>& rows);

struct SelfSimilarRow {
  std::size_t step = 0;
  double scaled_time = 0.0;
  double growth = 1.0;
  double max_coordinate_deviation = 0.0;
  double l1_deviation = 0.0;
  double decay_factor = 1.0;
};
void write_selfsim(std::ostream& os, const CsvHeader& header, const std::vector<SelfSimilarRow>& rows);

/// Whitespace, comma or newline separated numbers; `#` starts a comment.
std::vector<double> read_numbers(const std::string& path);

}  // namespace lagflow
