#include "lagflow/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace lagflow {

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

void CsvHeader::add(std::string key, std::string value) { entries_.emplace_back(std::move(key), std::move(value)); }
void CsvHeader::add(std::string key, double value) { add(std::move(key), format_double(value)); }
void CsvHeader::add(std::string key, std::size_t value) { add(std::move(key), std::to_string(value)); }

void CsvHeader::write(std::ostream& os) const {
  for (const auto& [k, v] : entries_) os << "# " << k << " = " << v << '\n';
}

void write_snapshots(std::ostream& os, const CsvHeader& header, const std::vector<double>& times,
                     const std::vector<LagrangianState>& states) {
  if (times.size() != states.size()) throw std::invalid_argument("snapshot times and states differ in length");
  header.write(os);
  const std::size_t nodes = states.empty() ? 0 : states.front().nodes();
  os << 't';
  for (std::size_t k = 0; k < nodes; ++k) os << ",x" << k;
  os << '\n';
  for (std::size_t i = 0; i < states.size(); ++i) {
    os << format_double(times[i]);
    for (double x : states[i].positions()) os << ',' << format_double(x);
    os << '\n';
  }
}

void write_densities(std::ostream& os, const CsvHeader& header, const std::vector<double>& times,
                     const std::vector<LagrangianState>& states) {
  if (times.size() != states.size()) throw std::invalid_argument("snapshot times and states differ in length");
  header.write(os);
  os << "t,cell_index,x_left,x_right,z\n";
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto z = states[i].cell_densities();
    for (std::size_t j = 0; j < z.size(); ++j)
      os << fmt::format("{},{},{},{},{}\n", format_double(times[i]), j, format_double(states[i][j]),
                        format_double(states[i][j + 1]), format_double(z[j]));
  }
}

void write_timeseries(std::ostream& os, const CsvHeader& header, const std::vector<TimeseriesRow>& rows) {
  header.write(os);
  os << "t,H,F,H_gap,F_gap,L1_err,newton_iters,residual\n";
  for (const auto& r : rows)
    os << fmt::format("{},{},{},{},{},{},{},{}\n", format_double(r.t), format_double(r.entropy),
                      format_double(r.information), format_double(r.entropy_gap), format_double(r.information_gap),
                      format_double(r.l1_error), r.newton_iterations, format_double(r.residual));
}

void write_convergence(std::ostream& os, const CsvHeader& header, const std::vector<ConvergenceRow>& rows) {
  header.write(os);
  os << "K,L1,L2,Linf,H_gap\n";
  for (const auto& r : rows)
    os << fmt::format("{},{},{},{},{}\n", r.cells, format_double(r.l1), format_double(r.l2), format_double(r.linf),
                      format_double(r.entropy_gap));
}

void write_selfsim(std::ostream& os, const CsvHeader& header, const std::vector<SelfSimilarRow>& rows) {
  header.write(os);
  os << "n,t_hat,S,max_coord_dev,L1_dev,R_delta\n";
  for (const auto& r : rows)
    os << fmt::format("{},{},{},{},{},{}\n", r.step, format_double(r.scaled_time), format_double(r.growth),
                      format_double(r.max_coordinate_deviation), format_double(r.l1_deviation),
                      format_double(r.decay_factor));
}

std::vector<double> read_numbers(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot read '{}'", path));
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& c : line)
      if (c == ',' || c == ';' || c == '\t') c = ' ';
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) throw std::runtime_error(fmt::format("'{}': not a number: '{}'", path, tok));
      out.push_back(v);
    }
  }
  return out;
}

}  // namespace lagflow
