#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lagflow/mass_mesh.hpp"

namespace lagflow::cli {

enum ExitCode : int { kSuccess = 0, kConfigError = 2, kSolverFailure = 3 };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raw settings as given; unset fields take per-command defaults.
struct RunConfig {
  std::optional<std::string> command;
  std::optional<double> alpha;
  std::optional<double> lambda;
  std::optional<std::size_t> cells;
  std::optional<double> tau;
  std::optional<double> t_end;
  std::optional<double> s_end;
  std::optional<std::string> initial;
  std::optional<std::string> grid;
  std::optional<std::string> output;
  std::optional<std::size_t> stride;
  std::optional<std::vector<std::size_t>> cell_list;
};

/// Applies one `key = value` setting. Unknown keys and malformed values throw ConfigError.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);
/// Parses the text of a config file into cfg.
void parse_config_text(RunConfig& cfg, const std::string& text);
void parse_config_file(RunConfig& cfg, const std::string& path);

/// Fully specified, validated configuration.
struct ResolvedConfig {
  std::string command;
  double alpha = 1.0;
  double lambda = 5.0;
  std::size_t cells = 50;
  double tau = 1e-3;
  double t_end = 0.8;
  double s_end = 100.0;
  std::string initial = "sine";
  std::string grid = "uniform";
  std::string output = ".";
  std::size_t stride = 10;
  std::vector<std::size_t> cell_list{25, 50, 100, 200, 400};
};

ResolvedConfig resolve(const RunConfig& cfg);

/// Builds the mass grid selected by the config.
GridPtr make_grid(const ResolvedConfig& cfg);
/// Builds the initial state selected by the config on the given grid.
LagrangianState make_initial_state(const ResolvedConfig& cfg, const GridPtr& grid);

/// Runs a resolved configuration, writing files to cfg.output. Returns an exit code.
int run(const ResolvedConfig& cfg, std::ostream& log);

int main(int argc, char** argv);

}  // namespace lagflow::cli
