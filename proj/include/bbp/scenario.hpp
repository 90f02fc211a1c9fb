#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bbp/convergence.hpp"
#include "bbp/state_factory.hpp"

namespace bbp {

/// Schema violation; the message starts with the JSON path of the offending value.
class ScenarioError : public std::invalid_argument {
 public:
  ScenarioError(const std::string& path, const std::string& what) : std::invalid_argument(path + ": " + what) {}
};

struct GridSpec {
  bool automatic = true;
  int points = kDefaultGridPoints;
  double half_width = kDefaultGridHalfWidth;  // standard deviations, automatic grids only
  double min = 0.0;                           // explicit grids only
  double max = 0.0;
};

struct Scenario {
  std::string name;
  int signal_modes = 1;
  std::vector<double> weights;
  std::vector<Complex> alpha;
  StateSpec state;
  std::vector<double> deltas;
  int total_cutoff = 25;
  GridSpec grid;
  int max_order = 4;
  OutcomePath outcome_path = OutcomePath::automatic;
  std::vector<std::string> outputs{"distributions", "ideal_pdf", "report", "plotdata_cdf"};

  QuadratureSpec quadrature() const;
  bool wants(const std::string& output) const;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitTruncation = 3;

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& file);

/// The value part of distribution_delta=<value>.csv: shortest decimal that
/// round-trips the double.
std::string delta_label(double delta);

/// Writes "value,probability" rows with 17 significant digits.
void write_distribution_csv(const std::filesystem::path& file, const MeasurementDistribution& dist);

/// Writes "y,pdf,cdf" rows.
void write_ideal_pdf_csv(const std::filesystem::path& file, const QuadraturePdf& pdf);

/// Canonical JSON form of a run report.
std::string report_json(const Scenario& scenario, const ConvergenceReport& report, std::size_t dimension);

struct RunResult {
  int exit_code = kExitOk;
  std::string message;
  std::vector<std::filesystem::path> written;
};

/// Executes the scenario and writes the requested files into `out_dir`.
/// Exit codes: 0 success, 2 validation failure, 3 truncation-budget failure.
/// On failure every file written so far is removed.
RunResult run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir);

/// Builds the joint basis and state of a scenario.
BasisPtr scenario_basis(const Scenario& scenario);

/// Ideal-pdf grid requested by the scenario; nullopt means the default grid.
std::optional<std::vector<double>> scenario_grid(const Scenario& scenario, const DensityOperator& state);

}  // namespace bbp
