#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "bbp/acceptance.hpp"
#include "bbp/bbp_measurement.hpp"
#include "bbp/error.hpp"
#include "bbp/scenario.hpp"

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitNoInput = 66;

namespace fs = std::filesystem;

// Vacuum or a product coherent state, padded to one amplitude per signal mode.
std::vector<bbp::Complex> coherent_amplitudes(const bbp::Scenario& s) {
  std::vector<bbp::Complex> gamma(static_cast<std::size_t>(s.signal_modes), 0.0);
  if (s.state.kind == bbp::StateSpec::Kind::vacuum) return gamma;
  if (s.state.kind != bbp::StateSpec::Kind::coherent) {
    throw bbp::ScenarioError("$.state.kind", "the skellam oracle needs a coherent or vacuum state");
  }
  std::copy(s.state.amplitudes.begin(), s.state.amplitudes.end(), gamma.begin());
  return gamma;
}

int run_oracle(const bbp::Scenario& s, const std::string& kind, const fs::path& out) {
  fs::create_directories(out);
  const bbp::BasisPtr basis = bbp::scenario_basis(s);
  if (kind == "hermite") {
    const bbp::DensityOperator state = bbp::build_state(basis, s.state);
    const auto pdf = bbp::ideal_pdf(state, s.quadrature(), bbp::scenario_grid(s, state));
    const fs::path file = out / "oracle_hermite.csv";
    bbp::write_ideal_pdf_csv(file, pdf);
    std::cout << file.string() << "\n";
    return bbp::kExitOk;
  }
  std::vector<bbp::Complex> gamma;
  if (kind == "skellam") gamma = coherent_amplitudes(s);
  for (double delta : s.deltas) {
    const bbp::QuadratureSpec spec = s.quadrature().with_delta(delta);
    const bbp::MeasurementDistribution d = kind == "skellam"
                                               ? bbp::skellam_oracle_distribution(gamma, spec)
                                               : bbp::explicit_lo_distribution(s.state, spec, basis);
    const fs::path file = out / ("oracle_" + kind + "_delta=" + bbp::delta_label(delta) + ".csv");
    bbp::write_distribution_csv(file, d);
    std::cout << file.string() << "\n";
  }
  return bbp::kExitOk;
}

bool load(const std::string& path, bbp::Scenario& s, int& code) {
  if (!fs::is_regular_file(path)) {
    std::cerr << "bbp: config file not found: " << path << "\n";
    code = kExitNoInput;
    return false;
  }
  try {
    s = bbp::load_scenario(path);
  } catch (const bbp::ScenarioError& e) {
    std::cerr << "bbp: " << path << ": " << e.what() << "\n";
    code = bbp::kExitValidation;
    return false;
  } catch (const std::runtime_error& e) {
    std::cerr << "bbp: " << e.what() << "\n";
    code = kExitNoInput;
    return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-amplitude local-oscillator homodyne simulator"};
  app.name("bbp");
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "Run a scenario and write distributions, ideal pdf, report and plot data");
  run->add_option("--config", config, "Scenario JSON file")->required();
  run->add_option("--out", out_dir, "Output directory")->required();

  bool fast = false;
  auto* check = app.add_subcommand("check", "Run the built-in acceptance suite");
  check->add_flag("--fast", fast, "Only criteria with N_max <= 20");

  std::string kind;
  std::string oracle_out = ".";
  auto* oracle = app.add_subcommand("oracle", "Run a single oracle path");
  oracle->add_option("--kind", kind, "Oracle path")->required()->check(CLI::IsMember({"skellam", "explicit-lo", "hermite"}));
  oracle->add_option("--config", config, "Scenario JSON file")->required();
  oracle->add_option("--out", oracle_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "bbp: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*check) {
      bbp::AcceptanceOptions options;
      options.fast = fast;
      options.on_result = [](const bbp::CriterionResult& r) { std::cout << bbp::format_result(r) << std::endl; };
      const auto results = bbp::run_acceptance(options);
      std::size_t passed = 0;
      for (const auto& r : results) passed += r.passed ? 1 : 0;
      std::cout << passed << "/" << results.size() << " criteria passed\n";
      return passed == results.size() ? 0 : 1;
    }

    bbp::Scenario s;
    int code = 0;
    if (!load(config, s, code)) return code;

    if (*run) {
      const bbp::RunResult r = bbp::run_scenario(s, out_dir);
      (r.exit_code == 0 ? std::cout : std::cerr) << "bbp: " << r.message << "\n";
      return r.exit_code;
    }
    return run_oracle(s, kind, oracle_out);
  } catch (const bbp::TruncationError& e) {
    std::cerr << "bbp: " << e.what() << "\n";
    return bbp::kExitTruncation;
  } catch (const bbp::CapacityError& e) {
    std::cerr << "bbp: " << e.what() << "\n";
    return bbp::kExitTruncation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "bbp: " << e.what() << "\n";
    return bbp::kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "bbp: " << e.what() << "\n";
    return 1;
  }
}
