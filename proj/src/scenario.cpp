#include "bbp/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "bbp/error.hpp"

namespace bbp {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!keys.count(key)) throw ScenarioError(path, "unknown key \"" + key + "\"");
  }
}

const json& require(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) throw ScenarioError(path, std::string("missing required key \"") + key + "\"");
  return obj.at(key);
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ScenarioError(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ScenarioError(path, "expected a finite number");
  return x;
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ScenarioError(path, "expected an integer");
  return v.get<int>();
}

Complex as_complex(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) throw ScenarioError(path, "complex values are [re, im] pairs");
  return {as_number(v[0], path + "[0]"), as_number(v[1], path + "[1]")};
}

std::vector<Complex> as_complex_list(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ScenarioError(path, "expected a non-empty list of [re, im] pairs");
  std::vector<Complex> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_complex(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<double> as_number_list(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ScenarioError(path, "expected a non-empty list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

StateSpec parse_state(const json& v, const std::string& path) {
  if (!v.is_object()) throw ScenarioError(path, "expected an object");
  const json& kind_value = require(v, path, "kind");
  if (!kind_value.is_string()) throw ScenarioError(path + ".kind", "expected a string");
  const std::string kind = kind_value.get<std::string>();
  StateSpec spec;
  if (kind == "vacuum") {
    reject_unknown(v, path, {"kind"});
  } else if (kind == "fock") {
    reject_unknown(v, path, {"kind", "occupations"});
    const json& occ = require(v, path, "occupations");
    if (!occ.is_array() || occ.empty()) throw ScenarioError(path + ".occupations", "expected a non-empty list");
    std::vector<int> n;
    for (std::size_t i = 0; i < occ.size(); ++i) {
      const std::string p = path + ".occupations[" + std::to_string(i) + "]";
      const int k = as_int(occ[i], p);
      if (k < 0) throw ScenarioError(p, "occupation numbers must be >= 0");
      n.push_back(k);
    }
    spec = StateSpec::fock(std::move(n));
  } else if (kind == "coherent") {
    reject_unknown(v, path, {"kind", "amplitudes"});
    spec = StateSpec::coherent(as_complex_list(require(v, path, "amplitudes"), path + ".amplitudes"));
  } else if (kind == "coherent_superposition") {
    reject_unknown(v, path, {"kind", "terms"});
    const json& terms = require(v, path, "terms");
    if (!terms.is_array() || terms.empty()) throw ScenarioError(path + ".terms", "expected a non-empty list");
    std::vector<CoherentTerm> out;
    bool any = false;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const std::string p = path + ".terms[" + std::to_string(i) + "]";
      if (!terms[i].is_object()) throw ScenarioError(p, "expected an object");
      reject_unknown(terms[i], p, {"coefficient", "amplitudes"});
      CoherentTerm t;
      t.coefficient = as_complex(require(terms[i], p, "coefficient"), p + ".coefficient");
      t.amplitudes = as_complex_list(require(terms[i], p, "amplitudes"), p + ".amplitudes");
      any = any || t.coefficient != Complex(0.0);
      out.push_back(std::move(t));
    }
    if (!any) throw ScenarioError(path + ".terms", "superposition coefficients are all zero");
    spec = StateSpec::superposition(std::move(out));
  } else if (kind == "product") {
    reject_unknown(v, path, {"kind", "factors"});
    const json& factors = require(v, path, "factors");
    if (!factors.is_array() || factors.empty()) throw ScenarioError(path + ".factors", "expected a non-empty list");
    std::vector<StateSpec> out;
    for (std::size_t i = 0; i < factors.size(); ++i) {
      out.push_back(parse_state(factors[i], path + ".factors[" + std::to_string(i) + "]"));
    }
    spec = StateSpec::product(std::move(out));
  } else {
    throw ScenarioError(path + ".kind", "unknown state kind \"" + kind + "\"");
  }
  try {
    spec.validate();
  } catch (const DomainError& e) {
    throw ScenarioError(path, e.what());
  }
  return spec;
}

GridSpec parse_grid(const json& v, const std::string& path) {
  GridSpec grid;
  if (v.is_string()) {
    if (v.get<std::string>() != "auto") throw ScenarioError(path, "expected \"auto\" or an object");
    return grid;
  }
  if (!v.is_object()) throw ScenarioError(path, "expected \"auto\" or an object");
  reject_unknown(v, path, {"points", "half_width", "min", "max"});
  if (v.contains("points")) {
    grid.points = as_int(v["points"], path + ".points");
    if (grid.points < 2) throw ScenarioError(path + ".points", "need at least two grid points");
  }
  const bool has_min = v.contains("min");
  const bool has_max = v.contains("max");
  if (has_min != has_max) throw ScenarioError(path, "explicit grids need both min and max");
  if (has_min) {
    if (v.contains("half_width")) throw ScenarioError(path, "half_width applies to automatic grids only");
    grid.automatic = false;
    grid.min = as_number(v["min"], path + ".min");
    grid.max = as_number(v["max"], path + ".max");
    if (!(grid.max > grid.min)) throw ScenarioError(path, "grid max must exceed min");
  } else if (v.contains("half_width")) {
    grid.half_width = as_number(v["half_width"], path + ".half_width");
    if (!(grid.half_width > 0.0)) throw ScenarioError(path + ".half_width", "must be > 0");
  }
  return grid;
}

std::string format17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + file.string());
}

}  // namespace

QuadratureSpec Scenario::quadrature() const { return QuadratureSpec{alpha, weights, deltas.empty() ? 0.0 : deltas[0]}; }

bool Scenario::wants(const std::string& output) const {
  return std::find(outputs.begin(), outputs.end(), output) != outputs.end();
}

Scenario parse_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError("$", std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) throw ScenarioError("$", "scenario must be a JSON object");
  reject_unknown(root, "$", {"name", "signal_modes", "weights", "alpha", "state", "deltas", "total_cutoff", "grid",
                             "outputs", "max_order", "outcome_path"});
  Scenario s;
  if (root.contains("name")) {
    if (!root["name"].is_string()) throw ScenarioError("$.name", "expected a string");
    s.name = root["name"].get<std::string>();
  }
  s.signal_modes = as_int(require(root, "$", "signal_modes"), "$.signal_modes");
  if (s.signal_modes < 1) throw ScenarioError("$.signal_modes", "need at least one signal mode");

  s.weights = as_number_list(require(root, "$", "weights"), "$.weights");
  if (static_cast<int>(s.weights.size()) != s.signal_modes) {
    throw ScenarioError("$.weights", "expected one weight per signal mode");
  }
  for (std::size_t i = 0; i < s.weights.size(); ++i) {
    if (!(s.weights[i] > 0.0)) throw ScenarioError("$.weights[" + std::to_string(i) + "]", "weights strictly positive");
  }

  s.alpha = as_complex_list(require(root, "$", "alpha"), "$.alpha");
  if (static_cast<int>(s.alpha.size()) != s.signal_modes) {
    throw ScenarioError("$.alpha", "expected one amplitude per signal mode");
  }
  if (std::all_of(s.alpha.begin(), s.alpha.end(), [](Complex a) { return a == Complex(0.0); })) {
    throw ScenarioError("$.alpha", "alpha must not be all zero");
  }

  s.state = root.contains("state") ? parse_state(root["state"], "$.state") : StateSpec::vacuum();
  if (s.state.width() > s.signal_modes) {
    throw ScenarioError("$.state", "state addresses " + std::to_string(s.state.width()) + " modes but there are " +
                                       std::to_string(s.signal_modes) + " signal modes");
  }

  s.deltas = as_number_list(require(root, "$", "deltas"), "$.deltas");
  for (std::size_t i = 0; i < s.deltas.size(); ++i) {
    const std::string p = "$.deltas[" + std::to_string(i) + "]";
    if (!(s.deltas[i] > 0.0)) throw ScenarioError(p, "deltas must be strictly positive");
    if (i > 0 && !(s.deltas[i] < s.deltas[i - 1])) throw ScenarioError(p, "deltas must be strictly decreasing");
  }

  if (root.contains("total_cutoff")) {
    s.total_cutoff = as_int(root["total_cutoff"], "$.total_cutoff");
    if (s.total_cutoff < 1) throw ScenarioError("$.total_cutoff", "must be >= 1");
  }
  if (root.contains("grid")) s.grid = parse_grid(root["grid"], "$.grid");
  if (root.contains("max_order")) {
    s.max_order = as_int(root["max_order"], "$.max_order");
    if (s.max_order < 2 || s.max_order > kDefaultMomentBudget) {
      throw ScenarioError("$.max_order", "must be in 2.." + std::to_string(kDefaultMomentBudget));
    }
  }
  if (root.contains("outcome_path")) {
    const json& p = root["outcome_path"];
    const std::string name = p.is_string() ? p.get<std::string>() : "";
    if (name == "automatic") {
      s.outcome_path = OutcomePath::automatic;
    } else if (name == "spectral") {
      s.outcome_path = OutcomePath::spectral;
    } else if (name == "lattice") {
      s.outcome_path = OutcomePath::lattice;
      if (s.signal_modes != 1) throw ScenarioError("$.outcome_path", "the lattice path needs one signal mode");
    } else {
      throw ScenarioError("$.outcome_path", "expected \"automatic\", \"spectral\" or \"lattice\"");
    }
  }
  if (root.contains("outputs")) {
    const json& o = root["outputs"];
    if (!o.is_array()) throw ScenarioError("$.outputs", "expected a list");
    static const std::set<std::string> known{"distributions", "ideal_pdf", "report", "plotdata_cdf"};
    s.outputs.clear();
    for (std::size_t i = 0; i < o.size(); ++i) {
      const std::string p = "$.outputs[" + std::to_string(i) + "]";
      if (!o[i].is_string() || !known.count(o[i].get<std::string>())) {
        throw ScenarioError(p, "unknown output; expected distributions, ideal_pdf, report or plotdata_cdf");
      }
      s.outputs.push_back(o[i].get<std::string>());
    }
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string delta_label(double delta) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, delta);
  return std::string(buf, res.ptr);
}

void write_distribution_csv(const std::filesystem::path& file, const MeasurementDistribution& dist) {
  std::string text = "value,probability\n";
  for (const auto& p : dist.points) text += format17(p.value) + "," + format17(p.probability) + "\n";
  write_text(file, text);
}

std::string report_json(const Scenario& scenario, const ConvergenceReport& report, std::size_t dimension) {
  json root;
  root["scenario"] = scenario.name;
  json spec;
  spec["signal_modes"] = scenario.signal_modes;
  spec["weights"] = scenario.weights;
  json alpha = json::array();
  for (const auto& a : scenario.alpha) alpha.push_back(complex_json(a));
  spec["alpha"] = alpha;
  spec["scale"] = report.spec.scale();
  spec["normalized"] = report.spec.is_normalized();
  root["quadrature"] = spec;
  root["total_cutoff"] = scenario.total_cutoff;
  root["dimension"] = dimension;
  root["outcome_path"] = report.outcome_path;

  const auto& panel = default_panel();
  json records = json::array();
  for (const auto& rec : report.records) {
    json r;
    r["delta"] = rec.delta;
    r["mean"] = rec.mean;
    r["ideal_mean"] = rec.ideal_mean;
    r["variance"] = rec.variance;
    r["ideal_variance"] = rec.ideal_variance;
    r["variance_excess"] = rec.variance - rec.ideal_variance;
    r["predicted_bias"] = rec.predicted_bias;
    r["truncation_tail"] = rec.truncation_tail;
    json moments = json::array();
    json residuals = json::object();
    for (const auto& m : rec.moments) {
      moments.push_back({{"order", m.order},
                         {"distribution", m.distribution},
                         {"operator", m.operator_value},
                         {"ideal", m.ideal},
                         {"residual", m.residual},
                         {"contaminated", m.contaminated}});
      residuals["r_" + std::to_string(m.order)] = m.residual;
    }
    r["moments"] = moments;
    r["residuals"] = residuals;
    if (rec.kolmogorov_distance) r["kolmogorov_distance"] = *rec.kolmogorov_distance;
    if (!rec.panel_gaps.empty()) {
      json gaps = json::object();
      for (std::size_t k = 0; k < rec.panel_gaps.size() && k < panel.size(); ++k) gaps[panel[k].name] = rec.panel_gaps[k];
      r["panel_gaps"] = gaps;
    }
    records.push_back(r);
  }
  root["records"] = records;
  json exponents = json::object();
  for (const auto& [order, fit] : report.exponents) {
    json e;
    e["exact_to_precision"] = fit.exact;
    if (fit.exact) {
      e["exponent"] = nullptr;
    } else {
      e["exponent"] = fit.exponent;
    }
    exponents[std::to_string(order)] = e;
  }
  root["exponents"] = exponents;
  json flags = json::object();
  for (const auto& [name, ok] : report.flags) flags[name] = ok;
  root["flags"] = flags;
  return root.dump(2) + "\n";
}

std::optional<std::vector<double>> scenario_grid(const Scenario& scenario, const DensityOperator& state) {
  const GridSpec& g = scenario.grid;
  if (!g.automatic) {
    std::vector<double> grid(static_cast<std::size_t>(g.points));
    for (int i = 0; i < g.points; ++i) grid[static_cast<std::size_t>(i)] = g.min + (g.max - g.min) * i / (g.points - 1);
    return grid;
  }
  if (g.points == kDefaultGridPoints && g.half_width == kDefaultGridHalfWidth) return std::nullopt;
  const TargetModeFrame frame = target_mode_frame(scenario.quadrature());
  return default_grid(rotate_to_target_mode(state, frame).matrix(), frame.scale, g.points, g.half_width);
}

void write_ideal_pdf_csv(const std::filesystem::path& file, const QuadraturePdf& pdf) {
  const std::vector<double> cdf = ideal_cdf(pdf);
  std::string text = "y,pdf,cdf\n";
  for (std::size_t i = 0; i < pdf.grid.size(); ++i) {
    text += format17(pdf.grid[i]) + "," + format17(pdf.values[i]) + "," + format17(cdf[i]) + "\n";
  }
  write_text(file, text);
}

BasisPtr scenario_basis(const Scenario& scenario) { return build_basis(2 * scenario.signal_modes, scenario.total_cutoff); }

RunResult run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir) {
  RunResult result;
  auto fail = [&](int code, const std::string& message) {
    for (const auto& f : result.written) {
      std::error_code ec;
      std::filesystem::remove(f, ec);
    }
    result.written.clear();
    result.exit_code = code;
    result.message = message;
    return result;
  };
  try {
    std::filesystem::create_directories(out_dir);
    const BasisPtr basis = scenario_basis(scenario);
    const DensityOperator state = build_state(basis, scenario.state);
    const QuadratureSpec spec = scenario.quadrature();

    AnalysisOptions options;
    options.max_order = scenario.max_order;
    options.path = scenario.outcome_path;
    options.grid = scenario_grid(scenario, state);

    std::vector<std::pair<double, MeasurementDistribution>> dists;
    auto sink = [&](double delta, const MeasurementDistribution& d) { dists.emplace_back(delta, d); };
    QuadraturePdf pdf;
    const ConvergenceReport report = analyze_convergence(state, spec, scenario.deltas, options, sink, &pdf);

    if (scenario.wants("distributions")) {
      for (const auto& [delta, d] : dists) {
        const auto file = out_dir / ("distribution_delta=" + delta_label(delta) + ".csv");
        write_distribution_csv(file, d);
        result.written.push_back(file);
      }
    }
    const std::vector<double> cdf = ideal_cdf(pdf);
    if (scenario.wants("ideal_pdf")) {
      const auto file = out_dir / "ideal_pdf.csv";
      write_ideal_pdf_csv(file, pdf);
      result.written.push_back(file);
    }
    if (scenario.wants("plotdata_cdf")) {
      std::string text = "y,ideal";
      for (const auto& entry : dists) text += ",delta=" + delta_label(entry.first);
      text += "\n";
      std::vector<std::size_t> cursor(dists.size(), 0);
      std::vector<double> running(dists.size(), 0.0);
      for (std::size_t i = 0; i < pdf.grid.size(); ++i) {
        const double y = pdf.grid[i];
        text += format17(y) + "," + format17(cdf[i]);
        for (std::size_t k = 0; k < dists.size(); ++k) {
          const auto& pts = dists[k].second.points;
          while (cursor[k] < pts.size() && pts[cursor[k]].value <= y) running[k] += pts[cursor[k]++].probability;
          text += "," + format17(running[k]);
        }
        text += "\n";
      }
      const auto file = out_dir / "plotdata_cdf.csv";
      write_text(file, text);
      result.written.push_back(file);
    }
    if (scenario.wants("report")) {
      const auto file = out_dir / "report.json";
      write_text(file, report_json(scenario, report, basis->size()));
      result.written.push_back(file);
    }
    result.message = "wrote " + std::to_string(result.written.size()) + " files to " + out_dir.string();
    return result;
  } catch (const TruncationError& e) {
    return fail(kExitTruncation, e.what());
  } catch (const CapacityError& e) {
    return fail(kExitTruncation, e.what());
  } catch (const DomainError& e) {
    return fail(kExitValidation, e.what());
  } catch (const BasisMismatch& e) {
    return fail(kExitValidation, e.what());
  } catch (const ScenarioError& e) {
    return fail(kExitValidation, e.what());
  }
}

}  // namespace bbp
