#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sparsedoa/correlation.hpp"
#include "sparsedoa/estimators.hpp"
#include "sparsedoa/evaluation.hpp"
#include "sparsedoa/geometry.hpp"
#include "sparsedoa/runconfig.hpp"
#include "sparsedoa/simulate.hpp"
#include "sparsedoa/textio.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sparsedoa;

namespace {

struct ScenarioFlags {
  std::string geometry_spec;
  std::vector<std::string> source_flags;
  int snapshots = 100;
  double noise_power = 1.0;
  std::uint64_t seed = 1;
};

void add_scenario_flags(CLI::App* cmd, ScenarioFlags& flags) {
  cmd->add_option("--geometry", flags.geometry_spec,
                  "Array spec: coprime:ME,N,NE,M | nested:ME,NE | ula:L | "
                  "sirna:M,N | sirca:M")
      ->required();
  cmd->add_option("--source", flags.source_flags,
                  "Source: linear ux[,power]; planar ux,uy[,power] (repeatable)");
  cmd->add_option("--snapshots", flags.snapshots, "Snapshot count")
      ->capture_default_str();
  cmd->add_option("--noise-power", flags.noise_power, "Noise power")
      ->capture_default_str();
  cmd->add_option("--seed", flags.seed, "Master RNG seed")->capture_default_str();
}

std::vector<double> split_numbers(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    const auto token =
        text.substr(start, comma == std::string::npos ? std::string::npos
                                                      : comma - start);
    char* end = nullptr;
    const double value = std::strtod(token.c_str(), &end);
    if (token.empty() || end != token.c_str() + token.size())
      throw std::invalid_argument("bad numeric component '" + token + "' in '" +
                                  text + "'");
    out.push_back(value);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

Scenario build_scenario(const ScenarioFlags& flags, GeometryChoice& choice,
                        std::string* warning) {
  choice = parse_geometry_spec(flags.geometry_spec, warning);
  const bool planar = std::holds_alternative<PlanarArrayGeometry>(choice);
  Scenario scenario;
  if (planar)
    scenario.geometry = std::get<PlanarArrayGeometry>(choice);
  else
    scenario.geometry = std::get<LinearArrayGeometry>(choice);
  for (const auto& text : flags.source_flags) {
    auto parts = split_numbers(text);
    SourceSpec source;
    if (planar) {
      if (parts.size() < 2 || parts.size() > 3)
        throw std::invalid_argument("planar source '" + text +
                                    "' needs ux,uy[,power]");
      source.ux = parts[0];
      source.uy = parts[1];
      source.power = parts.size() == 3 ? parts[2] : 1.0;
    } else {
      if (parts.empty() || parts.size() > 2)
        throw std::invalid_argument("linear source '" + text + "' needs ux[,power]");
      source.ux = parts[0];
      source.power = parts.size() == 2 ? parts[1] : 1.0;
    }
    scenario.sources.push_back(source);
  }
  scenario.noise_power = flags.noise_power;
  scenario.snapshots = flags.snapshots;
  scenario.seed = flags.seed;
  scenario.validate(true);
  return scenario;
}

json scenario_json(const ScenarioFlags& flags, const Scenario& scenario) {
  json j;
  j["geometry"] = flags.geometry_spec;
  auto sources = json::array();
  for (const auto& s : scenario.sources)
    sources.push_back(json::array({s.ux, s.uy, s.power}));
  j["sources"] = sources;
  j["noise-power"] = scenario.noise_power;
  j["snapshots"] = scenario.snapshots;
  j["seed"] = scenario.seed;
  return j;
}

fs::path resolve_output_dir(const std::string& flag_value,
                            const std::string& config_value = {}) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("SPARSEDOA_OUTPUT_DIR"); env && *env) return env;
  if (!config_value.empty()) return config_value;
  return ".";
}

void write_output(const fs::path& dir, const std::string& name,
                  const std::string& body) {
  fs::create_directories(dir);
  atomic_write_file(dir / name, body);
  std::cout << "wrote " << (dir / name).string() << "\n";
}

const char* construction_tag(CorrelationConstruction construction) {
  switch (construction) {
    case CorrelationConstruction::kLinearToeplitz: return "toeplitz";
    case CorrelationConstruction::kPlanarBlock: return "planar-block";
    case CorrelationConstruction::kRowAveraged: return "row-averaged";
    case CorrelationConstruction::kColumnAveraged: return "column-averaged";
  }
  return "unknown";
}

std::string matrix_csv(const CorrelationEstimate& estimate) {
  std::string body;
  for (int row = 0; row < estimate.dimension; ++row) {
    std::vector<std::string> cells;
    cells.reserve(2 * estimate.dimension);
    for (int col = 0; col < estimate.dimension; ++col) {
      const auto z = estimate.at(row, col);
      cells.push_back(format_double(z.real()));
      cells.push_back(format_double(z.imag()));
    }
    body += csv_line(cells) + "\n";
  }
  return body;
}

json lag_counts_json(const CorrelationEstimate& estimate) {
  auto counts = json::array();
  for (const auto& [lag, count] : estimate.lag_counts)
    counts.push_back(json::array({lag.first, lag.second, count}));
  return counts;
}

json grid_json(const Grid& grid) {
  return json{{"start", grid.start}, {"step", grid.step}, {"count", grid.count}};
}

Method method_from_name(const std::string& name) {
  return name == "music" ? Method::kMusic : Method::kMnm;
}

std::string metric_csv(const MetricCurve& curve) {
  std::string body = "sweep_value,algorithm,value,stderr,trials\n";
  for (std::size_t si = 0; si < curve.sweep_values.size(); ++si)
    for (const auto& series : curve.series)
      body += csv_line({format_double(curve.sweep_values[si]),
                        method_name(series.method), format_double(series.values[si]),
                        format_double(series.stderrs[si]),
                        std::to_string(curve.trials)}) +
              "\n";
  return body;
}

int run_geometry(const std::string& spec, const std::string& format) {
  std::string warning;
  auto choice = parse_geometry_spec(spec, &warning);
  if (format == "csv") {
    if (std::holds_alternative<LinearArrayGeometry>(choice)) {
      for (int k : std::get<LinearArrayGeometry>(choice).positions)
        std::cout << k << "\n";
    } else {
      for (const auto& p : std::get<PlanarArrayGeometry>(choice).positions)
        std::cout << p[0] << "," << p[1] << "\n";
    }
    return 0;
  }
  json j;
  j["spec"] = spec;
  if (std::holds_alternative<LinearArrayGeometry>(choice)) {
    const auto& g = std::get<LinearArrayGeometry>(choice);
    j["positions"] = g.positions;
    j["aperture"] = g.aperture();
    j["equivalent_ula_size"] = g.equivalent_ula_size();
    const auto coarray = difference_coarray(g.positions);
    j["coarray"] = {{"lags", coarray.lags},
                    {"weights", coarray.weights},
                    {"contiguous_len", coarray.contiguous_len}};
  } else {
    const auto& g = std::get<PlanarArrayGeometry>(choice);
    j["sensor_count"] = g.sensor_count();
    j["beta"] = g.beta;
    auto positions = json::array();
    for (const auto& p : g.positions) positions.push_back(json::array({p[0], p[1]}));
    j["positions"] = positions;
    j["contiguous_halfwidth"] = g.contiguous_halfwidth();
    const int side = g.contiguous_halfwidth() + 1;
    j["block_dimension"] = side * side;
  }
  if (!warning.empty()) j["warning"] = warning;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int run_simulate(const ScenarioFlags& flags, const std::string& output_dir) {
  GeometryChoice choice;
  std::string warning;
  const auto scenario = build_scenario(flags, choice, &warning);
  const auto data = generate_snapshots(scenario);

  std::string body;
  for (int q = 0; q < data.snapshots; ++q) {
    std::vector<std::string> cells;
    cells.reserve(2 * data.sensor_count);
    for (int s = 0; s < data.sensor_count; ++s) {
      const auto z = data.at(s, q);
      cells.push_back(format_double(z.real()));
      cells.push_back(format_double(z.imag()));
    }
    body += csv_line(cells) + "\n";
  }

  json sidecar;
  sidecar["scenario"] = scenario_json(flags, scenario);
  sidecar["rows"] = data.snapshots;
  sidecar["columns"] = 2 * data.sensor_count;
  sidecar["layout"] = "row per snapshot; per sensor re,im in position order";
  if (!warning.empty()) sidecar["warning"] = warning;

  const auto dir = resolve_output_dir(output_dir);
  write_output(dir, "snapshots.csv", body);
  write_output(dir, "snapshots.json", sidecar.dump(2) + "\n");
  return 0;
}

int run_correlate(const ScenarioFlags& flags, const std::string& construction,
                  int lag_count, const std::string& output_dir) {
  GeometryChoice choice;
  std::string warning;
  const auto scenario = build_scenario(flags, choice, &warning);
  const auto data = generate_snapshots(scenario);
  const bool planar = std::holds_alternative<PlanarArrayGeometry>(choice);

  std::string mode = construction;
  if (mode == "auto") mode = planar ? "block" : "toeplitz";
  if (!planar && mode != "toeplitz")
    throw std::invalid_argument("construction '" + mode +
                                "' needs a planar geometry");
  if (planar && mode == "toeplitz")
    throw std::invalid_argument("toeplitz construction needs a linear geometry");

  CorrelationEstimate estimate;
  int used_lag_count = 0;
  if (mode == "toeplitz") {
    const auto& geometry = std::get<LinearArrayGeometry>(choice);
    used_lag_count = lag_count > 0
                         ? lag_count
                         : difference_coarray(geometry.positions).contiguous_len;
    estimate = toeplitz_correlation(lag_estimates(data, geometry, used_lag_count));
  } else if (mode == "block") {
    estimate = planar_block_correlation(data, std::get<PlanarArrayGeometry>(choice));
  } else {
    estimate = axis_averaged_correlation(data, std::get<PlanarArrayGeometry>(choice),
                                         mode == "axis-x" ? Axis::kX : Axis::kY);
  }

  json sidecar;
  sidecar["scenario"] = scenario_json(flags, scenario);
  sidecar["dimension"] = estimate.dimension;
  sidecar["construction"] = construction_tag(estimate.construction);
  if (mode == "toeplitz") sidecar["lag-count"] = used_lag_count;
  sidecar["lag_counts"] = lag_counts_json(estimate);
  sidecar["layout"] = "row per matrix row; per column re,im";
  if (!warning.empty()) sidecar["warning"] = warning;

  const auto dir = resolve_output_dir(output_dir);
  write_output(dir, "correlation.csv", matrix_csv(estimate));
  write_output(dir, "correlation.json", sidecar.dump(2) + "\n");
  return 0;
}

int run_spectrum(const ScenarioFlags& flags, const std::string& method_name_text,
                 const std::string& planar_mode, double grid_step, int lag_count,
                 int peak_count, const std::string& output_dir) {
  GeometryChoice choice;
  std::string warning;
  const auto scenario = build_scenario(flags, choice, &warning);
  if (scenario.sources.empty())
    throw std::invalid_argument("spectrum needs at least one --source");
  const auto data = generate_snapshots(scenario);
  const bool planar = std::holds_alternative<PlanarArrayGeometry>(choice);
  const Method method = method_from_name(method_name_text);
  const int source_count =
      peak_count > 0 ? peak_count : static_cast<int>(scenario.sources.size());

  json sidecar;
  sidecar["scenario"] = scenario_json(flags, scenario);
  sidecar["method"] = method_name(method);
  if (!warning.empty()) sidecar["warning"] = warning;
  const auto dir = resolve_output_dir(output_dir);

  if (!planar) {
    const auto& geometry = std::get<LinearArrayGeometry>(choice);
    const int used_lag_count =
        lag_count > 0 ? lag_count
                      : difference_coarray(geometry.positions).contiguous_len;
    const Grid grid =
        Grid::full_span(grid_step > 0 ? grid_step : kDefaultGridStep1d);
    const auto basis = hermitian_eig(
        toeplitz_correlation(lag_estimates(data, geometry, used_lag_count)),
        source_count);
    const auto spectrum = method == Method::kMnm
                              ? mnm_spectrum_1d(min_norm_vector(basis), grid)
                              : music_spectrum_1d(basis, grid);
    const auto peaks = find_peaks(spectrum, source_count);

    std::string body = "u,value\n";
    for (int i = 0; i < grid.count; ++i)
      body += csv_line({format_double(grid.point(i)),
                        format_double(spectrum.values[i])}) +
              "\n";

    sidecar["mode"] = "linear";
    sidecar["lag-count"] = used_lag_count;
    sidecar["grid"] = grid_json(grid);
    sidecar["complete"] = peaks.complete;
    auto list = json::array();
    for (const auto& p : peaks.peaks)
      list.push_back(json{{"u", p.x}, {"value", p.value}});
    sidecar["peaks"] = list;

    write_output(dir, "spectrum.csv", body);
    write_output(dir, "peaks.json", sidecar.dump(2) + "\n");
    return 0;
  }

  const auto& geometry = std::get<PlanarArrayGeometry>(choice);
  if (planar_mode == "direct") {
    const Grid grid =
        Grid::full_span(grid_step > 0 ? grid_step : kDefaultGridStep2d);
    const int halfwidth = geometry.contiguous_halfwidth();
    const auto basis =
        hermitian_eig(planar_block_correlation(data, geometry), source_count);
    const auto spectrum =
        method == Method::kMnm
            ? mnm_spectrum_2d(min_norm_vector(basis), halfwidth, grid, grid)
            : music_spectrum_2d(basis, halfwidth, grid, grid);
    const auto peaks = find_peaks(spectrum, source_count);

    std::string body = "ux,uy,value\n";
    for (int ix = 0; ix < grid.count; ++ix)
      for (int iy = 0; iy < grid.count; ++iy)
        body += csv_line({format_double(grid.point(ix)),
                          format_double(grid.point(iy)),
                          format_double(
                              spectrum.values[static_cast<std::size_t>(ix) *
                                                  grid.count +
                                              iy])}) +
                "\n";

    sidecar["mode"] = "direct";
    sidecar["grid"] = grid_json(grid);
    sidecar["complete"] = peaks.complete;
    auto list = json::array();
    for (const auto& p : peaks.peaks)
      list.push_back(json{{"ux", p.x}, {"uy", p.y}, {"value", p.value}});
    sidecar["peaks"] = list;

    write_output(dir, "spectrum.csv", body);
    write_output(dir, "peaks.json", sidecar.dump(2) + "\n");
    return 0;
  }

  // two-stage axis estimator: axis spectra for inspection, paired estimates in
  // the report
  const Grid grid = Grid::full_span(grid_step > 0 ? grid_step : kDefaultGridStep1d);
  const auto estimate =
      linear_planar_estimate(data, geometry, source_count, method, grid);
  for (Axis axis : {Axis::kX, Axis::kY}) {
    const auto basis =
        hermitian_eig(axis_averaged_correlation(data, geometry, axis), source_count);
    const auto spectrum = method == Method::kMnm
                              ? mnm_spectrum_1d(min_norm_vector(basis), grid)
                              : music_spectrum_1d(basis, grid);
    std::string body = "u,value\n";
    for (int i = 0; i < grid.count; ++i)
      body += csv_line({format_double(grid.point(i)),
                        format_double(spectrum.values[i])}) +
              "\n";
    write_output(dir, axis == Axis::kX ? "spectrum-x.csv" : "spectrum-y.csv", body);
  }

  sidecar["mode"] = "linear-planar";
  sidecar["grid"] = grid_json(grid);
  sidecar["complete"] = estimate.complete;
  auto list = json::array();
  for (const auto& p : estimate.pairs)
    list.push_back(json{{"ux", p.x}, {"uy", p.y}, {"score", p.value}});
  sidecar["pairs"] = list;
  write_output(dir, "peaks.json", sidecar.dump(2) + "\n");
  return 0;
}

std::vector<Method> methods_from_names(const std::vector<std::string>& names) {
  std::vector<Method> methods;
  for (const auto& name : names) methods.push_back(method_from_name(name));
  return methods;
}

int run_metrics(const std::string& config_path, const CLI::App* cmd,
                std::uint64_t seed, int trials, double grid_step, int lag_count,
                const std::string& output_dir) {
  const auto loaded = load_config_file(config_path);
  std::vector<std::string> errors;
  auto spec = parse_experiment_config(loaded, errors);
  if (!errors.empty()) {
    for (const auto& e : errors) std::cerr << "error: " << e << "\n";
    return 1;
  }

  // flags override file values when given explicitly
  if (cmd->count("--seed")) spec.seed = seed;
  if (cmd->count("--trials")) spec.trials = trials;
  if (cmd->count("--grid-step")) spec.grid_step = grid_step;
  if (cmd->count("--lag-count")) spec.lag_count = lag_count;

  std::string warning;
  auto choice = parse_geometry_spec(spec.geometry, &warning);
  if (spec.grid_step == 0.0) spec.grid_step = kDefaultGridStep1d;
  const auto dir = resolve_output_dir(output_dir, spec.output_dir);
  spec.output_dir = dir.string();

  json sidecar;
  if (spec.kind == "linear-sweep") {
    if (spec.snapshots == 0) spec.snapshots = 100;
    MonteCarloConfig config;
    config.geometry = std::get<LinearArrayGeometry>(choice);
    config.axis =
        spec.sweep == "snapshots" ? SweepAxis::kSnapshots : SweepAxis::kSnrDb;
    config.sweep_values = spec.sweep_values;
    config.fixed_snr_db = spec.snr_db;
    config.fixed_snapshots = spec.snapshots;
    config.trials = spec.trials;
    config.seed = spec.seed;
    config.methods = methods_from_names(spec.methods);
    config.lag_count = spec.lag_count;
    config.grid_step = spec.grid_step;
    const auto result = monte_carlo(config);
    sidecar["config"] = spec.to_json();
    if (!warning.empty()) sidecar["warning"] = warning;
    write_output(dir, "probability.csv", metric_csv(result.probability));
    write_output(dir, "rmse.csv", metric_csv(result.rmse));
  } else {
    if (spec.snapshots == 0) spec.snapshots = 15;
    PlanarExperimentConfig config;
    config.geometry = std::get<PlanarArrayGeometry>(choice);
    for (const auto& s : spec.sources)
      config.sources.push_back(SourceSpec{s[0], s[1], s[2]});
    config.axis =
        spec.sweep == "snapshots" ? SweepAxis::kSnapshots : SweepAxis::kSnrDb;
    config.sweep_values = spec.sweep_values;
    config.fixed_snr_db = spec.snr_db;
    config.fixed_snapshots = spec.snapshots;
    config.trials = spec.trials;
    config.seed = spec.seed;
    config.methods = methods_from_names(spec.methods);
    config.grid_step = spec.grid_step;
    const auto result = planar_rmse_experiment(config);
    sidecar["config"] = spec.to_json();
    if (!warning.empty()) sidecar["warning"] = warning;
    write_output(dir, "rmse.csv", metric_csv(result.rmse));
    write_output(dir, "rmse-x.csv", metric_csv(result.rmse_x));
    write_output(dir, "rmse-y.csv", metric_csv(result.rmse_y));
  }
  write_output(dir, "experiment.json", sidecar.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse-array direction-of-arrival estimation toolkit"};
  app.require_subcommand(1);

  auto* geometry_cmd =
      app.add_subcommand("geometry", "Print array layout and coarray facts");
  std::string geometry_spec, geometry_format = "json";
  geometry_cmd->add_option("--geometry", geometry_spec, "Array spec")->required();
  geometry_cmd->add_option("--format", geometry_format, "json | csv")
      ->capture_default_str()
      ->check(CLI::IsMember({"json", "csv"}));

  auto* simulate_cmd =
      app.add_subcommand("simulate", "Write simulated snapshots as CSV");
  ScenarioFlags simulate_flags;
  std::string simulate_output;
  add_scenario_flags(simulate_cmd, simulate_flags);
  simulate_cmd->add_option("--output-dir", simulate_output, "Output directory");

  auto* correlate_cmd =
      app.add_subcommand("correlate", "Write a coarray correlation matrix as CSV");
  ScenarioFlags correlate_flags;
  std::string correlate_output, correlate_construction = "auto";
  int correlate_lag_count = 0;
  add_scenario_flags(correlate_cmd, correlate_flags);
  correlate_cmd
      ->add_option("--construction", correlate_construction,
                   "auto | toeplitz | block | axis-x | axis-y")
      ->capture_default_str()
      ->check(CLI::IsMember({"auto", "toeplitz", "block", "axis-x", "axis-y"}));
  correlate_cmd->add_option("--lag-count", correlate_lag_count,
                            "Toeplitz lag count (0 = maximal contiguous)");
  correlate_cmd->add_option("--output-dir", correlate_output, "Output directory");

  auto* spectrum_cmd =
      app.add_subcommand("spectrum", "Write a pseudospectrum and peak report");
  ScenarioFlags spectrum_flags;
  std::string spectrum_output, spectrum_method = "mnm", spectrum_planar = "direct";
  double spectrum_grid_step = 0.0;
  int spectrum_lag_count = 0, spectrum_peaks = 0;
  add_scenario_flags(spectrum_cmd, spectrum_flags);
  spectrum_cmd->add_option("--method", spectrum_method, "music | mnm")
      ->capture_default_str()
      ->check(CLI::IsMember({"music", "mnm"}));
  spectrum_cmd
      ->add_option("--planar", spectrum_planar, "Planar strategy: direct | linear")
      ->capture_default_str()
      ->check(CLI::IsMember({"direct", "linear"}));
  spectrum_cmd->add_option("--grid-step", spectrum_grid_step,
                           "Grid step (0 = method default)");
  spectrum_cmd->add_option("--lag-count", spectrum_lag_count,
                           "Lag count (0 = maximal contiguous)");
  spectrum_cmd->add_option("--peaks", spectrum_peaks,
                           "Peaks to report (0 = source count)");
  spectrum_cmd->add_option("--output-dir", spectrum_output, "Output directory");

  auto* metrics_cmd =
      app.add_subcommand("metrics", "Run a Monte Carlo experiment from a config");
  std::string metrics_config, metrics_output;
  std::uint64_t metrics_seed = 0;
  int metrics_trials = 0, metrics_lag_count = 0;
  double metrics_grid_step = 0.0;
  metrics_cmd->add_option("--config", metrics_config, "TOML or JSON experiment file")
      ->required();
  metrics_cmd->add_option("--seed", metrics_seed, "Override the config seed");
  metrics_cmd->add_option("--trials", metrics_trials, "Override the trial count");
  metrics_cmd->add_option("--grid-step", metrics_grid_step,
                          "Override the grid step");
  metrics_cmd->add_option("--lag-count", metrics_lag_count,
                          "Override the lag count");
  metrics_cmd->add_option("--output-dir", metrics_output, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (geometry_cmd->parsed()) return run_geometry(geometry_spec, geometry_format);
    if (simulate_cmd->parsed()) return run_simulate(simulate_flags, simulate_output);
    if (correlate_cmd->parsed())
      return run_correlate(correlate_flags, correlate_construction,
                           correlate_lag_count, correlate_output);
    if (spectrum_cmd->parsed())
      return run_spectrum(spectrum_flags, spectrum_method, spectrum_planar,
                          spectrum_grid_step, spectrum_lag_count, spectrum_peaks,
                          spectrum_output);
    if (metrics_cmd->parsed())
      return run_metrics(metrics_config, metrics_cmd, metrics_seed, metrics_trials,
                         metrics_grid_step, metrics_lag_count, metrics_output);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
