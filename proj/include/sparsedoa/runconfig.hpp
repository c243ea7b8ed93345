#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sparsedoa/geometry.hpp"

namespace sparsedoa {

// Geometry specs: "coprime:ME,N,NE,M", "nested:ME,NE", "ula:L", "sirna:M,N",
// "sirca:M". Throws std::invalid_argument with the offending spec. Construction
// warnings (coprime N != M+1) land in *warning.
using GeometryChoice = std::variant<LinearArrayGeometry, PlanarArrayGeometry>;
GeometryChoice parse_geometry_spec(const std::string& spec, std::string* warning = nullptr);

// Minimal TOML reader covering experiment configs: [table] headers, key = value
// with strings, integers, floats, booleans, and (nested) arrays, plus #
// comments. Returns the equivalent JSON object; throws std::invalid_argument
// with line numbers on anything else.
nlohmann::json toml_subset_parse(const std::string& text);

// Dispatches on extension (.toml / .json) with TOML as the default.
nlohmann::json load_config_file(const std::string& path);

struct ExperimentSpec {
  std::string kind;      // "linear-sweep" | "planar-rmse"
  std::string geometry;  // geometry spec string
  std::vector<std::string> methods{"mnm", "music"};
  std::string sweep = "snr-db";  // "snr-db" | "snapshots"
  std::vector<double> sweep_values;
  double snr_db = 0.0;
  int snapshots = 0;  // 0 = kind-specific default (100 linear, 15 planar)
  int trials = 1000;
  std::uint64_t seed = 1;
  int lag_count = 0;  // 0 = maximal contiguous coarray segment
  double grid_step = 0.0;  // 0 = default 1-D step
  std::vector<std::array<double, 3>> sources;  // ux, uy, power; planar kinds only
  std::string output_dir;

  nlohmann::json to_json() const;
};

// Validates the whole document and returns every violation (unknown keys,
// type mismatches, out-of-range values), not just the first.
ExperimentSpec parse_experiment_config(const nlohmann::json& config,
                                       std::vector<std::string>& errors);

}  // namespace sparsedoa
