#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparsedoa/estimators.hpp"
#include "sparsedoa/simulate.hpp"

namespace sparsedoa {

struct ResolutionCriterion {
  int ula_size = 0;        // aperture + 1 of the equivalent filled array
  double beamwidth = 0.0;  // 4 / ula_size
  double delta_u = 0.0;    // 0.2165 * beamwidth
};

ResolutionCriterion resolution_criterion(const LinearArrayGeometry& geometry);

// Squared per-truth errors under the best one-to-one estimate/truth assignment
// (exhaustive over permutations; source counts here are tiny).
std::vector<double> assignment_squared_errors(std::span<const double> estimates,
                                              std::span<const double> truths);
// Planar variant; entries are u_x^2 + u_y^2 errors per truth.
std::vector<double> assignment_squared_errors_planar(
    std::span<const Peak> estimates, std::span<const SourceSpec> truths);

// Both sources found, distinct, and each within delta_u / 2 of its own truth
// under the best assignment.
bool check_resolved(std::span<const double> estimates, std::span<const double> truths,
                    double delta_u);

struct TrialOutcome {
  bool resolved = false;
  double squared_error_sum = 0.0;  // across matched sources
  int source_count = 0;
};

// sqrt(mean squared per-source error) / beamwidth. Unresolved trials keep
// their matched errors; nothing is censored.
double normalized_rmse(const std::vector<TrialOutcome>& outcomes, double beamwidth);

enum class SweepAxis { kSnrDb, kSnapshots };

struct MonteCarloConfig {
  LinearArrayGeometry geometry;
  SweepAxis axis = SweepAxis::kSnrDb;
  std::vector<double> sweep_values;
  double fixed_snr_db = 0.0;  // used when sweeping snapshots
  int fixed_snapshots = 100;  // used when sweeping SNR
  int trials = 1000;
  std::uint64_t seed = 1;
  std::vector<Method> methods{Method::kMnm, Method::kMusic};
  int lag_count = 0;  // 0 = maximal contiguous coarray segment
  double grid_step = kDefaultGridStep1d;
};

struct MetricSeries {
  Method method = Method::kMnm;
  std::vector<double> values;
  std::vector<double> stderrs;  // binomial for probability, delta-method for RMSE
};

struct MetricCurve {
  std::string metric;
  std::string sweep_name;  // "snr-db" | "snapshots"
  std::vector<double> sweep_values;
  std::vector<MetricSeries> series;  // one per method, config order
  int trials = 0;
  std::uint64_t seed = 0;
};

struct MonteCarloResult {
  MetricCurve probability;  // resolution probability
  MetricCurve rmse;         // beamwidth-normalized RMSE
};

// Two sources at +-delta_u/2 around broadside, unit power, sigma_n^2 = 1,
// SNR applied to source powers. Every method sees the same per-trial data;
// trial substreams derive from (seed, sweep index, trial index).
MonteCarloResult monte_carlo(const MonteCarloConfig& config);

struct PlanarExperimentConfig {
  PlanarArrayGeometry geometry;
  std::vector<SourceSpec> sources;  // unit powers unless set
  SweepAxis axis = SweepAxis::kSnrDb;
  std::vector<double> sweep_values;
  double fixed_snr_db = 0.0;
  int fixed_snapshots = 15;
  int trials = 1000;
  std::uint64_t seed = 1;
  std::vector<Method> methods{Method::kMnm, Method::kMusic};
  double grid_step = kDefaultGridStep1d;
};

struct PlanarExperimentResult {
  MetricCurve rmse;    // Euclidean (u_x, u_y) error, per-axis-beamwidth normalized
  MetricCurve rmse_x;  // per-axis breakdowns
  MetricCurve rmse_y;
};

// Methods run the two-stage linear estimator (axis spectra + pairing).
PlanarExperimentResult planar_rmse_experiment(const PlanarExperimentConfig& config);

const char* method_name(Method method);
const char* sweep_name(SweepAxis axis);

}  // namespace sparsedoa
