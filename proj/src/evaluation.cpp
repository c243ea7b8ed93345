#include "sparsedoa/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sparsedoa/correlation.hpp"

namespace sparsedoa {
namespace {

// Matched (estimate, truth) index pairs in truth order, minimizing total cost
// exhaustively; source counts stay in single digits so permutations are cheap.
template <typename Cost>
std::vector<std::pair<int, int>> best_assignment(int estimate_count, int truth_count,
                                                 Cost cost) {
  const int matched = std::min(estimate_count, truth_count);
  if (matched == 0) return {};
  const bool few_estimates = estimate_count < truth_count;
  std::vector<int> perm(std::max(estimate_count, truth_count));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double total = 0;
    for (int i = 0; i < matched; ++i)
      total += few_estimates ? cost(i, perm[i]) : cost(perm[i], i);
    if (total < best_cost) {
      best_cost = total;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  std::vector<std::pair<int, int>> out;
  out.reserve(matched);
  for (int i = 0; i < matched; ++i)
    out.push_back(few_estimates ? std::pair<int, int>{i, best[i]}
                                : std::pair<int, int>{best[i], i});
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  return out;
}

struct SeriesAccumulator {
  long long resolved = 0;
  std::vector<double> trial_sq;
  std::vector<long long> trial_matched;
};

double mean_squared_error(const SeriesAccumulator& acc) {
  const double sq = std::accumulate(acc.trial_sq.begin(), acc.trial_sq.end(), 0.0);
  const long long n =
      std::accumulate(acc.trial_matched.begin(), acc.trial_matched.end(), 0LL);
  return n > 0 ? sq / static_cast<double>(n) : 0.0;
}

// Ratio-estimator variance of the mean squared error across trials, pushed
// through the square root by the delta method.
double rmse_stderr(const SeriesAccumulator& acc, double beamwidth) {
  const auto trials = static_cast<long long>(acc.trial_sq.size());
  const long long n =
      std::accumulate(acc.trial_matched.begin(), acc.trial_matched.end(), 0LL);
  if (trials < 2 || n == 0) return 0.0;
  const double m = mean_squared_error(acc);
  if (m <= 0.0) return 0.0;
  double residual_sq = 0;
  for (long long t = 0; t < trials; ++t) {
    const double d = acc.trial_sq[t] - m * static_cast<double>(acc.trial_matched[t]);
    residual_sq += d * d;
  }
  const double var =
      residual_sq * static_cast<double>(trials) /
      (static_cast<double>(trials - 1) * static_cast<double>(n) * static_cast<double>(n));
  return std::sqrt(var) / (2.0 * std::sqrt(m)) / beamwidth;
}

MetricSeries probability_series(Method method, const std::vector<SeriesAccumulator>& acc,
                                int sweep_count, int method_index, int method_count,
                                int trials) {
  MetricSeries series;
  series.method = method;
  for (int si = 0; si < sweep_count; ++si) {
    const auto& a = acc[static_cast<std::size_t>(si) * method_count + method_index];
    const double p = static_cast<double>(a.resolved) / trials;
    series.values.push_back(p);
    series.stderrs.push_back(std::sqrt(p * (1.0 - p) / trials));
  }
  return series;
}

MetricSeries rmse_series(Method method, const std::vector<SeriesAccumulator>& acc,
                         int sweep_count, int method_index, int method_count,
                         double beamwidth) {
  MetricSeries series;
  series.method = method;
  for (int si = 0; si < sweep_count; ++si) {
    const auto& a = acc[static_cast<std::size_t>(si) * method_count + method_index];
    series.values.push_back(std::sqrt(mean_squared_error(a)) / beamwidth);
    series.stderrs.push_back(rmse_stderr(a, beamwidth));
  }
  return series;
}

struct SweepPoint {
  double snr_db = 0.0;
  int snapshots = 0;
};

SweepPoint resolve_sweep_point(SweepAxis axis, double value, double fixed_snr_db,
                               int fixed_snapshots) {
  SweepPoint point;
  if (axis == SweepAxis::kSnrDb) {
    point.snr_db = value;
    point.snapshots = fixed_snapshots;
  } else {
    point.snr_db = fixed_snr_db;
    point.snapshots = static_cast<int>(std::llround(value));
  }
  if (point.snapshots < 1)
    throw std::invalid_argument("snapshot count must be positive");
  return point;
}

}  // namespace

ResolutionCriterion resolution_criterion(const LinearArrayGeometry& geometry) {
  if (geometry.positions.empty())
    throw std::invalid_argument("geometry has no sensors");
  ResolutionCriterion rc;
  rc.ula_size = geometry.equivalent_ula_size();
  rc.beamwidth = 4.0 / rc.ula_size;
  rc.delta_u = 0.2165 * rc.beamwidth;
  return rc;
}

std::vector<double> assignment_squared_errors(std::span<const double> estimates,
                                              std::span<const double> truths) {
  auto cost = [&](int e, int t) {
    const double d = estimates[e] - truths[t];
    return d * d;
  };
  auto pairs = best_assignment(static_cast<int>(estimates.size()),
                               static_cast<int>(truths.size()), cost);
  std::vector<double> errors;
  errors.reserve(pairs.size());
  for (const auto& [e, t] : pairs) errors.push_back(cost(e, t));
  return errors;
}

std::vector<double> assignment_squared_errors_planar(
    std::span<const Peak> estimates, std::span<const SourceSpec> truths) {
  auto cost = [&](int e, int t) {
    const double dx = estimates[e].x - truths[t].ux;
    const double dy = estimates[e].y - truths[t].uy;
    return dx * dx + dy * dy;
  };
  auto pairs = best_assignment(static_cast<int>(estimates.size()),
                               static_cast<int>(truths.size()), cost);
  std::vector<double> errors;
  errors.reserve(pairs.size());
  for (const auto& [e, t] : pairs) errors.push_back(cost(e, t));
  return errors;
}

bool check_resolved(std::span<const double> estimates, std::span<const double> truths,
                    double delta_u) {
  if (truths.empty() || estimates.size() < truths.size()) return false;
  auto cost = [&](int e, int t) {
    const double d = estimates[e] - truths[t];
    return d * d;
  };
  auto pairs = best_assignment(static_cast<int>(estimates.size()),
                               static_cast<int>(truths.size()), cost);
  std::vector<double> used;
  for (const auto& [e, t] : pairs) {
    if (std::abs(estimates[e] - truths[t]) > delta_u / 2.0) return false;
    used.push_back(estimates[e]);
  }
  std::sort(used.begin(), used.end());
  for (std::size_t i = 0; i + 1 < used.size(); ++i)
    if (used[i] == used[i + 1]) return false;
  return true;
}

double normalized_rmse(const std::vector<TrialOutcome>& outcomes, double beamwidth) {
  double sq = 0;
  long long n = 0;
  for (const auto& outcome : outcomes) {
    sq += outcome.squared_error_sum;
    n += outcome.source_count;
  }
  if (n == 0) return 0.0;
  return std::sqrt(sq / static_cast<double>(n)) / beamwidth;
}

MonteCarloResult monte_carlo(const MonteCarloConfig& config) {
  if (config.sweep_values.empty())
    throw std::invalid_argument("sweep values must be non-empty");
  if (config.trials < 1) throw std::invalid_argument("trial count must be positive");
  if (config.methods.empty())
    throw std::invalid_argument("at least one method is required");
  const auto rc = resolution_criterion(config.geometry);
  const auto coarray = difference_coarray(config.geometry.positions);
  const int lag_count = config.lag_count > 0 ? config.lag_count : coarray.contiguous_len;
  const Grid grid = Grid::full_span(config.grid_step);
  const std::vector<double> truths = {-rc.delta_u / 2.0, rc.delta_u / 2.0};

  const int sweep_count = static_cast<int>(config.sweep_values.size());
  const int method_count = static_cast<int>(config.methods.size());
  std::vector<SeriesAccumulator> acc(static_cast<std::size_t>(sweep_count) *
                                     method_count);

  for (int si = 0; si < sweep_count; ++si) {
    const auto point = resolve_sweep_point(config.axis, config.sweep_values[si],
                                           config.fixed_snr_db, config.fixed_snapshots);
    const double power = std::pow(10.0, point.snr_db / 10.0);
    const std::uint64_t sweep_seed = derive_stream_seed(config.seed, si);

    for (int trial = 0; trial < config.trials; ++trial) {
      Scenario scenario;
      scenario.geometry = config.geometry;
      scenario.sources = {{truths[0], 0.0, power}, {truths[1], 0.0, power}};
      scenario.noise_power = 1.0;
      scenario.snapshots = point.snapshots;
      scenario.seed = derive_stream_seed(sweep_seed, trial);
      const auto data = generate_snapshots(scenario);
      const auto basis = hermitian_eig(
          toeplitz_correlation(lag_estimates(data, config.geometry, lag_count)), 2);

      for (int mi = 0; mi < method_count; ++mi) {
        std::vector<double> xs;
        bool complete = false;
        try {
          const auto spectrum =
              config.methods[mi] == Method::kMnm
                  ? mnm_spectrum_1d(min_norm_vector(basis), grid)
                  : music_spectrum_1d(basis, grid);
          const auto peaks = find_peaks(spectrum, 2);
          complete = peaks.complete;
          for (const auto& peak : peaks.peaks) xs.push_back(peak.x);
        } catch (const std::invalid_argument&) {
          // degenerate constraint vector: the trial counts as a miss
        }
        const auto errors = assignment_squared_errors(xs, truths);
        auto& a = acc[static_cast<std::size_t>(si) * method_count + mi];
        a.resolved += (complete && check_resolved(xs, truths, rc.delta_u)) ? 1 : 0;
        a.trial_sq.push_back(std::accumulate(errors.begin(), errors.end(), 0.0));
        a.trial_matched.push_back(static_cast<long long>(errors.size()));
      }
    }
  }

  MonteCarloResult result;
  for (MetricCurve* curve : {&result.probability, &result.rmse}) {
    curve->sweep_name = sweep_name(config.axis);
    curve->sweep_values = config.sweep_values;
    curve->trials = config.trials;
    curve->seed = config.seed;
  }
  result.probability.metric = "probability";
  result.rmse.metric = "rmse";
  for (int mi = 0; mi < method_count; ++mi) {
    result.probability.series.push_back(probability_series(
        config.methods[mi], acc, sweep_count, mi, method_count, config.trials));
    result.rmse.series.push_back(rmse_series(config.methods[mi], acc, sweep_count, mi,
                                             method_count, rc.beamwidth));
  }
  return result;
}

PlanarExperimentResult planar_rmse_experiment(const PlanarExperimentConfig& config) {
  if (config.sources.empty())
    throw std::invalid_argument("at least one source is required");
  if (config.sweep_values.empty())
    throw std::invalid_argument("sweep values must be non-empty");
  if (config.trials < 1) throw std::invalid_argument("trial count must be positive");
  if (config.methods.empty())
    throw std::invalid_argument("at least one method is required");
  const int source_count = static_cast<int>(config.sources.size());
  const int axis_size = config.geometry.contiguous_halfwidth() + 1;
  if (source_count >= axis_size)
    throw std::invalid_argument("source count must be below the virtual array size");
  const double beamwidth = 4.0 / axis_size;
  const Grid grid = Grid::full_span(config.grid_step);

  const int sweep_count = static_cast<int>(config.sweep_values.size());
  const int method_count = static_cast<int>(config.methods.size());
  const std::size_t cells = static_cast<std::size_t>(sweep_count) * method_count;
  std::vector<SeriesAccumulator> acc_total(cells), acc_x(cells), acc_y(cells);

  for (int si = 0; si < sweep_count; ++si) {
    const auto point = resolve_sweep_point(config.axis, config.sweep_values[si],
                                           config.fixed_snr_db, config.fixed_snapshots);
    const double factor = std::pow(10.0, point.snr_db / 10.0);
    const std::uint64_t sweep_seed = derive_stream_seed(config.seed, si);

    for (int trial = 0; trial < config.trials; ++trial) {
      Scenario scenario;
      scenario.geometry = config.geometry;
      scenario.sources = config.sources;
      for (auto& source : scenario.sources) source.power *= factor;
      scenario.noise_power = 1.0;
      scenario.snapshots = point.snapshots;
      scenario.seed = derive_stream_seed(sweep_seed, trial);
      const auto data = generate_snapshots(scenario);

      for (int mi = 0; mi < method_count; ++mi) {
        std::vector<Peak> pairs;
        try {
          pairs = linear_planar_estimate(data, config.geometry, source_count,
                                         config.methods[mi], grid)
                      .pairs;
        } catch (const std::invalid_argument&) {
          // degenerate trial: no estimate, nothing matched
        }
        auto cost = [&](int e, int t) {
          const double dx = pairs[e].x - config.sources[t].ux;
          const double dy = pairs[e].y - config.sources[t].uy;
          return dx * dx + dy * dy;
        };
        auto matched = best_assignment(static_cast<int>(pairs.size()), source_count, cost);
        double sum_total = 0, sum_x = 0, sum_y = 0;
        for (const auto& [e, t] : matched) {
          const double dx = pairs[e].x - config.sources[t].ux;
          const double dy = pairs[e].y - config.sources[t].uy;
          sum_x += dx * dx;
          sum_y += dy * dy;
          sum_total += dx * dx + dy * dy;
        }
        const auto n = static_cast<long long>(matched.size());
        const std::size_t cell = static_cast<std::size_t>(si) * method_count + mi;
        acc_total[cell].trial_sq.push_back(sum_total);
        acc_total[cell].trial_matched.push_back(n);
        acc_x[cell].trial_sq.push_back(sum_x);
        acc_x[cell].trial_matched.push_back(n);
        acc_y[cell].trial_sq.push_back(sum_y);
        acc_y[cell].trial_matched.push_back(n);
      }
    }
  }

  PlanarExperimentResult result;
  result.rmse.metric = "rmse";
  result.rmse_x.metric = "rmse-x";
  result.rmse_y.metric = "rmse-y";
  const std::vector<SeriesAccumulator>* accs[] = {&acc_total, &acc_x, &acc_y};
  MetricCurve* curves[] = {&result.rmse, &result.rmse_x, &result.rmse_y};
  for (int c = 0; c < 3; ++c) {
    curves[c]->sweep_name = sweep_name(config.axis);
    curves[c]->sweep_values = config.sweep_values;
    curves[c]->trials = config.trials;
    curves[c]->seed = config.seed;
    for (int mi = 0; mi < method_count; ++mi)
      curves[c]->series.push_back(rmse_series(config.methods[mi], *accs[c], sweep_count,
                                              mi, method_count, beamwidth));
  }
  return result;
}

const char* method_name(Method method) {
  return method == Method::kMnm ? "mnm" : "music";
}

const char* sweep_name(SweepAxis axis) {
  return axis == SweepAxis::kSnrDb ? "snr-db" : "snapshots";
}

}  // namespace sparsedoa
