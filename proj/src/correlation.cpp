#include "sparsedoa/correlation.hpp"

#include <complex>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparsedoa/kernels.hpp"

namespace sparsedoa {
namespace {

using cpx = std::complex<double>;

// sum over snapshots of x_lead[q] * conj(x_trail[q])
cpx lag_product(const SnapshotSet& data, int lead, int trail) {
  auto conjugated = data.channel(trail);
  auto plain = data.channel(lead);
  return kernels::zdotc(conjugated.data(), plain.data(), plain.size());
}

void require_matching(const SnapshotSet& data, int sensor_count) {
  if (data.sensor_count != sensor_count)
    throw std::invalid_argument("snapshot set does not match the geometry sensor count");
  if (data.snapshots < 1) throw std::invalid_argument("snapshot set is empty");
}

}  // namespace

LagEstimates lag_estimates(const SnapshotSet& data, const LinearArrayGeometry& geometry,
                           int lag_count) {
  require_matching(data, static_cast<int>(geometry.positions.size()));
  if (lag_count < 1) throw std::invalid_argument("lag count must be at least 1");

  std::map<int, int> channel_at;
  for (int s = 0; s < data.sensor_count; ++s) channel_at[geometry.positions[s]] = s;

  LagEstimates out;
  out.values.resize(lag_count);
  out.counts.resize(lag_count);
  for (int lag = 0; lag < lag_count; ++lag) {
    cpx sum{0.0, 0.0};
    long long pairs = 0;
    for (int lead = 0; lead < data.sensor_count; ++lead) {
      auto trail = channel_at.find(geometry.positions[lead] - lag);
      if (trail == channel_at.end()) continue;
      sum += lag_product(data, lead, trail->second);
      ++pairs;
    }
    if (pairs == 0)
      throw std::invalid_argument("lag " + std::to_string(lag) +
                                  " is not achieved by the difference coarray");
    out.counts[lag] = pairs * data.snapshots;
    out.values[lag] = sum / static_cast<double>(out.counts[lag]);
  }
  // the zero lag averages |x|^2 terms; keep it exactly real despite FMA residue
  out.values[0] = cpx{out.values[0].real(), 0.0};
  return out;
}

CorrelationEstimate toeplitz_correlation(std::span<const std::complex<double>> lags) {
  if (lags.empty()) throw std::invalid_argument("empty lag sequence");
  CorrelationEstimate est;
  est.dimension = static_cast<int>(lags.size());
  est.construction = CorrelationConstruction::kLinearToeplitz;
  est.matrix.resize(static_cast<std::size_t>(est.dimension) * est.dimension);
  const cpx zero_lag{lags[0].real(), 0.0};
  for (int a = 0; a < est.dimension; ++a) {
    est.at(a, a) = zero_lag;
    for (int b = 0; b < a; ++b) {
      est.at(a, b) = lags[a - b];
      est.at(b, a) = std::conj(lags[a - b]);
    }
  }
  return est;
}

CorrelationEstimate toeplitz_correlation(const LagEstimates& lags) {
  auto est = toeplitz_correlation(std::span<const std::complex<double>>(lags.values));
  for (std::size_t lag = 0; lag < lags.counts.size(); ++lag)
    est.lag_counts[{static_cast<int>(lag), 0}] = lags.counts[lag];
  return est;
}

CorrelationEstimate planar_block_correlation(const SnapshotSet& data,
                                             const PlanarArrayGeometry& geometry) {
  require_matching(data, geometry.sensor_count());
  const int h = geometry.contiguous_halfwidth();
  const int side = h + 1;
  const int grid = geometry.side();

  std::vector<int> channel(static_cast<std::size_t>(grid) * grid, -1);
  for (int s = 0; s < geometry.sensor_count(); ++s)
    channel[static_cast<std::size_t>(geometry.positions[s][0]) * grid +
            geometry.positions[s][1]] = s;

  CorrelationEstimate est;
  est.dimension = side * side;
  est.construction = CorrelationConstruction::kPlanarBlock;

  // estimate lag_x > 0 (any lag_y) plus lag_x = 0, lag_y >= 0; the opposite
  // half-plane is linked only by (l_x, l_y) <-> (-l_x, -l_y) conjugation
  std::map<std::pair<int, int>, cpx> value;
  for (int lx = 0; lx <= h; ++lx) {
    for (int ly = (lx == 0) ? 0 : -h; ly <= h; ++ly) {
      cpx sum{0.0, 0.0};
      long long pairs = 0;
      for (int s = 0; s < geometry.sensor_count(); ++s) {
        const int i = geometry.positions[s][0] - lx;
        const int j = geometry.positions[s][1] - ly;
        if (i < 0 || j < 0 || i >= grid || j >= grid) continue;
        const int trail = channel[static_cast<std::size_t>(i) * grid + j];
        if (trail < 0) continue;
        sum += lag_product(data, s, trail);
        ++pairs;
      }
      if (pairs == 0)
        throw std::invalid_argument("2-d lag (" + std::to_string(lx) + ", " +
                                    std::to_string(ly) +
                                    ") is not achieved inside the contiguous square");
      const long long count = pairs * data.snapshots;
      est.lag_counts[{lx, ly}] = count;
      value[{lx, ly}] = sum / static_cast<double>(count);
    }
  }
  value[{0, 0}] = cpx{value[{0, 0}].real(), 0.0};

  est.matrix.resize(static_cast<std::size_t>(est.dimension) * est.dimension);
  for (int a = 0; a < est.dimension; ++a) {
    const int ax = a / side, ay = a % side;
    for (int b = 0; b < est.dimension; ++b) {
      const int lx = ax - b / side, ly = ay - b % side;
      if (lx > 0 || (lx == 0 && ly >= 0))
        est.at(a, b) = value.at({lx, ly});
      else
        est.at(a, b) = std::conj(value.at({-lx, -ly}));
    }
  }
  return est;
}

CorrelationEstimate axis_averaged_correlation(const SnapshotSet& data,
                                              const PlanarArrayGeometry& geometry,
                                              Axis axis) {
  require_matching(data, geometry.sensor_count());
  const LinearArrayGeometry line_geometry = geometry.underlying_linear();
  const int lag_count = geometry.contiguous_halfwidth() + 1;
  const int grid = geometry.side();

  std::vector<int> channel(static_cast<std::size_t>(grid) * grid, -1);
  for (int s = 0; s < geometry.sensor_count(); ++s)
    channel[static_cast<std::size_t>(geometry.positions[s][0]) * grid +
            geometry.positions[s][1]] = s;

  const int line_sensors = static_cast<int>(geometry.beta.size());
  CorrelationEstimate total;
  for (int fixed : geometry.beta) {
    SnapshotSet line;
    line.sensor_count = line_sensors;
    line.snapshots = data.snapshots;
    line.data.reserve(static_cast<std::size_t>(line_sensors) * data.snapshots);
    for (int varying : geometry.beta) {
      const int i = (axis == Axis::kX) ? varying : fixed;
      const int j = (axis == Axis::kX) ? fixed : varying;
      auto source = data.channel(channel[static_cast<std::size_t>(i) * grid + j]);
      line.data.insert(line.data.end(), source.begin(), source.end());
    }
    auto part = toeplitz_correlation(lag_estimates(line, line_geometry, lag_count));
    if (total.matrix.empty()) {
      total = part;
    } else {
      for (std::size_t k = 0; k < total.matrix.size(); ++k) total.matrix[k] += part.matrix[k];
      for (const auto& [lag, count] : part.lag_counts) total.lag_counts[lag] += count;
    }
  }
  const double divisor = (geometry.kind == PlanarKind::kSirna)
                             ? static_cast<double>(geometry.n_param)
                             : 2.0 * geometry.m_param;
  for (auto& z : total.matrix) z /= divisor;
  total.construction = (axis == Axis::kX) ? CorrelationConstruction::kRowAveraged
                                          : CorrelationConstruction::kColumnAveraged;
  return total;
}

}  // namespace sparsedoa
