#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "sparsedoa/geometry.hpp"

namespace sparsedoa {

struct SourceSpec {
  double ux = 0.0;     // direction cosine; the only coordinate for linear arrays
  double uy = 0.0;     // second direction cosine, planar scenarios only
  double power = 1.0;  // sigma_s^2
};

struct Scenario {
  std::variant<LinearArrayGeometry, PlanarArrayGeometry> geometry;
  std::vector<SourceSpec> sources;
  double noise_power = 1.0;  // sigma_n^2
  int snapshots = 1;
  std::uint64_t seed = 0;

  bool planar() const {
    return std::holds_alternative<PlanarArrayGeometry>(geometry);
  }
  int sensor_count() const;
  // Throws std::invalid_argument listing every violation (|u| bounds, powers,
  // snapshot count, source count for generation).
  void validate(bool for_generation = true) const;
};

// Channel-major sample matrix: all snapshots of one sensor are contiguous.
struct SnapshotSet {
  int sensor_count = 0;
  int snapshots = 0;
  std::vector<std::complex<double>> data;  // data[s * snapshots + q]

  std::complex<double>& at(int sensor, int snapshot) {
    return data[static_cast<std::size_t>(sensor) * snapshots + snapshot];
  }
  std::complex<double> at(int sensor, int snapshot) const {
    return data[static_cast<std::size_t>(sensor) * snapshots + snapshot];
  }
  std::span<const std::complex<double>> channel(int sensor) const {
    return {data.data() + static_cast<std::size_t>(sensor) * snapshots,
            static_cast<std::size_t>(snapshots)};
  }
};

// v[k] = exp(j pi u positions[k])
std::vector<std::complex<double>> steering_vector_linear(double u,
                                                         std::span<const int> positions);

// Kronecker stacking w_x (x) w_y: element (ix * size_y + iy) = exp(j pi (ux ix + uy iy)).
// The x phase rides the outer (block) index, matching column-major vec() of the grid.
std::vector<std::complex<double>> steering_vector_planar(double ux, double uy,
                                                         int size_x, int size_y);

// Draw order per snapshot: source amplitudes in scenario order, then one noise
// sample per sensor in position order. Fixed so a seed pins the byte stream.
SnapshotSet generate_snapshots(const Scenario& scenario);

// Analytic R = sum_i sigma_i^2 v(u_i) v(u_i)^H + sigma_n^2 I on the virtual ULA
// {0..dimension-1}. Accepts zero sources (pure noise floor).
std::vector<std::complex<double>> ensemble_correlation(const Scenario& scenario,
                                                       int dimension);

// Planar analog on the virtual (halfwidth+1)^2 URA in vec() order.
std::vector<std::complex<double>> ensemble_correlation_planar(const Scenario& scenario,
                                                              int halfwidth);

// Substream derivation: one master seed, decorrelated per-trial streams.
std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t stream);

// Circular complex Gaussian, E|z|^2 = variance (Rayleigh amplitude, uniform phase).
std::complex<double> draw_complex_gaussian(std::mt19937_64& rng, double variance);

}  // namespace sparsedoa
