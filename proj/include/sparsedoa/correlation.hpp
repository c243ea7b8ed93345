#pragma once

#include <complex>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "sparsedoa/geometry.hpp"
#include "sparsedoa/simulate.hpp"

namespace sparsedoa {

enum class CorrelationConstruction {
  kLinearToeplitz,
  kPlanarBlock,
  kRowAveraged,     // axis = x
  kColumnAveraged,  // axis = y
};

struct CorrelationEstimate {
  int dimension = 0;
  std::vector<std::complex<double>> matrix;  // row-major, Hermitian by construction
  // (lag_x, lag_y) -> sensor-pair x snapshot products averaged into that lag.
  // lag_y is 0 for linear constructions.
  std::map<std::pair<int, int>, long long> lag_counts;
  CorrelationConstruction construction = CorrelationConstruction::kLinearToeplitz;

  std::complex<double>& at(int row, int col) {
    return matrix[static_cast<std::size_t>(row) * dimension + col];
  }
  std::complex<double> at(int row, int col) const {
    return matrix[static_cast<std::size_t>(row) * dimension + col];
  }
};

struct LagEstimates {
  std::vector<std::complex<double>> values;  // values[l] = unbiased estimate of lag l
  std::vector<long long> counts;             // ordered pairs x snapshots per lag
};

// Unbiased coarray-lag averaging over all ordered sensor pairs achieving each
// lag 0..lag_count-1. Throws std::invalid_argument naming the first missing lag
// when lag_count exceeds the contiguous coarray segment.
LagEstimates lag_estimates(const SnapshotSet& data, const LinearArrayGeometry& geometry,
                           int lag_count);

// Hermitian Toeplitz assembly; first column = lags, upper triangle mirrored by
// conjugation, diagonal forced exactly real.
CorrelationEstimate toeplitz_correlation(std::span<const std::complex<double>> lags);
CorrelationEstimate toeplitz_correlation(const LagEstimates& lags);

// Block-Toeplitz-Toeplitz-block matrix of the virtual URA [0..h]^2 in vec()
// order: entry (n1, n2) = 2-D lag (ix1-ix2, iy1-iy2). Lags with lag_x > 0 (any
// lag_y) and lag_x = 0, lag_y >= 0 are averaged directly from sensor pairs;
// the remaining half-plane is their exact conjugate mirror.
CorrelationEstimate planar_block_correlation(const SnapshotSet& data,
                                             const PlanarArrayGeometry& geometry);

enum class Axis { kX, kY };

// Every occupied row (kX) or column (kY) is a copy of the underlying linear
// array; per-row Toeplitz estimates are summed and divided by the construction
// divisor (SIRNA: sparse_count, SIRCA: 2 * half_count).
CorrelationEstimate axis_averaged_correlation(const SnapshotSet& data,
                                              const PlanarArrayGeometry& geometry,
                                              Axis axis);

}  // namespace sparsedoa
