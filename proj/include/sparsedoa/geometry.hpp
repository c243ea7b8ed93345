#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sparsedoa {

// All positions are integer multiples of the half-wavelength grid spacing.

enum class LinearKind { kCoprime, kNested, kFullUla };

struct LinearArrayGeometry {
  LinearKind kind = LinearKind::kFullUla;
  int subarray1_count = 0;   // sensors in the undersampled-by-`subarray1_stride` part
  int subarray1_stride = 1;
  int subarray2_count = 0;
  int subarray2_stride = 1;
  std::vector<int> positions;  // sorted, deduplicated, starts at 0

  int aperture() const { return positions.empty() ? 0 : positions.back(); }
  int equivalent_ula_size() const { return aperture() + 1; }
};

struct Coarray {
  std::vector<int> lags;     // achieved non-negative lags, sorted
  std::vector<int> weights;  // weights[i] = ordered sensor pairs realizing lags[i]
  int contiguous_len = 0;    // largest L with {0..L-1} all achieved

  int weight_of(int lag) const;
};

enum class PlanarKind { kSirna, kSirca };

struct PlanarArrayGeometry {
  PlanarKind kind = PlanarKind::kSirna;
  int m_param = 0;
  int n_param = 0;
  std::vector<int> beta;  // underlying linear array positions; every occupied
                          // row/column of the grid is a copy of beta
  // indicator[i][j] = 1 iff a sensor sits at x-index i, y-index j. Authoritative.
  std::vector<std::vector<std::uint8_t>> indicator;
  // Occupied grid points in column-major vec() order: x-index outer, y-index inner.
  std::vector<std::array<int, 2>> positions;

  int side() const { return static_cast<int>(indicator.size()); }
  int sensor_count() const { return static_cast<int>(positions.size()); }
  // Half-width of the filled square [-h, h]^2 of the difference coarray;
  // also the largest per-axis lag usable for correlation augmentation.
  int contiguous_halfwidth() const;
  LinearArrayGeometry underlying_linear() const;
};

// Throws std::invalid_argument on non-coprime strides or counts < 2.
// N != M+1 is legal but off the standard construction; the note (if any) goes
// to *warning when given.
LinearArrayGeometry build_coprime_linear(int subarray1_count, int subarray1_stride,
                                         int subarray2_count, int subarray2_stride,
                                         std::string* warning = nullptr);
LinearArrayGeometry build_nested_linear(int dense_count, int sparse_count);
LinearArrayGeometry build_full_ula(int size);

// 1 for occupied grid points, 0 for holes, over 0..aperture.
std::vector<std::uint8_t> sensor_indicator(const LinearArrayGeometry& geometry);

Coarray difference_coarray(std::span<const int> positions);

PlanarArrayGeometry build_sirna(int dense_count, int sparse_count);
PlanarArrayGeometry build_sirca(int half_count);

}  // namespace sparsedoa
