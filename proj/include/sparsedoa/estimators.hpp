#pragma once

#include <complex>
#include <span>
#include <vector>

#include "sparsedoa/correlation.hpp"

namespace sparsedoa {

// Uniform direction-cosine grid: points start + i*step, i in 0..count-1.
struct Grid {
  double start = -1.0;
  double step = 1e-3;
  int count = 2001;

  double point(int i) const { return start + step * i; }
  static Grid full_span(double step);  // covers [-1, 1] inclusive
};

inline constexpr double kSpectrumCap = 1e15;
inline constexpr double kDefaultGridStep1d = 1e-3;
inline constexpr double kDefaultGridStep2d = 5e-3;

struct EigenBasis {
  int dimension = 0;
  int source_count = 0;               // assumed P; noise space = remaining columns
  std::vector<double> eigenvalues;    // descending
  std::vector<std::complex<double>> vectors;  // column-major, orthonormal columns

  std::span<const std::complex<double>> column(int j) const {
    return {vectors.data() + static_cast<std::size_t>(j) * dimension,
            static_cast<std::size_t>(dimension)};
  }
  int noise_count() const { return dimension - source_count; }
};

// Cyclic Jacobi on the Hermitian input. Throws std::invalid_argument when the
// matrix is not Hermitian (asymmetry > 1e-12 * ||R||_F) or source_count is out
// of range. Meets reconstruction error <= 1e-10 * ||R||_F.
EigenBasis hermitian_eig(const CorrelationEstimate& correlation, int source_count);
EigenBasis hermitian_eig(std::span<const std::complex<double>> matrix, int dimension,
                         int source_count);

// Minimum-norm vector: min ||d|| with d[0] = 1 and d orthogonal to the signal
// subspace. Computed from the noise side, cross-checked against the signal-side
// form by tests. Throws when the first coordinate lies in the signal subspace
// (||noise-side first row||^2 <= 1e-12).
std::vector<std::complex<double>> min_norm_vector(const EigenBasis& basis);
// Signal-side closed form [1; -G g* / (1 - ||g||^2)], kept public so the dual
// route stays independently exercisable.
std::vector<std::complex<double>> min_norm_vector_signal_form(const EigenBasis& basis);

enum class Method { kMnm, kMusic };

struct Peak {
  double x = 0.0;  // refined location (direction cosine)
  double y = 0.0;  // second coordinate, 2-D spectra only
  double value = 0.0;
};

struct Pseudospectrum {
  Method method = Method::kMnm;
  Grid grid_x;
  Grid grid_y;        // count == 0 for 1-D spectra
  std::vector<double> values;  // 1-D: [ix]; 2-D: [ix * grid_y.count + iy]

  bool planar() const { return grid_y.count > 0; }
};

// P(u) = |v(u)^H d|^-2, capped at kSpectrumCap.
Pseudospectrum mnm_spectrum_1d(std::span<const std::complex<double>> min_norm,
                               const Grid& grid);
// P(u) = ||E_n^H v(u)||^-2, capped at kSpectrumCap.
Pseudospectrum music_spectrum_1d(const EigenBasis& basis, const Grid& grid);

// Planar variants over the virtual (halfwidth+1)^2 URA; vectors must have that
// dimension. Evaluated separably along y then x.
Pseudospectrum mnm_spectrum_2d(std::span<const std::complex<double>> min_norm,
                               int halfwidth, const Grid& grid_x, const Grid& grid_y);
Pseudospectrum music_spectrum_2d(const EigenBasis& basis, int halfwidth,
                                 const Grid& grid_x, const Grid& grid_y);

struct PeakList {
  std::vector<Peak> peaks;  // value-descending
  bool complete = true;     // false when fewer maxima than requested exist
};

// Top-`count` strict local maxima with 3-point parabolic refinement on log
// values. Plateaus count once at their lowest-index sample; boundary samples
// are not peaks. 2-D uses the full 8-neighborhood.
PeakList find_peaks(const Pseudospectrum& spectrum, int count);

struct PlanarEstimate {
  std::vector<Peak> pairs;  // x = u_x, y = u_y, value = pairing score
  bool complete = true;
};

// Axis-averaged 1-D spectra on x and y, then candidate (u_x, u_y) pairs ranked
// by the planar MUSIC value on the block-correlation noise subspace; the P
// largest win. Spectral peaks may repeat across pairs when sources share a
// coordinate.
PlanarEstimate linear_planar_estimate(const SnapshotSet& data,
                                      const PlanarArrayGeometry& geometry,
                                      int source_count, Method method,
                                      const Grid& grid);

}  // namespace sparsedoa
