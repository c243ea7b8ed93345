#include "sparsedoa/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "sparsedoa/kernels.hpp"
#include "sparsedoa/simulate.hpp"

namespace sparsedoa {
namespace {

using cpx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

double frobenius(std::span<const cpx> m) {
  double s = 0;
  for (auto z : m) s += std::norm(z);
  return std::sqrt(s);
}

void validate_grid(const Grid& grid) {
  if (grid.count < 1 || grid.step <= 0.0)
    throw std::invalid_argument("grid needs a positive step and at least one sample");
  if (grid.start < -1.0 - 1e-9 || grid.point(grid.count - 1) > 1.0 + 1e-9)
    throw std::invalid_argument("grid exceeds the direction-cosine domain [-1, 1]");
}

double invert_capped(double mag2) {
  return (mag2 <= 1.0 / kSpectrumCap) ? kSpectrumCap : 1.0 / mag2;
}

// One two-sided Jacobi rotation zeroing W(p,q), W column-major Hermitian.
// Rows p and q of the rotated matrix are rebuilt by conjugate mirroring, so
// hermitian symmetry is exact at every step.
void rotate(std::vector<cpx>& w, std::vector<cpx>& v, int dim, int p, int q, double r,
            cpx pivot) {
  const double app = w[static_cast<std::size_t>(p) * dim + p].real();
  const double aqq = w[static_cast<std::size_t>(q) * dim + q].real();
  const double theta = (aqq - app) / (2.0 * r);
  const double t =
      (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const cpx s = (t * c) * (pivot / r);

  cpx* colp = w.data() + static_cast<std::size_t>(p) * dim;
  cpx* colq = w.data() + static_cast<std::size_t>(q) * dim;
  kernels::apply_rotation(colp, colq, static_cast<std::size_t>(dim), c, std::conj(s));
  for (int k = 0; k < dim; ++k) {
    w[static_cast<std::size_t>(k) * dim + p] = std::conj(colp[k]);
    w[static_cast<std::size_t>(k) * dim + q] = std::conj(colq[k]);
  }
  colp[p] = cpx{app - t * r, 0.0};
  colq[q] = cpx{aqq + t * r, 0.0};
  colq[p] = cpx{0.0, 0.0};
  colp[q] = cpx{0.0, 0.0};

  kernels::apply_rotation(v.data() + static_cast<std::size_t>(p) * dim,
                          v.data() + static_cast<std::size_t>(q) * dim,
                          static_cast<std::size_t>(dim), c, std::conj(s));
}

// Accumulates |sum_n coeff[n] exp(-j pi (u_x i_x + u_y i_y))|^2 over the planar
// grid for one vec()-ordered coefficient vector: complex inner polynomials
// along y, then magnitude sweeps along x reusing the 1-d kernel.
void sweep_2d_mag2(const cpx* coeff, int side, const Grid& gx, const Grid& gy,
                   std::vector<double>& acc) {
  std::vector<cpx> inner(static_cast<std::size_t>(gy.count) * side);
  for (int g = 0; g < gy.count; ++g) {
    const cpx z = std::polar(1.0, -kPi * gy.point(g));
    for (int ix = 0; ix < side; ++ix) {
      const cpx* block = coeff + static_cast<std::size_t>(ix) * side;
      cpx horner = block[side - 1];
      for (int iy = side - 2; iy >= 0; --iy) horner = horner * z + block[iy];
      inner[static_cast<std::size_t>(g) * side + ix] = horner;
    }
  }
  std::vector<double> column(gx.count);
  for (int g = 0; g < gy.count; ++g) {
    kernels::polyval_mag2_sweep(inner.data() + static_cast<std::size_t>(g) * side,
                                static_cast<std::size_t>(side), -kPi * gx.start,
                                -kPi * gx.step, static_cast<std::size_t>(gx.count),
                                column.data(), false);
    for (int ix = 0; ix < gx.count; ++ix)
      acc[static_cast<std::size_t>(ix) * gy.count + g] += column[ix];
  }
}

double refine_delta(double left, double center, double right) {
  const double ll = std::log(left), lc = std::log(center), lr = std::log(right);
  const double denom = ll - 2.0 * lc + lr;
  if (!(std::abs(denom) > 1e-300)) return 0.0;
  return std::clamp(0.5 * (ll - lr) / denom, -0.5, 0.5);
}

}  // namespace

Grid Grid::full_span(double step) {
  if (step <= 0.0) throw std::invalid_argument("grid step must be positive");
  Grid g;
  g.start = -1.0;
  g.step = step;
  g.count = static_cast<int>(std::floor(2.0 / step + 1e-9)) + 1;
  return g;
}

EigenBasis hermitian_eig(std::span<const std::complex<double>> matrix, int dimension,
                         int source_count) {
  if (dimension < 1 ||
      matrix.size() != static_cast<std::size_t>(dimension) * dimension)
    throw std::invalid_argument("matrix storage does not match the stated dimension");
  if (source_count < 0 || source_count > dimension)
    throw std::invalid_argument("source count is outside [0, dimension]");

  const double scale = frobenius(matrix);
  double asym = 0;
  for (int i = 0; i < dimension; ++i)
    for (int j = 0; j < dimension; ++j)
      asym += std::norm(matrix[static_cast<std::size_t>(i) * dimension + j] -
                        std::conj(matrix[static_cast<std::size_t>(j) * dimension + i]));
  if (std::sqrt(asym) > 1e-12 * scale)
    throw std::invalid_argument("matrix is not hermitian");

  // column-major symmetrized working copy
  std::vector<cpx> w(matrix.size());
  for (int i = 0; i < dimension; ++i) {
    for (int j = 0; j < dimension; ++j) {
      const cpx a = matrix[static_cast<std::size_t>(i) * dimension + j];
      const cpx b = std::conj(matrix[static_cast<std::size_t>(j) * dimension + i]);
      w[static_cast<std::size_t>(j) * dimension + i] = 0.5 * (a + b);
    }
    w[static_cast<std::size_t>(i) * dimension + i] =
        cpx{w[static_cast<std::size_t>(i) * dimension + i].real(), 0.0};
  }
  std::vector<cpx> v(matrix.size(), cpx{0.0, 0.0});
  for (int i = 0; i < dimension; ++i) v[static_cast<std::size_t>(i) * dimension + i] = 1.0;

  if (scale > 0.0) {
    for (int sweep = 0; sweep < 60; ++sweep) {
      double off2 = 0;
      for (int p = 0; p < dimension; ++p)
        for (int q = p + 1; q < dimension; ++q)
          off2 += std::norm(w[static_cast<std::size_t>(q) * dimension + p]);
      const double off = std::sqrt(2.0 * off2);
      if (off <= 1e-14 * scale) break;
      // early sweeps skip small pivots; final sweeps polish everything
      const double thresh =
          (sweep < 3) ? 0.05 * off / (static_cast<double>(dimension) * dimension) : 0.0;
      for (int p = 0; p < dimension; ++p)
        for (int q = p + 1; q < dimension; ++q) {
          const cpx pivot = w[static_cast<std::size_t>(q) * dimension + p];
          const double r = std::abs(pivot);
          if (r <= thresh || r <= 1e-18 * scale) continue;
          rotate(w, v, dimension, p, q, r, pivot);
        }
    }
  }

  std::vector<int> order(dimension);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return w[static_cast<std::size_t>(a) * dimension + a].real() >
           w[static_cast<std::size_t>(b) * dimension + b].real();
  });

  EigenBasis basis;
  basis.dimension = dimension;
  basis.source_count = source_count;
  basis.eigenvalues.resize(dimension);
  basis.vectors.resize(matrix.size());
  for (int k = 0; k < dimension; ++k) {
    basis.eigenvalues[k] = w[static_cast<std::size_t>(order[k]) * dimension + order[k]].real();
    std::copy_n(v.data() + static_cast<std::size_t>(order[k]) * dimension, dimension,
                basis.vectors.data() + static_cast<std::size_t>(k) * dimension);
  }
  return basis;
}

EigenBasis hermitian_eig(const CorrelationEstimate& correlation, int source_count) {
  return hermitian_eig(std::span<const cpx>(correlation.matrix), correlation.dimension,
                       source_count);
}

std::vector<std::complex<double>> min_norm_vector(const EigenBasis& basis) {
  const int dim = basis.dimension;
  double c2 = 0;
  for (int j = basis.source_count; j < dim; ++j) c2 += std::norm(basis.column(j)[0]);
  if (c2 <= 1e-12)
    throw std::invalid_argument(
        "degenerate constraint: the first coarray element lies in the signal subspace");

  std::vector<cpx> d(dim, cpx{0.0, 0.0});
  for (int j = basis.source_count; j < dim; ++j) {
    auto column = basis.column(j);
    const cpx weight = std::conj(column[0]);
    for (int i = 0; i < dim; ++i) d[i] += weight * column[i];
  }
  for (auto& z : d) z /= c2;
  d[0] = cpx{1.0, 0.0};
  return d;
}

std::vector<std::complex<double>> min_norm_vector_signal_form(const EigenBasis& basis) {
  const int dim = basis.dimension;
  double g2 = 0;
  for (int j = 0; j < basis.source_count; ++j) g2 += std::norm(basis.column(j)[0]);
  const double denom = 1.0 - g2;
  if (denom <= 1e-12)
    throw std::invalid_argument(
        "degenerate constraint: the first coarray element lies in the signal subspace");

  std::vector<cpx> d(dim, cpx{0.0, 0.0});
  d[0] = cpx{1.0, 0.0};
  for (int j = 0; j < basis.source_count; ++j) {
    auto column = basis.column(j);
    const cpx weight = std::conj(column[0]) / denom;
    for (int i = 1; i < dim; ++i) d[i] -= weight * column[i];
  }
  return d;
}

Pseudospectrum mnm_spectrum_1d(std::span<const std::complex<double>> min_norm,
                               const Grid& grid) {
  validate_grid(grid);
  Pseudospectrum out;
  out.method = Method::kMnm;
  out.grid_x = grid;
  out.grid_y = Grid{0.0, 0.0, 0};
  out.values.resize(grid.count);
  kernels::polyval_mag2_sweep(min_norm.data(), min_norm.size(), -kPi * grid.start,
                              -kPi * grid.step, static_cast<std::size_t>(grid.count),
                              out.values.data(), false);
  for (auto& value : out.values) value = invert_capped(value);
  return out;
}

Pseudospectrum music_spectrum_1d(const EigenBasis& basis, const Grid& grid) {
  validate_grid(grid);
  Pseudospectrum out;
  out.method = Method::kMusic;
  out.grid_x = grid;
  out.grid_y = Grid{0.0, 0.0, 0};
  out.values.assign(grid.count, 0.0);
  for (int j = basis.source_count; j < basis.dimension; ++j)
    kernels::polyval_mag2_sweep(basis.column(j).data(),
                                static_cast<std::size_t>(basis.dimension),
                                -kPi * grid.start, -kPi * grid.step,
                                static_cast<std::size_t>(grid.count), out.values.data(),
                                true);
  for (auto& value : out.values) value = invert_capped(value);
  return out;
}

Pseudospectrum mnm_spectrum_2d(std::span<const std::complex<double>> min_norm,
                               int halfwidth, const Grid& grid_x, const Grid& grid_y) {
  const int side = halfwidth + 1;
  if (halfwidth < 0 || min_norm.size() != static_cast<std::size_t>(side) * side)
    throw std::invalid_argument("minimum-norm vector does not match the virtual array");
  validate_grid(grid_x);
  validate_grid(grid_y);
  Pseudospectrum out;
  out.method = Method::kMnm;
  out.grid_x = grid_x;
  out.grid_y = grid_y;
  out.values.assign(static_cast<std::size_t>(grid_x.count) * grid_y.count, 0.0);
  sweep_2d_mag2(min_norm.data(), side, grid_x, grid_y, out.values);
  for (auto& value : out.values) value = invert_capped(value);
  return out;
}

Pseudospectrum music_spectrum_2d(const EigenBasis& basis, int halfwidth,
                                 const Grid& grid_x, const Grid& grid_y) {
  const int side = halfwidth + 1;
  if (halfwidth < 0 || basis.dimension != side * side)
    throw std::invalid_argument("eigenbasis does not match the virtual array");
  validate_grid(grid_x);
  validate_grid(grid_y);
  Pseudospectrum out;
  out.method = Method::kMusic;
  out.grid_x = grid_x;
  out.grid_y = grid_y;
  std::vector<double> acc(static_cast<std::size_t>(grid_x.count) * grid_y.count, 0.0);

  // ||E_n^H v||^2 directly, or as ||v||^2 - ||E_s^H v||^2 when the signal side
  // has fewer columns to sweep
  const bool complement = basis.source_count <= basis.noise_count();
  const int begin = complement ? 0 : basis.source_count;
  const int end = complement ? basis.source_count : basis.dimension;
  for (int j = begin; j < end; ++j)
    sweep_2d_mag2(basis.column(j).data(), side, grid_x, grid_y, acc);

  out.values.resize(acc.size());
  const double whole = static_cast<double>(basis.dimension);
  for (std::size_t k = 0; k < acc.size(); ++k)
    out.values[k] = invert_capped(complement ? whole - acc[k] : acc[k]);
  return out;
}

PeakList find_peaks(const Pseudospectrum& spectrum, int count) {
  if (count < 0) throw std::invalid_argument("peak count must be non-negative");
  std::vector<Peak> found;

  if (!spectrum.planar()) {
    const auto& v = spectrum.values;
    const int n = static_cast<int>(v.size());
    for (int i = 1; i + 1 < n; ++i) {
      // strictly above the left neighbor, at least the right: a plateau counts
      // once, at its leftmost sample
      if (v[i] > v[i - 1] && v[i] >= v[i + 1]) {
        Peak peak;
        peak.x = spectrum.grid_x.point(i) +
                 refine_delta(v[i - 1], v[i], v[i + 1]) * spectrum.grid_x.step;
        peak.value = v[i];
        found.push_back(peak);
      }
    }
  } else {
    const int cx = spectrum.grid_x.count, cy = spectrum.grid_y.count;
    auto at = [&](int ix, int iy) {
      return spectrum.values[static_cast<std::size_t>(ix) * cy + iy];
    };
    for (int ix = 1; ix + 1 < cx; ++ix)
      for (int iy = 1; iy + 1 < cy; ++iy) {
        const double c = at(ix, iy);
        // strict against lexicographically smaller neighbors, lenient against
        // larger ones: an equal-valued plateau yields exactly one peak
        const bool peak = c > at(ix - 1, iy - 1) && c > at(ix - 1, iy) &&
                          c > at(ix - 1, iy + 1) && c > at(ix, iy - 1) &&
                          c >= at(ix, iy + 1) && c >= at(ix + 1, iy - 1) &&
                          c >= at(ix + 1, iy) && c >= at(ix + 1, iy + 1);
        if (!peak) continue;
        Peak p;
        p.x = spectrum.grid_x.point(ix) +
              refine_delta(at(ix - 1, iy), c, at(ix + 1, iy)) * spectrum.grid_x.step;
        p.y = spectrum.grid_y.point(iy) +
              refine_delta(at(ix, iy - 1), c, at(ix, iy + 1)) * spectrum.grid_y.step;
        p.value = c;
        found.push_back(p);
      }
  }

  std::stable_sort(found.begin(), found.end(),
                   [](const Peak& a, const Peak& b) { return a.value > b.value; });
  PeakList out;
  out.complete = static_cast<int>(found.size()) >= count;
  if (static_cast<int>(found.size()) > count) found.resize(count);
  out.peaks = std::move(found);
  return out;
}

PlanarEstimate linear_planar_estimate(const SnapshotSet& data,
                                      const PlanarArrayGeometry& geometry,
                                      int source_count, Method method,
                                      const Grid& grid) {
  if (source_count < 1) throw std::invalid_argument("source count must be at least 1");
  auto rx = axis_averaged_correlation(data, geometry, Axis::kX);
  auto ry = axis_averaged_correlation(data, geometry, Axis::kY);
  if (source_count >= rx.dimension)
    throw std::invalid_argument("source count must be below the virtual array size");

  auto spectrum_of = [&](const CorrelationEstimate& r) {
    auto basis = hermitian_eig(r, source_count);
    return method == Method::kMnm ? mnm_spectrum_1d(min_norm_vector(basis), grid)
                                  : music_spectrum_1d(basis, grid);
  };
  auto peaks_x = find_peaks(spectrum_of(rx), source_count);
  auto peaks_y = find_peaks(spectrum_of(ry), source_count);

  PlanarEstimate out;
  out.complete = peaks_x.complete && peaks_y.complete;
  if (peaks_x.peaks.empty() || peaks_y.peaks.empty()) return out;

  // score every candidate pair on the block-correlation noise subspace,
  // evaluated through the signal-side complement
  auto block_basis = hermitian_eig(planar_block_correlation(data, geometry), source_count);
  const int side = geometry.contiguous_halfwidth() + 1;
  const double whole = static_cast<double>(block_basis.dimension);

  std::vector<Peak> candidates;
  candidates.reserve(peaks_x.peaks.size() * peaks_y.peaks.size());
  // the axis peak lists are 1-d, so each candidate's ordinate is the y-axis
  // peak's location field
  for (const auto& px : peaks_x.peaks)
    for (const auto& py : peaks_y.peaks) {
      auto v = steering_vector_planar(px.x, py.x, side, side);
      double signal = 0;
      for (int j = 0; j < block_basis.source_count; ++j)
        signal +=
            std::norm(kernels::zdotc(v.data(), block_basis.column(j).data(), v.size()));
      candidates.push_back(Peak{px.x, py.x, invert_capped(whole - signal)});
    }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Peak& a, const Peak& b) { return a.value > b.value; });
  if (static_cast<int>(candidates.size()) > source_count) candidates.resize(source_count);
  out.pairs = std::move(candidates);
  return out;
}

}  // namespace sparsedoa
