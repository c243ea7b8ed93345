#include <cmath>

#include "sparsedoa/kernels.hpp"

// Reference implementations. Arithmetic is written out on re/im doubles so the
// semantics (naive complex products, no NaN fixups) match the SIMD variants.

namespace sparsedoa::kernels::scalar {

std::complex<double> zdotc(const std::complex<double>* x, const std::complex<double>* y,
                           std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    const double yr = y[i].real(), yi = y[i].imag();
    re += xr * yr + xi * yi;
    im += xr * yi - xi * yr;
  }
  return {re, im};
}

void polyval_mag2_sweep(const std::complex<double>* coeffs, std::size_t n, double phase0,
                        double phase_step, std::size_t count, double* out, bool accumulate) {
  for (std::size_t g = 0; g < count; ++g) {
    const double phase = phase0 + phase_step * static_cast<double>(g);
    const double zr = std::cos(phase), zi = std::sin(phase);
    double sr = coeffs[n - 1].real(), si = coeffs[n - 1].imag();
    for (std::size_t k = n - 1; k-- > 0;) {
      const double tr = sr * zr - si * zi;
      const double ti = sr * zi + si * zr;
      sr = tr + coeffs[k].real();
      si = ti + coeffs[k].imag();
    }
    const double value = sr * sr + si * si;
    out[g] = accumulate ? out[g] + value : value;
  }
}

void apply_rotation(std::complex<double>* x, std::complex<double>* y, std::size_t n, double c,
                    std::complex<double> s) {
  const double sr = s.real(), si = s.imag();
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    const double yr = y[i].real(), yi = y[i].imag();
    x[i] = {c * xr - (sr * yr - si * yi), c * xi - (sr * yi + si * yr)};
    y[i] = {sr * xr + si * xi + c * yr, sr * xi - si * xr + c * yi};
  }
}

}  // namespace sparsedoa::kernels::scalar
