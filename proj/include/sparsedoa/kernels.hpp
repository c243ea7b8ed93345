#pragma once

#include <complex>
#include <cstddef>

namespace sparsedoa::kernels {

// Hot arithmetic loops, one scalar reference implementation plus SIMD variants
// chosen once at startup (override with SPARSEDOA_FORCE_SCALAR=1). Variants may
// differ from the reference only by rounding (summation order, FMA).

// sum_i conj(x[i]) * y[i]
std::complex<double> zdotc(const std::complex<double>* x, const std::complex<double>* y,
                           std::size_t n);

// out[g] (+)= |sum_k coeffs[k] * z_g^k|^2, z_g = exp(i * (phase0 + g * phase_step)).
// Evaluates steering-vector inner products on a uniform direction grid.
void polyval_mag2_sweep(const std::complex<double>* coeffs, std::size_t n, double phase0,
                        double phase_step, std::size_t count, double* out, bool accumulate);

// Paired Givens update: (x[i], y[i]) <- (c*x[i] - s*y[i], conj(s)*x[i] + c*y[i]).
void apply_rotation(std::complex<double>* x, std::complex<double>* y, std::size_t n,
                    double c, std::complex<double> s);

const char* backend_name();

namespace scalar {
std::complex<double> zdotc(const std::complex<double>* x, const std::complex<double>* y,
                           std::size_t n);
void polyval_mag2_sweep(const std::complex<double>* coeffs, std::size_t n, double phase0,
                        double phase_step, std::size_t count, double* out, bool accumulate);
void apply_rotation(std::complex<double>* x, std::complex<double>* y, std::size_t n,
                    double c, std::complex<double> s);
}  // namespace scalar

#if defined(SPARSEDOA_HAVE_AVX2)
namespace avx2 {
bool supported();
std::complex<double> zdotc(const std::complex<double>* x, const std::complex<double>* y,
                           std::size_t n);
void polyval_mag2_sweep(const std::complex<double>* coeffs, std::size_t n, double phase0,
                        double phase_step, std::size_t count, double* out, bool accumulate);
void apply_rotation(std::complex<double>* x, std::complex<double>* y, std::size_t n,
                    double c, std::complex<double> s);
}  // namespace avx2
#endif

}  // namespace sparsedoa::kernels
