#include "sparsedoa/kernels.hpp"

#if defined(SPARSEDOA_HAVE_AVX2)

#include <immintrin.h>

#include <cmath>

// Two interleaved complex doubles per __m256d lane group: [re0, im0, re1, im1].

namespace sparsedoa::kernels::avx2 {

namespace {

// a * b elementwise on complex pairs
inline __m256d cmul(__m256d a, __m256d b) {
  const __m256d b_re = _mm256_movedup_pd(b);
  const __m256d b_im = _mm256_permute_pd(b, 0xF);
  const __m256d a_sw = _mm256_permute_pd(a, 0x5);
  return _mm256_fmaddsub_pd(a, b_re, _mm256_mul_pd(a_sw, b_im));
}

}  // namespace

bool supported() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

std::complex<double> zdotc(const std::complex<double>* x, const std::complex<double>* y,
                           std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(reinterpret_cast<const double*>(x + i));
    const __m256d yv = _mm256_loadu_pd(reinterpret_cast<const double*>(y + i));
    const __m256d x_re = _mm256_movedup_pd(xv);
    const __m256d x_im = _mm256_permute_pd(xv, 0xF);
    const __m256d y_sw = _mm256_permute_pd(yv, 0x5);
    // even: xr*yr + xi*yi, odd: xr*yi - xi*yr
    acc = _mm256_add_pd(acc, _mm256_fmsubadd_pd(x_re, yv, _mm256_mul_pd(x_im, y_sw)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double re = lanes[0] + lanes[2];
  double im = lanes[1] + lanes[3];
  for (; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    const double yr = y[i].real(), yi = y[i].imag();
    re += xr * yr + xi * yi;
    im += xr * yi - xi * yr;
  }
  return {re, im};
}

void polyval_mag2_sweep(const std::complex<double>* coeffs, std::size_t n, double phase0,
                        double phase_step, std::size_t count, double* out, bool accumulate) {
  const auto* tail = coeffs;
  std::size_t g = 0;
  for (; g + 2 <= count; g += 2) {
    const double ph0 = phase0 + phase_step * static_cast<double>(g);
    const double ph1 = ph0 + phase_step;
    const __m256d z = _mm256_setr_pd(std::cos(ph0), std::sin(ph0), std::cos(ph1), std::sin(ph1));
    __m256d acc = _mm256_broadcast_pd(reinterpret_cast<const __m128d*>(coeffs + (n - 1)));
    for (std::size_t k = n - 1; k-- > 0;) {
      const __m256d ck = _mm256_broadcast_pd(reinterpret_cast<const __m128d*>(coeffs + k));
      acc = _mm256_add_pd(cmul(acc, z), ck);
    }
    const __m256d sq = _mm256_mul_pd(acc, acc);
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, sq);
    const double v0 = lanes[0] + lanes[1];
    const double v1 = lanes[2] + lanes[3];
    if (accumulate) {
      out[g] += v0;
      out[g + 1] += v1;
    } else {
      out[g] = v0;
      out[g + 1] = v1;
    }
  }
  if (g < count)
    scalar::polyval_mag2_sweep(tail, n, phase0 + phase_step * static_cast<double>(g), phase_step,
                               count - g, out + g, accumulate);
}

void apply_rotation(std::complex<double>* x, std::complex<double>* y, std::size_t n, double c,
                    std::complex<double> s) {
  const __m256d cv = _mm256_set1_pd(c);
  const __m256d sr = _mm256_set1_pd(s.real());
  const __m256d si = _mm256_set1_pd(s.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(reinterpret_cast<const double*>(x + i));
    const __m256d yv = _mm256_loadu_pd(reinterpret_cast<const double*>(y + i));
    const __m256d x_sw = _mm256_permute_pd(xv, 0x5);
    const __m256d y_sw = _mm256_permute_pd(yv, 0x5);
    // s*y: even sr*yr - si*yi, odd sr*yi + si*yr
    const __m256d sy = _mm256_fmaddsub_pd(sr, yv, _mm256_mul_pd(si, y_sw));
    // conj(s)*x: even sr*xr + si*xi, odd sr*xi - si*xr
    const __m256d csx = _mm256_fmsubadd_pd(sr, xv, _mm256_mul_pd(si, x_sw));
    _mm256_storeu_pd(reinterpret_cast<double*>(x + i), _mm256_fmsub_pd(cv, xv, sy));
    _mm256_storeu_pd(reinterpret_cast<double*>(y + i), _mm256_fmadd_pd(cv, yv, csx));
  }
  if (i < n) scalar::apply_rotation(x + i, y + i, n - i, c, s);
}

}  // namespace sparsedoa::kernels::avx2

#endif  // SPARSEDOA_HAVE_AVX2
