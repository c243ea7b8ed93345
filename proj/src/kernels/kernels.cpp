#include "sparsedoa/kernels.hpp"

#include <cstdlib>

namespace sparsedoa::kernels {

namespace {

struct Backend {
  const char* name;
  std::complex<double> (*zdotc)(const std::complex<double>*, const std::complex<double>*,
                                std::size_t);
  void (*polyval_mag2_sweep)(const std::complex<double>*, std::size_t, double, double,
                             std::size_t, double*, bool);
  void (*apply_rotation)(std::complex<double>*, std::complex<double>*, std::size_t, double,
                         std::complex<double>);
};

Backend pick_backend() {
  const char* force = std::getenv("SPARSEDOA_FORCE_SCALAR");
  const bool forced_scalar = force && force[0] == '1';
#if defined(SPARSEDOA_HAVE_AVX2)
  if (!forced_scalar && avx2::supported())
    return {"avx2", avx2::zdotc, avx2::polyval_mag2_sweep, avx2::apply_rotation};
#else
  (void)forced_scalar;
#endif
  return {"scalar", scalar::zdotc, scalar::polyval_mag2_sweep, scalar::apply_rotation};
}

const Backend& backend() {
  static const Backend chosen = pick_backend();
  return chosen;
}

}  // namespace

const char* backend_name() { return backend().name; }

std::complex<double> zdotc(const std::complex<double>* x, const std::complex<double>* y,
                           std::size_t n) {
  return backend().zdotc(x, y, n);
}

void polyval_mag2_sweep(const std::complex<double>* coeffs, std::size_t n, double phase0,
                        double phase_step, std::size_t count, double* out, bool accumulate) {
  backend().polyval_mag2_sweep(coeffs, n, phase0, phase_step, count, out, accumulate);
}

void apply_rotation(std::complex<double>* x, std::complex<double>* y, std::size_t n, double c,
                    std::complex<double> s) {
  backend().apply_rotation(x, y, n, c, s);
}

}  // namespace sparsedoa::kernels
