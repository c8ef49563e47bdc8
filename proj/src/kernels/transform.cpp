#include <omp.h>

#include "isoctl/kernels.hpp"

namespace isoctl::kernels {

using cplx = std::complex<double>;

void project(const std::vector<double>& basis, std::size_t samples, std::size_t modes, const std::vector<double>& w,
             const std::vector<cplx>& psi, std::vector<cplx>& coeffs, Backend backend) {
  coeffs.assign(modes, cplx(0.0));
  if (backend == Backend::Serial) {
    for (std::size_t i = 0; i < samples; ++i) {
      const cplx wp = w[i] * psi[i];
      const double* row = &basis[i * modes];
      for (std::size_t k = 0; k < modes; ++k) coeffs[k] += row[k] * wp;
    }
    return;
  }
  // Each thread reduces a slab of samples into a private accumulator.
  const long ns = static_cast<long>(samples);
  const long nm = static_cast<long>(modes);
#pragma omp parallel
  {
    std::vector<double> re(modes, 0.0), im(modes, 0.0);
#pragma omp for schedule(static) nowait
    for (long i = 0; i < ns; ++i) {
      const double wr = w[i] * psi[i].real(), wi = w[i] * psi[i].imag();
      const double* row = &basis[i * modes];
      for (long k = 0; k < nm; ++k) {
        re[k] += row[k] * wr;
        im[k] += row[k] * wi;
      }
    }
#pragma omp critical
    for (long k = 0; k < nm; ++k) coeffs[k] += cplx(re[k], im[k]);
  }
}

void resum(const std::vector<double>& basis, std::size_t samples, std::size_t modes, const std::vector<cplx>& coeffs,
           std::vector<cplx>& psi, Backend backend) {
  psi.assign(samples, cplx(0.0));
  if (backend == Backend::Serial) {
    for (std::size_t i = 0; i < samples; ++i) {
      const double* row = &basis[i * modes];
      cplx s = 0.0;
      for (std::size_t k = 0; k < modes; ++k) s += row[k] * coeffs[k];
      psi[i] = s;
    }
    return;
  }
  std::vector<double> cre(modes), cim(modes);
  for (std::size_t k = 0; k < modes; ++k) {
    cre[k] = coeffs[k].real();
    cim[k] = coeffs[k].imag();
  }
  const long ns = static_cast<long>(samples);
  const long nm = static_cast<long>(modes);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < ns; ++i) {
    const double* row = &basis[i * modes];
    double sr = 0.0, si = 0.0;
    for (long k = 0; k < nm; ++k) {
      sr += row[k] * cre[k];
      si += row[k] * cim[k];
    }
    psi[i] = cplx(sr, si);
  }
}

}  // namespace isoctl::kernels
