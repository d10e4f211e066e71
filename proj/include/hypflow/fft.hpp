#pragma once

// 2-D complex FFT front end (FFTW backed).  Forward transforms are normalized
// by 1/n^2 so coefficients are expansion coefficients; inverse is unnormalized.
// Plans use FFTW_ESTIMATE: plan selection is then deterministic for a given n,
// which keeps repeated runs byte-identical.

#include <complex>
#include <vector>

namespace hypflow {

using cplx = std::complex<double>;

std::vector<cplx> fft2_forward(int n, const std::vector<double>& real_values);
std::vector<cplx> fft2_forward_c(int n, const std::vector<cplx>& values);
std::vector<double> fft2_inverse_real(int n, const std::vector<cplx>& coeffs);
std::vector<cplx> fft2_inverse_c(int n, const std::vector<cplx>& coeffs);

// signed mode index for raw bin k: m in [-n/2, n/2)
inline int mode_of(int k, int n) { return k < n / 2 ? k : k - n; }

} // namespace hypflow
