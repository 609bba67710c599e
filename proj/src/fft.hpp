#pragma once

// Thin FFTW wrapper shared by the generators and the decomposition.

#include <complex>
#include <string>
#include <vector>

namespace mvf::detail {

using Complex = std::complex<double>;

/// Unnormalized forward DFT: X_k = sum_j x_j exp(-2 pi i jk / n).
std::vector<Complex> fft_forward(std::vector<Complex> data);

/// Unnormalized inverse DFT: x_j = sum_k X_k exp(+2 pi i jk / n). Callers
/// divide by n.
std::vector<Complex> fft_backward(std::vector<Complex> data);

std::string fft_library_version();

}  // namespace mvf::detail
