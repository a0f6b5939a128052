#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace coxkern::fft {

/// Smallest n' >= n whose only prime factors are 2, 3, 5 and 7.
std::size_t good_size(std::size_t n);

/// In-place forward DFT, X_k = sum_j x_j exp(-2 pi i j k / n).
void forward(std::vector<std::complex<double>>& data);

/// Real parts of the DFT of a real sequence (length of the input).
std::vector<double> real_dft_real_part(std::span<const double> x);

/// Linear (non-circular) lag products sum_{j=0}^{n-1-k} x_j x_{j+k} for
/// k = 0 .. max_lag, via zero-padded real FFTs.
std::vector<double> lag_products(std::span<const double> x, std::size_t max_lag);

}  // namespace coxkern::fft
