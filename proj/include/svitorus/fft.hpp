#pragma once

#include <complex>
#include <cstddef>

namespace svt::fft {

/// In-place unnormalized radix-2 DFT of length n (power of two):
/// data[k] = sum_x data[x] * exp(-2*pi*i*k*x/n).
void forward(std::complex<double>* data, int n);

/// In-place unnormalized inverse DFT: data[x] = sum_k data[k] * exp(+2*pi*i*k*x/n).
void inverse(std::complex<double>* data, int n);

/// 2D transforms on row-major n x n data (axis 0 slowest). Unnormalized.
void forward2d(std::complex<double>* data, int n);
void inverse2d(std::complex<double>* data, int n);

}  // namespace svt::fft
