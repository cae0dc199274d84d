#pragma once

#include <complex>

namespace qpnls {

class Grid;

namespace fft {

/// Unnormalized in-place DFTs (FFTW sign convention: forward = exp(-i xi x)).
/// Inverse transforms must be scaled by the caller.  All entry points are
/// thread-safe; plans use deterministic (estimate-mode) planning.
void forward(const Grid& grid, std::complex<double>* data);
void backward(const Grid& grid, std::complex<double>* data);
void forward_axis(const Grid& grid, std::complex<double>* data, int axis);
void backward_axis(const Grid& grid, std::complex<double>* data, int axis);

/// Contiguous 1-D in-place transform of `count` stacked rows of length `len`
/// (row k starts at data + k*len).  sign: -1 forward, +1 backward.
void dft_rows(std::complex<double>* data, int len, int count, int sign);

}  // namespace fft
}  // namespace qpnls
