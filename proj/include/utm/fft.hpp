#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace utm {

// In-place unnormalized DFT along one axis of a row-major array.
// sign = -1 is exp(-2 pi i jk/n), sign = +1 the conjugate kernel.
void fft_axis(std::vector<std::complex<double>>& data, const std::vector<std::size_t>& shape, std::size_t axis,
              int sign);

}  // namespace utm
