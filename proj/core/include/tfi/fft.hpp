#pragma once

#include <span>

#include "tfi/types.hpp"

namespace tfi {

// Iterative radix-2 transforms. Forward is unnormalized,
//   X[l] = sum_n x[n] e^{-j 2 pi n l / N},
// and the inverse carries the 1/N factor so ifft(fft(x)) == x.
// Lengths must be powers of two; anything else throws std::invalid_argument.

void fft_inplace(std::span<Complex> x);
void ifft_inplace(std::span<Complex> x);

Samples fft(std::span<const Complex> x);
Samples ifft(std::span<const Complex> x);

}  // namespace tfi
