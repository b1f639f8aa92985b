#pragma once

#include <vector>

#include "fsfbmc/types.hpp"

namespace fsfbmc {

// Forward DFT, X(k) = sum_i x(i) e^{-j2pi ki/n}, no scaling. in and out must
// be distinct buffers of length n.
void fft(const cd* in, cd* out, int n);

// Inverse DFT without the 1/n factor, x(i) = sum_k X(k) e^{+j2pi ki/n}.
void ifft_unscaled(const cd* in, cd* out, int n);

std::vector<cd> fft(const std::vector<cd>& in);
std::vector<cd> ifft_unscaled(const std::vector<cd>& in);

}  // namespace fsfbmc
