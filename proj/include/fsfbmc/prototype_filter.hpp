#pragma once

#include <string>
#include <vector>

#include "fsfbmc/types.hpp"

namespace fsfbmc {

// Frequency-sampled PHYDYAS prototype with overlap factor K on M subchannels.
// g has unit energy and length K*M; G is its DFT on the native K*M grid.
// P counts the non-negligible one-sided frequency tones (2P-1 in total).
struct PrototypeFilter {
    int M = 0;
    int K = 0;
    int P = 0;
    std::vector<double> g;
    std::vector<cd> G;
};

PrototypeFilter design_phydyas(int M, int K);

// Frequency response of the pulse on an oversampled grid, thinned to the
// tones above threshold * peak. offsets are signed and ascending; values[i]
// is the response at tone offset offsets[i] from the pulse center frequency.
struct SpreadTable {
    int fftSize = 0;
    std::vector<int> offsets;
    std::vector<cd> values;
};

SpreadTable make_spread_table(const PrototypeFilter& f, int fftSize,
                              double threshold = 1e-4);

// Length-fftSize DFT of the portion of pulse g_{m,n} that falls inside the
// sliding analysis window starting at sample n0*M/2. Pulses that do not meet
// the window give an all-zero vector. fftSize 0 selects the native K*M grid.
std::vector<cd> spread_coefficients(const PrototypeFilter& f, int m, long n,
                                    long n0, int fftSize = 0);

// Intrinsic interference table: inner product <g_{m0,n0}, g_{m,n}> taken on
// the K*M ring, so it reflects the steady-state overlap-add response. It is
// 1 at the origin, purely imaginary elsewhere, and exactly zero once the
// time offset reaches 2K half-symbols.
cd transmux_response(const PrototypeFilter& f, int m, long n, int m0, long n0);

// Plain-text dump of the impulse response, one "index value" row per sample.
void export_coefficients(const PrototypeFilter& f, const std::string& path);

}  // namespace fsfbmc
