#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace fsfbmc {

using cd = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// i^e for possibly negative e
inline cd ipow(long e) {
    static const cd tab[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return tab[((e % 4) + 4) % 4];
}

// Real OQAM symbols, indexed (stream, subchannel, half-symbol time).
struct PamGrid {
    int streams = 0;
    int M = 0;
    int halfTimes = 0;
    std::vector<double> values;
    std::vector<std::uint8_t> activeMask;  // per subchannel, 1 = carries data

    PamGrid() = default;
    PamGrid(int streams_, int M_, int halfTimes_)
        : streams(streams_), M(M_), halfTimes(halfTimes_),
          values(static_cast<std::size_t>(streams_) * M_ * halfTimes_, 0.0),
          activeMask(M_, 1) {}

    double& at(int l, int m, int n) {
        return values[(static_cast<std::size_t>(l) * M + m) * halfTimes + n];
    }
    double at(int l, int m, int n) const {
        return values[(static_cast<std::size_t>(l) * M + m) * halfTimes + n];
    }
};

// Complex symbols (QAM in, estimates out), same indexing as PamGrid.
struct ComplexGrid {
    int streams = 0;
    int M = 0;
    int cols = 0;
    std::vector<cd> values;

    ComplexGrid() = default;
    ComplexGrid(int streams_, int M_, int cols_)
        : streams(streams_), M(M_), cols(cols_),
          values(static_cast<std::size_t>(streams_) * M_ * cols_) {}

    cd& at(int l, int m, int n) {
        return values[(static_cast<std::size_t>(l) * M + m) * cols + n];
    }
    cd at(int l, int m, int n) const {
        return values[(static_cast<std::size_t>(l) * M + m) * cols + n];
    }
};

// Baseband samples per antenna.
struct SampleStream {
    int antennas = 0;
    long samples = 0;
    std::vector<cd> x;

    SampleStream() = default;
    SampleStream(int antennas_, long samples_)
        : antennas(antennas_), samples(samples_),
          x(static_cast<std::size_t>(antennas_) * samples_) {}

    cd& at(int a, long i) { return x[static_cast<std::size_t>(a) * samples + i]; }
    cd at(int a, long i) const { return x[static_cast<std::size_t>(a) * samples + i]; }
};

// Per-window frequency-domain snapshot, antennas x fftSize, antenna-major.
struct ToneFrame {
    int antennas = 0;
    int fftSize = 0;
    std::vector<cd> b;

    ToneFrame() = default;
    ToneFrame(int antennas_, int fftSize_)
        : antennas(antennas_), fftSize(fftSize_),
          b(static_cast<std::size_t>(antennas_) * fftSize_) {}

    cd& at(int a, int k) { return b[static_cast<std::size_t>(a) * fftSize + k]; }
    cd at(int a, int k) const { return b[static_cast<std::size_t>(a) * fftSize + k]; }
};

// Little-endian interleaved float32 (re, im) pairs.
void write_complex64(const std::string& path, const cd* data, std::size_t count);
std::vector<cd> read_complex64(const std::string& path);

}  // namespace fsfbmc
