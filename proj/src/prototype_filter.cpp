#include "fsfbmc/prototype_filter.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "fsfbmc/fft.hpp"

namespace fsfbmc {
namespace {

// Frequency-domain weights H_1..H_{K-1}. For K = 4 the two constraints
// H_1^2 + H_3^2 = 1 and H_2 = sqrt(2)/2 have the closed-form solution below,
// which also zeroes g(0); the usual 8-digit literature values are rounded
// versions of these.
std::vector<double> phydyas_weights(int K) {
    switch (K) {
        case 2:
            return {std::sqrt(2.0) / 2.0};
        case 3: {
            const double h1 = (1.0 + std::sqrt(7.0)) / 4.0;
            return {h1, h1 - 0.5};
        }
        case 4: {
            const double c = 0.5 + std::sqrt(2.0) / 2.0;
            const double h1 = (c + std::sqrt(2.0 - c * c)) / 2.0;
            return {h1, std::sqrt(2.0) / 2.0, c - h1};
        }
        default:
            throw std::invalid_argument("overlap factor K must be 2, 3 or 4");
    }
}

long modring(long x, long n) { return ((x % n) + n) % n; }

}  // namespace

PrototypeFilter design_phydyas(int M, int K) {
    const auto h = phydyas_weights(K);
    if (M < 8 || (M & (M - 1)) != 0)
        throw std::invalid_argument("subchannel count M must be a power of two, at least 8");

    const int N = K * M;
    PrototypeFilter f;
    f.M = M;
    f.K = K;
    f.g.assign(N, 0.0);
    for (int i = 0; i < N; ++i) {
        double v = 1.0;
        for (int q = 1; q < K; ++q) {
            const double sign = (q & 1) ? -1.0 : 1.0;
            v += 2.0 * sign * h[q - 1] * std::cos(2.0 * kPi * q * i / N);
        }
        f.g[i] = v;
    }
    // The weight constraints make the sum vanish at i = 0 for K >= 3; pin the
    // rounding residue so downstream zero tests are exact.
    if (K >= 3) f.g[0] = 0.0;

    double energy = 0.0;
    for (double v : f.g) energy += v * v;
    const double scale = 1.0 / std::sqrt(energy);
    for (double& v : f.g) v *= scale;

    std::vector<cd> gc(f.g.begin(), f.g.end());
    f.G = fft(gc);

    double peak = 0.0;
    for (const cd& v : f.G) peak = std::max(peak, std::abs(v));
    int p = 1;
    while (p < N / 2 && std::abs(f.G[p]) > 1e-3 * peak) ++p;
    f.P = p;
    return f;
}

SpreadTable make_spread_table(const PrototypeFilter& f, int fftSize, double threshold) {
    const int KM = f.K * f.M;
    if (fftSize < KM || fftSize % f.M != 0)
        throw std::invalid_argument("spread table fftSize must be a multiple of M, at least K*M");

    std::vector<cd> padded(fftSize, cd(0, 0));
    for (int i = 0; i < KM; ++i) padded[i] = f.g[i];
    const std::vector<cd> Gf = fft(padded);

    double peak = 0.0;
    for (const cd& v : Gf) peak = std::max(peak, std::abs(v));

    SpreadTable t;
    t.fftSize = fftSize;
    for (int off = -fftSize / 2; off < fftSize / 2; ++off) {
        const cd v = Gf[static_cast<std::size_t>(modring(off, fftSize))];
        if (std::abs(v) > threshold * peak) {
            t.offsets.push_back(off);
            t.values.push_back(v);
        }
    }
    return t;
}

std::vector<cd> spread_coefficients(const PrototypeFilter& f, int m, long n,
                                    long n0, int fftSize) {
    const int KM = f.K * f.M;
    const int N = fftSize > 0 ? fftSize : KM;
    if (N < KM || N % f.M != 0)
        throw std::invalid_argument("spread fftSize must be a multiple of M, at least K*M");
    if (m < 0 || m >= f.M) throw std::invalid_argument("subchannel index out of range");

    std::vector<cd> w(N, cd(0, 0));
    const long shift = (n - n0) * f.M / 2;  // pulse start relative to window start
    const cd phase = ipow(m + n);
    bool overlap = false;
    for (int i = 0; i < N; ++i) {
        const long u = i - shift;
        if (u < 0 || u >= KM) continue;
        overlap = true;
        const long iAbs = n0 * (f.M / 2) + i;
        const double arg = 2.0 * kPi * m * static_cast<double>(modring(iAbs, f.M)) / f.M;
        w[i] = f.g[static_cast<std::size_t>(u)] * std::polar(1.0, arg) * phase;
    }
    if (!overlap) return std::vector<cd>(N, cd(0, 0));

    std::vector<cd> out(N);
    fft(w.data(), out.data(), N);
    return out;
}

cd transmux_response(const PrototypeFilter& f, int m, long n, int m0, long n0) {
    const int KM = f.K * f.M;
    if (std::labs(n - n0) >= 2 * f.K) return cd(0, 0);

    const cd ph1 = ipow(m + n);
    const cd ph0 = ipow(m0 + n0);
    cd acc(0, 0);
    for (int i = 0; i < KM; ++i) {
        const double g1 = f.g[static_cast<std::size_t>(modring(i - n * f.M / 2, KM))];
        const double g0 = f.g[static_cast<std::size_t>(modring(i - n0 * f.M / 2, KM))];
        if (g1 == 0.0 || g0 == 0.0) continue;
        const int im = i % f.M;
        const cd p1 = g1 * std::polar(1.0, 2.0 * kPi * m * im / f.M) * ph1;
        const cd p0 = g0 * std::polar(1.0, 2.0 * kPi * m0 * im / f.M) * ph0;
        acc += std::conj(p0) * p1;
    }
    return acc;
}

void export_coefficients(const PrototypeFilter& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    char line[64];
    for (std::size_t i = 0; i < f.g.size(); ++i) {
        std::snprintf(line, sizeof line, "%zu %.17g\n", i, f.g[i]);
        out << line;
    }
    if (!out) throw std::runtime_error("short write to " + path);
}

}  // namespace fsfbmc
