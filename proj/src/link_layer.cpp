#include "fsfbmc/link_layer.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fsfbmc/rng.hpp"

namespace fsfbmc {
namespace {

constexpr int kStates = 64;

// generator polynomials arrive MSB-first (coefficient of D^0 at the top
// octal digit); the register keeps the newest bit at the LSB, so flip them
unsigned reverse7(unsigned g) {
    unsigned out = 0;
    for (int i = 0; i < 7; ++i)
        if (g & (1u << i)) out |= 1u << (6 - i);
    return out;
}

inline int parity(unsigned x) { return std::popcount(x) & 1; }

// keep bits A1 B1 A2, drop B2 from every mother-code quad
inline bool punctured_out(std::size_t motherIndex) { return motherIndex % 4 == 3; }

struct AxisMap {
    std::vector<double> levels;       // level value per bit pattern
    std::vector<std::uint8_t> gray;   // bit pattern per ascending level
};

// Gray axis maps for 4- and 8-level PAM, unit-average-energy QAM scaling
const AxisMap& axis_map(int order) {
    static const AxisMap qam16 = [] {
        AxisMap m;
        const double s = 1.0 / std::sqrt(10.0);
        m.levels = {-3 * s, -1 * s, 3 * s, 1 * s};  // patterns 00 01 10 11
        m.gray = {0b00, 0b01, 0b11, 0b10};
        return m;
    }();
    static const AxisMap qam64 = [] {
        AxisMap m;
        const double s = 1.0 / std::sqrt(42.0);
        m.levels.assign(8, 0.0);
        m.gray = {0b000, 0b001, 0b011, 0b010, 0b110, 0b111, 0b101, 0b100};
        for (int i = 0; i < 8; ++i) m.levels[m.gray[i]] = (2 * i - 7) * s;
        return m;
    }();
    if (order == 16) return qam16;
    if (order == 64) return qam64;
    throw std::invalid_argument("QAM order must be 16 or 64");
}

int bits_per_symbol(int order) { return order == 16 ? 4 : 6; }

}  // namespace

std::vector<std::uint32_t> make_interleaver(std::size_t n, std::uint64_t seed) {
    std::vector<std::uint32_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<std::uint32_t>(i);
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = rng.below(i);
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

std::vector<std::uint8_t> encode(const std::vector<std::uint8_t>& bits,
                                 const CodeConfig& cfg) {
    const unsigned m0 = reverse7(cfg.gen0);
    const unsigned m1 = reverse7(cfg.gen1);
    std::vector<std::uint8_t> punctured;
    punctured.reserve(bits.size() * 3 / 2 + 1);
    unsigned reg = 0;
    std::size_t motherIndex = 0;
    for (std::uint8_t b : bits) {
        reg = ((reg << 1) | (b & 1u)) & 0x7Fu;
        const std::uint8_t c0 = static_cast<std::uint8_t>(parity(reg & m0));
        const std::uint8_t c1 = static_cast<std::uint8_t>(parity(reg & m1));
        if (!punctured_out(motherIndex++)) punctured.push_back(c0);
        if (!punctured_out(motherIndex++)) punctured.push_back(c1);
    }
    const auto perm = make_interleaver(punctured.size(), cfg.interleaverSeed);
    std::vector<std::uint8_t> out(punctured.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = punctured[perm[i]];
    return out;
}

std::vector<std::uint8_t> decode(const std::vector<double>& llrs,
                                 const CodeConfig& cfg) {
    const std::size_t msgLen = llrs.size() * 2 / 3;
    if (msgLen == 0) return {};
    if ((msgLen * 3 + 1) / 2 != llrs.size())
        throw std::invalid_argument("LLR count is not a rate-2/3 block length");

    // deinterleave (llrs[i] belongs at punctured position perm[i]), then
    // depuncture with neutral LLRs at the dropped positions
    const auto perm = make_interleaver(llrs.size(), cfg.interleaverSeed);
    std::vector<double> punctured(llrs.size(), 0.0);
    for (std::size_t i = 0; i < llrs.size(); ++i) punctured[perm[i]] = llrs[i];
    std::vector<double> mother(2 * msgLen, 0.0);
    std::size_t kept = 0;
    for (std::size_t motherIndex = 0; motherIndex < 2 * msgLen; ++motherIndex)
        mother[motherIndex] = punctured_out(motherIndex) ? 0.0 : punctured[kept++];

    const unsigned m0 = reverse7(cfg.gen0);
    const unsigned m1 = reverse7(cfg.gen1);
    constexpr double kNoPath = -std::numeric_limits<double>::infinity();
    std::vector<double> metric(kStates, kNoPath), next(kStates);
    metric[0] = 0.0;
    std::vector<std::uint8_t> survivor(msgLen * kStates);

    for (std::size_t step = 0; step < msgLen; ++step) {
        const double l0 = mother[2 * step];
        const double l1 = mother[2 * step + 1];
        for (int s = 0; s < kStates; ++s) {
            const int b = s & 1;
            double best = kNoPath;
            std::uint8_t choice = 0;
            for (int hi = 0; hi < 2; ++hi) {
                const int prev = (s >> 1) | (hi << 5);
                if (metric[prev] == kNoPath) continue;
                const unsigned reg = (static_cast<unsigned>(prev) << 1) | static_cast<unsigned>(b);
                const double branch = (parity(reg & m0) ? -l0 : l0) +
                                      (parity(reg & m1) ? -l1 : l1);
                const double cand = metric[prev] + branch;
                if (cand > best) {  // ties keep the hi = 0 predecessor
                    best = cand;
                    choice = static_cast<std::uint8_t>(hi);
                }
            }
            next[s] = best;
            survivor[step * kStates + s] = choice;
        }
        metric.swap(next);
    }

    int state = 0;
    double best = metric[0];
    for (int s = 1; s < kStates; ++s)
        if (metric[s] > best) {  // ties keep the lowest state index
            best = metric[s];
            state = s;
        }

    std::vector<std::uint8_t> bits(msgLen);
    for (std::size_t step = msgLen; step-- > 0;) {
        bits[step] = static_cast<std::uint8_t>(state & 1);
        state = (state >> 1) | (survivor[step * kStates + state] << 5);
    }
    return bits;
}

std::vector<std::uint8_t> encode_frame(const std::vector<std::uint8_t>& info,
                                       const CodeConfig& cfg) {
    std::vector<std::uint8_t> tailed = info;
    tailed.insert(tailed.end(), 6, 0);
    return encode(tailed, cfg);
}

std::vector<std::uint8_t> decode_frame(const std::vector<double>& llrs,
                                       const CodeConfig& cfg) {
    std::vector<std::uint8_t> bits = decode(llrs, cfg);
    if (bits.size() < 6) throw std::invalid_argument("frame shorter than its tail");
    bits.resize(bits.size() - 6);
    return bits;
}

long frame_info_bits(long capacityBits) {
    const long info = capacityBits * 2 / 3 - 6;
    if (info < 1) throw std::invalid_argument("capacity too small for a coded frame");
    return info;
}

std::vector<cd> qam_map(const std::vector<std::uint8_t>& bits, int order) {
    const AxisMap& axis = axis_map(order);
    const int bps = bits_per_symbol(order);
    const int half = bps / 2;
    if (bits.size() % bps != 0)
        throw std::invalid_argument("bit count is not a multiple of bits per symbol");
    std::vector<cd> out(bits.size() / bps);
    for (std::size_t s = 0; s < out.size(); ++s) {
        unsigned i = 0, q = 0;
        for (int b = 0; b < half; ++b) {
            i = (i << 1) | bits[s * bps + b];
            q = (q << 1) | bits[s * bps + half + b];
        }
        out[s] = cd(axis.levels[i], axis.levels[q]);
    }
    return out;
}

std::vector<std::uint8_t> qam_hard(const std::vector<cd>& symbols, int order) {
    const AxisMap& axis = axis_map(order);
    const int half = bits_per_symbol(order) / 2;
    const int nLevels = 1 << half;
    auto slice = [&](double v) {
        int best = 0;
        double bestDist = std::abs(v - axis.levels[axis.gray[0]]);
        for (int i = 1; i < nLevels; ++i) {
            const double d = std::abs(v - axis.levels[axis.gray[i]]);
            if (d < bestDist) {
                bestDist = d;
                best = i;
            }
        }
        return axis.gray[best];
    };
    std::vector<std::uint8_t> bits(symbols.size() * 2 * half);
    for (std::size_t s = 0; s < symbols.size(); ++s) {
        const unsigned i = slice(symbols[s].real());
        const unsigned q = slice(symbols[s].imag());
        for (int b = 0; b < half; ++b) {
            bits[s * 2 * half + b] = (i >> (half - 1 - b)) & 1;
            bits[s * 2 * half + half + b] = (q >> (half - 1 - b)) & 1;
        }
    }
    return bits;
}

std::vector<double> qam_demap(const std::vector<cd>& symbols, int order,
                              const std::vector<double>& noiseVar) {
    if (noiseVar.size() != symbols.size())
        throw std::invalid_argument("need one noise variance per symbol");
    const AxisMap& axis = axis_map(order);
    const int half = bits_per_symbol(order) / 2;
    const int nLevels = 1 << half;

    auto axis_llrs = [&](double v, double var, double* out) {
        for (int b = 0; b < half; ++b) {
            double d0 = std::numeric_limits<double>::infinity();
            double d1 = d0;
            for (int p = 0; p < nLevels; ++p) {
                const double d = (v - axis.levels[p]) * (v - axis.levels[p]);
                if ((p >> (half - 1 - b)) & 1)
                    d1 = std::min(d1, d);
                else
                    d0 = std::min(d0, d);
            }
            out[b] = (d1 - d0) / var;
        }
    };

    std::vector<double> llrs(symbols.size() * 2 * half);
    for (std::size_t s = 0; s < symbols.size(); ++s) {
        const double var = std::max(noiseVar[s], 1e-30);
        axis_llrs(symbols[s].real(), var, &llrs[s * 2 * half]);
        axis_llrs(symbols[s].imag(), var, &llrs[s * 2 * half + half]);
    }
    return llrs;
}

std::vector<double> qam_demap(const std::vector<cd>& symbols, int order,
                              double noiseVar) {
    return qam_demap(symbols, order, std::vector<double>(symbols.size(), noiseVar));
}

}  // namespace fsfbmc
