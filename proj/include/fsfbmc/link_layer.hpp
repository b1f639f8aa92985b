#pragma once

#include <cstdint>
#include <vector>

#include "fsfbmc/types.hpp"

namespace fsfbmc {

// Rate-2/3 punctured convolutional code, constraint length 7, with a seeded
// random interleaver over the punctured block. LLR convention throughout:
// positive means bit 0 is more likely.
struct CodeConfig {
    unsigned gen0 = 0133;  // octal, 1 + D^2 + D^3 + D^5 + D^6
    unsigned gen1 = 0171;  // octal, 1 + D + D^2 + D^3 + D^6
    std::uint64_t interleaverSeed = 0x1e7a5eedULL;
};

// Fisher-Yates permutation of {0..n-1} from the seed; position i of the
// output block takes punctured bit perm[i].
std::vector<std::uint32_t> make_interleaver(std::size_t n, std::uint64_t seed);

// Encode a raw block (no tail handling): ceil(3 len / 2) output bits.
std::vector<std::uint8_t> encode(const std::vector<std::uint8_t>& bits,
                                 const CodeConfig& cfg = {});

// Soft Viterbi decode of a full block; the message length is implied by the
// LLR count. The survivor starts in state 0 and ends at the best metric.
std::vector<std::uint8_t> decode(const std::vector<double>& llrs,
                                 const CodeConfig& cfg = {});

// Frame variants append and strip a 6-bit zero tail that parks the encoder
// back in state 0.
std::vector<std::uint8_t> encode_frame(const std::vector<std::uint8_t>& info,
                                       const CodeConfig& cfg = {});
std::vector<std::uint8_t> decode_frame(const std::vector<double>& llrs,
                                       const CodeConfig& cfg = {});

// Largest info-bit count whose tailed, rate-2/3-coded frame fits into
// capacity coded bits.
long frame_info_bits(long capacityBits);

// Gray-mapped square QAM, unit average energy. order is 16 or 64.
std::vector<cd> qam_map(const std::vector<std::uint8_t>& bits, int order);
std::vector<std::uint8_t> qam_hard(const std::vector<cd>& symbols, int order);

// Max-log demapping; noiseVar is the variance of the complex noise on each
// symbol (a scalar or one value per symbol).
std::vector<double> qam_demap(const std::vector<cd>& symbols, int order,
                              double noiseVar);
std::vector<double> qam_demap(const std::vector<cd>& symbols, int order,
                              const std::vector<double>& noiseVar);

}  // namespace fsfbmc
