#pragma once

#include <vector>

#include "fsfbmc/channel_model.hpp"
#include "fsfbmc/fsfbmc_modem.hpp"
#include "fsfbmc/svd_smoothing.hpp"
#include "fsfbmc/types.hpp"

namespace fsfbmc {

// One transmission scheme: waveform, beamformer granularity, smoothing, and
// whether library-style arbitrary SVD phases are emulated.
struct SchemeSpec {
    bool ofdm = false;
    BeamGranularity granularity = BeamGranularity::perTone;
    SmoothingMethod smoothing{};
    bool scramble = false;
};

// Known scheme names: "ofdm", "subchannel", "subchannel-smoothed",
// "tone-unsmoothed", "tone-ortho", "tone-phase".
SchemeSpec parse_scheme(const std::string& name, int nIter = 3);
std::vector<std::string> scheme_names();

struct FbmcFrameResult {
    ComplexGrid symbols;            // destaggered complex estimates
    PamGrid pam;                    // raw real half-symbol estimates
    std::vector<double> noiseVar;   // complex-estimate variance, (m, l)
    BeamformerSet beamformers;
};

// Full noisy beamformed FBMC pass: sweep beamformers from the true channel,
// modulate, convolve, add white noise of per-sample variance sampleNoiseVar,
// demodulate, destagger. The per-(subchannel, stream) complex noise variance
// of the symbol estimates is reported for demapping.
FbmcFrameResult fbmc_link(const FsFbmcModem& modem, const PamGrid& pam,
                          const ChannelFrequencyResponse& channel,
                          BeamGranularity granularity, const SmoothingMethod& smoothing,
                          bool scramble, double sampleNoiseVar,
                          std::uint64_t noiseSeed);

// Subchannel-level reference: one beamformer per subchannel, smoothing
// either "none" (with scrambled phases, as a plain SVD library would give)
// or the orthogonal-iteration sweep.
FbmcFrameResult subchannel_fbmc_link(const FsFbmcModem& modem, const PamGrid& pam,
                                     const ChannelFrequencyResponse& channel,
                                     const SmoothingMethod& smoothing,
                                     double sampleNoiseVar, std::uint64_t noiseSeed);

struct OfdmFrameResult {
    ComplexGrid symbols;
    std::vector<double> noiseVar;  // (m, l)
    int cyclicPrefix = 0;
};

// SVD-beamformed CP-OFDM on the same subchannel grid, CP length M/4. The
// channel is evaluated at the subchannel centers of the modem tone grid, so
// both waveforms see the same realization.
OfdmFrameResult ofdm_svd_link(const FsFbmcModem& modem, const ComplexGrid& qam,
                              const std::vector<std::uint8_t>& activeMask,
                              const ChannelFrequencyResponse& channel,
                              double sampleNoiseVar, std::uint64_t noiseSeed,
                              double zfFloorRel = 1e-6);

}  // namespace fsfbmc
