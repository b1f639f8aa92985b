#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "fsfbmc/types.hpp"

namespace fsfbmc {

// Exponentially decaying power-delay profile on a 50 ns tap grid.
struct DelayProfile {
    std::string name;
    std::vector<int> tapDelays;     // in samples
    std::vector<double> tapPowers;  // sums to 1
};

// Presets "D", "E", "F" (max excess delay 390, 730, 1050 ns) and "flat".
DelayProfile preset_profile(const std::string& model);

// Key-value text file: name=..., max_delay_ns=..., sample_ns=... or an
// explicit taps= list of delay:power pairs.
DelayProfile load_profile(const std::string& path);

// One MIMO channel draw, held as both taps and the per-tone DFT.
struct ChannelFrequencyResponse {
    int Nr = 0;
    int Nt = 0;
    int fftSize = 0;
    std::vector<int> tapDelays;
    std::vector<cd> taps;  // (r, t, p) -> ((r*Nt)+t)*nTaps + p
    std::vector<cd> H;     // (k, r, t) -> ((k*Nr)+r)*Nt + t

    cd tap(int r, int t, int p) const {
        return taps[(static_cast<std::size_t>(r) * Nt + t) * tapDelays.size() + p];
    }
    cd h(int k, int r, int t) const {
        return H[(static_cast<std::size_t>(k) * Nr + r) * Nt + t];
    }
    Eigen::MatrixXcd tone(int k) const;
    int max_delay() const { return tapDelays.empty() ? 0 : tapDelays.back(); }
};

// iid CN(0, p_d) taps per antenna pair, evaluated on an fftSize tone grid.
ChannelFrequencyResponse realize_channel(const DelayProfile& profile, int Nr,
                                         int Nt, int fftSize, std::uint64_t seed);

// Subchannel-referenced noise power N_t * sigmaA2 * sigmaH2 / 10^(snrDb/10).
double snr_to_noise_variance(double snrDb, int Nt, double sigmaA2 = 1.0,
                             double sigmaH2 = 1.0);

// Adds complex white noise of per-sample variance sigmaN2 * activeFraction,
// the time-domain equivalent of per-subchannel variance sigmaN2 when only a
// fraction of the subchannels carry power.
void add_awgn(SampleStream& y, double sigmaN2, double activeFraction,
              std::uint64_t seed);

// Linear FIR convolution across the MIMO matrix; output is extended by the
// maximum tap delay so the tail is kept.
SampleStream apply_channel(const SampleStream& x, const ChannelFrequencyResponse& ch);

// Tone-major complex64 dump of H.
void export_channel(const ChannelFrequencyResponse& ch, const std::string& path);

}  // namespace fsfbmc
