#pragma once

#include <vector>

#include "fsfbmc/prototype_filter.hpp"
#include "fsfbmc/svd_smoothing.hpp"
#include "fsfbmc/types.hpp"

namespace fsfbmc {

// Frequency-spread transmultiplexer. Each half-symbol is synthesized as one
// length-N inverse DFT (N = fftFactor * M tones, fftFactor defaults to the
// overlap factor K), overlap-added at M/2 sample steps; the receiver slides
// a length-N window at the same step, takes the DFT and despreads with the
// conjugate spreading coefficients. Beamformers act per tone between the
// spreading stages.
class FsFbmcModem {
public:
    explicit FsFbmcModem(const PrototypeFilter& filter, int fftFactor = 0,
                         double spreadThreshold = 1e-4);

    int fft_size() const { return N_; }
    int subchannels() const { return filter_.M; }
    int tones_per_subchannel() const { return kappa_; }
    const PrototypeFilter& filter() const { return filter_; }
    const SpreadTable& spread_table() const { return table_; }

    long sample_count(int halfTimes) const {
        return static_cast<long>(halfTimes - 1) * (filter_.M / 2) + N_;
    }

    // Tones reached by any active subchannel, sorted by signed frequency so
    // adjacent list entries are physically adjacent. This is the order a
    // smoothing sweep should visit.
    std::vector<int> active_tones(const std::vector<std::uint8_t>& activeMask) const;

    SampleStream modulate(const PamGrid& pam, const BeamformerSet& beamformers,
                          std::vector<ToneFrame>* toneFrames = nullptr) const;

    struct DemodResult {
        ComplexGrid estimates;  // despread complex values before taking Re
        PamGrid pam;
    };
    DemodResult demodulate(const SampleStream& y, const BeamformerSet& beamformers,
                           int halfTimes,
                           const std::vector<std::uint8_t>& activeMask) const;

    // Variance of each complex despread estimate under white per-sample
    // noise of the given variance, indexed (subchannel, stream).
    std::vector<double> despread_noise_variance(
        const BeamformerSet& beamformers, const std::vector<std::uint8_t>& activeMask,
        double sampleNoiseVar) const;

private:
    PrototypeFilter filter_;
    int kappa_ = 0;
    int N_ = 0;
    SpreadTable table_;
};

// OQAM staggering: one complex symbol becomes two real half-symbols, the
// real part on even n and the imaginary part on odd n.
PamGrid oqam_stagger(const ComplexGrid& qam,
                     const std::vector<std::uint8_t>& activeMask = {});
ComplexGrid oqam_destagger(const PamGrid& pam);

}  // namespace fsfbmc
