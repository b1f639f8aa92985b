#include "fsfbmc/baselines.hpp"

#include <algorithm>
#include <stdexcept>

#include "fsfbmc/fft.hpp"

namespace fsfbmc {
namespace {

int modn(long x, int n) { return static_cast<int>(((x % n) + n) % n); }

std::vector<int> subchannel_center_tones(const FsFbmcModem& modem,
                                         const std::vector<std::uint8_t>& mask) {
    const int N = modem.fft_size();
    const int kappa = modem.tones_per_subchannel();
    std::vector<int> tones;
    for (int m = 0; m < modem.subchannels(); ++m)
        if (mask[m]) tones.push_back(modn(static_cast<long>(kappa) * m, N));
    std::sort(tones.begin(), tones.end(), [N](int a, int b) {
        const int sa = a >= N / 2 ? a - N : a;
        const int sb = b >= N / 2 ? b - N : b;
        return sa < sb;
    });
    return tones;
}

}  // namespace

SchemeSpec parse_scheme(const std::string& name, int nIter) {
    SchemeSpec s;
    if (name == "ofdm") {
        s.ofdm = true;
        return s;
    }
    if (name == "subchannel") {
        s.granularity = BeamGranularity::perSubchannel;
        s.smoothing = {SmoothingKind::none, nIter};
        s.scramble = true;
        return s;
    }
    if (name == "subchannel-smoothed") {
        s.granularity = BeamGranularity::perSubchannel;
        s.smoothing = {SmoothingKind::orthoIter, nIter};
        return s;
    }
    if (name == "tone-unsmoothed") {
        s.granularity = BeamGranularity::perTone;
        s.smoothing = {SmoothingKind::none, nIter};
        s.scramble = true;
        return s;
    }
    if (name == "tone-ortho") {
        s.granularity = BeamGranularity::perTone;
        s.smoothing = {SmoothingKind::orthoIter, nIter};
        return s;
    }
    if (name == "tone-phase") {
        s.granularity = BeamGranularity::perTone;
        s.smoothing = {SmoothingKind::phaseFactor, nIter};
        return s;
    }
    throw std::invalid_argument("unknown scheme '" + name + "'");
}

std::vector<std::string> scheme_names() {
    return {"ofdm", "subchannel", "subchannel-smoothed",
            "tone-unsmoothed", "tone-ortho", "tone-phase"};
}

FbmcFrameResult fbmc_link(const FsFbmcModem& modem, const PamGrid& pam,
                          const ChannelFrequencyResponse& channel,
                          BeamGranularity granularity, const SmoothingMethod& smoothing,
                          bool scramble, double sampleNoiseVar,
                          std::uint64_t noiseSeed) {
    if (channel.fftSize != modem.fft_size())
        throw std::invalid_argument("channel grid does not match the modem fft size");
    const int L = pam.streams;

    const std::vector<int> tones =
        granularity == BeamGranularity::perTone
            ? modem.active_tones(pam.activeMask)
            : subchannel_center_tones(modem, pam.activeMask);
    BeamformerSet bf = smooth_sweep(channel, tones, smoothing, L);
    bf.granularity = granularity;
    if (scramble) scramble_phases(bf);

    SampleStream x = modem.modulate(pam, bf);
    SampleStream y = apply_channel(x, channel);
    add_awgn(y, sampleNoiseVar, 1.0, noiseSeed);

    FbmcFrameResult res;
    auto demod = modem.demodulate(y, bf, pam.halfTimes, pam.activeMask);
    res.symbols = oqam_destagger(demod.pam);
    res.pam = std::move(demod.pam);
    res.noiseVar = modem.despread_noise_variance(bf, pam.activeMask, sampleNoiseVar);
    res.beamformers = std::move(bf);
    return res;
}

FbmcFrameResult subchannel_fbmc_link(const FsFbmcModem& modem, const PamGrid& pam,
                                     const ChannelFrequencyResponse& channel,
                                     const SmoothingMethod& smoothing,
                                     double sampleNoiseVar, std::uint64_t noiseSeed) {
    if (smoothing.kind == SmoothingKind::phaseFactor)
        throw std::invalid_argument(
            "subchannel reference supports smoothing none or ortho only");
    return fbmc_link(modem, pam, channel, BeamGranularity::perSubchannel, smoothing,
                     smoothing.kind == SmoothingKind::none, sampleNoiseVar, noiseSeed);
}

OfdmFrameResult ofdm_svd_link(const FsFbmcModem& modem, const ComplexGrid& qam,
                              const std::vector<std::uint8_t>& activeMask,
                              const ChannelFrequencyResponse& channel,
                              double sampleNoiseVar, std::uint64_t noiseSeed,
                              double zfFloorRel) {
    const int M = modem.subchannels();
    const int kappa = modem.tones_per_subchannel();
    const int N = modem.fft_size();
    if (channel.fftSize != N)
        throw std::invalid_argument("channel grid does not match the modem fft size");
    if (qam.M != M) throw std::invalid_argument("symbol grid width must equal M");
    if (static_cast<int>(activeMask.size()) != M)
        throw std::invalid_argument("active mask length must equal M");
    const int L = qam.streams;
    const int cp = M / 4;
    const int symLen = M + cp;

    // per-subchannel SVD from the shared channel realization
    std::vector<const BeamformerEntry*> perSub(M, nullptr);
    const std::vector<int> centers = subchannel_center_tones(modem, activeMask);
    BeamformerSet bf = smooth_sweep(channel, centers, {SmoothingKind::none, 1}, L, zfFloorRel);
    const int Nt = channel.Nt;
    const int Nr = channel.Nr;
    for (int m = 0; m < M; ++m)
        if (activeMask[m]) perSub[m] = bf.at(modn(static_cast<long>(kappa) * m, N));

    const double scale = 1.0 / std::sqrt(static_cast<double>(M));
    SampleStream x(Nt, static_cast<long>(qam.cols) * symLen);
    std::vector<cd> tone(static_cast<std::size_t>(M) * Nt);
    std::vector<cd> in(M), out(M);
    for (int n = 0; n < qam.cols; ++n) {
        std::fill(tone.begin(), tone.end(), cd(0, 0));
        for (int m = 0; m < M; ++m) {
            if (!activeMask[m]) continue;
            const BeamformerEntry& e = *perSub[m];
            for (int a = 0; a < Nt; ++a) {
                cd acc(0, 0);
                for (int l = 0; l < L; ++l) acc += e.V(a, l) * qam.at(l, m, n);
                tone[static_cast<std::size_t>(m) * Nt + a] = acc;
            }
        }
        for (int a = 0; a < Nt; ++a) {
            for (int m = 0; m < M; ++m) in[m] = tone[static_cast<std::size_t>(m) * Nt + a];
            ifft_unscaled(in.data(), out.data(), M);
            const long base = static_cast<long>(n) * symLen;
            for (int i = 0; i < M; ++i) x.at(a, base + cp + i) = out[i] * scale;
            for (int i = 0; i < cp; ++i) x.at(a, base + i) = out[M - cp + i] * scale;
        }
    }

    SampleStream y = apply_channel(x, channel);
    add_awgn(y, sampleNoiseVar, 1.0, noiseSeed);

    OfdmFrameResult res;
    res.cyclicPrefix = cp;
    res.symbols = ComplexGrid(L, M, qam.cols);
    res.noiseVar.assign(static_cast<std::size_t>(M) * L, 0.0);
    for (int m = 0; m < M; ++m) {
        if (!activeMask[m]) continue;
        const BeamformerEntry& e = *perSub[m];
        for (int l = 0; l < L; ++l)
            res.noiseVar[static_cast<std::size_t>(m) * L + l] =
                sampleNoiseVar * e.E(l) * e.E(l);
    }

    std::vector<cd> win(M), spec(M);
    std::vector<std::vector<cd>> rx(Nr, std::vector<cd>(M));
    for (int n = 0; n < qam.cols; ++n) {
        const long base = static_cast<long>(n) * symLen + cp;
        for (int a = 0; a < Nr; ++a) {
            for (int i = 0; i < M; ++i) {
                const long src = base + i;
                win[i] = src < y.samples ? y.at(a, src) : cd(0, 0);
            }
            fft(win.data(), spec.data(), M);
            for (int m = 0; m < M; ++m) rx[a][m] = spec[m] * scale;
        }
        for (int m = 0; m < M; ++m) {
            if (!activeMask[m]) continue;
            const BeamformerEntry& e = *perSub[m];
            for (int l = 0; l < L; ++l) {
                cd acc(0, 0);
                for (int a = 0; a < Nr; ++a) acc += std::conj(e.U(a, l)) * rx[a][m];
                res.symbols.at(l, m, n) = acc * e.E(l);
            }
        }
    }
    return res;
}

}  // namespace fsfbmc
